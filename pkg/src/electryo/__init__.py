"""Electryo: polling-station voting with Selene tracker verification."""

__version__ = "0.1.0"
