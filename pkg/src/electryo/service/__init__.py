"""FastAPI service wrapping the election simulator."""
from .app import app, create_app

__all__ = ["app", "create_app"]
