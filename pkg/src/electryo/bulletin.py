"""Append-only, hash-chained bulletin board with phase discipline."""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Iterator

from .encoding import EncodingError, decode, decode_stream, encode
from .errors import ChainBroken, PhaseOrderViolation

MAGIC = b"ELECTRYO-BB\x01"
ZERO_HASH = bytes(32)


class Phase(Enum):
    Setup = "Setup"
    PreVote = "PreVote"
    CastBallots = "CastBallots"
    MixIdSig = "MixIdSig"
    EligibleBallots = "EligibleBallots"
    MixTrackerVote = "MixTrackerVote"
    TallyBoard = "TallyBoard"
    PetLog = "PetLog"
    AuditLog = "AuditLog"

    @property
    def rank(self) -> int:
        return _RANK[self]


# PetLog and AuditLog share a rank: notification checks and audits interleave.
_RANK = {p: i for i, p in enumerate(Phase)}
_RANK[Phase.AuditLog] = _RANK[Phase.PetLog]


def entry_hash(prev: bytes, seq: int, phase: Phase, author: str, payload: bytes) -> bytes:
    h = hashlib.sha256()
    h.update(prev)
    h.update(encode(seq))
    h.update(encode(phase.value))
    h.update(encode(author))
    h.update(encode(payload))
    return h.digest()


@dataclass(frozen=True)
class BbEntry:
    seq: int
    phase: Phase
    author: str
    payload: bytes
    prev_hash: bytes
    entry_hash: bytes

    @cached_property
    def body(self) -> Any:
        """Decoded payload, cached; treat as read-only."""
        return decode(self.payload)

    @cached_property
    def kind(self) -> str | None:
        body = self.body
        return body.get("kind") if isinstance(body, dict) else None

    def to_wire(self) -> list:
        return [self.seq, self.phase.value, self.author, self.payload, self.prev_hash, self.entry_hash]

    @classmethod
    def from_wire(cls, wire) -> "BbEntry":
        seq, phase, author, payload, prev, h = wire
        return cls(int(seq), Phase(phase), str(author), bytes(payload), bytes(prev), bytes(h))

    def resealed(self, prev_hash: bytes, seq: int | None = None) -> "BbEntry":
        seq = self.seq if seq is None else seq
        return BbEntry(seq, self.phase, self.author, self.payload, prev_hash,
                       entry_hash(prev_hash, seq, self.phase, self.author, self.payload))


@dataclass(frozen=True)
class BbSnapshot:
    head_hash: bytes
    length: int


def verify_chain(entries: Iterable[BbEntry]) -> bool:
    """Raise ``ChainBroken`` at the first entry that breaks the chain."""
    prev, rank = ZERO_HASH, -1
    for i, e in enumerate(entries):
        if e.seq != i:
            raise ChainBroken(i, f"sequence number {e.seq}")
        if e.prev_hash != prev:
            raise ChainBroken(i, "previous-hash link mismatch")
        if e.entry_hash != entry_hash(prev, e.seq, e.phase, e.author, e.payload):
            raise ChainBroken(i, "entry hash mismatch")
        if e.phase.rank < rank:
            raise ChainBroken(i, f"phase {e.phase.value} after a later phase")
        rank = max(rank, e.phase.rank)
        prev = e.entry_hash
    return True


def reseal(entries: Iterable[BbEntry]) -> list[BbEntry]:
    """Recompute every link (used to build tamper fixtures that keep the chain intact)."""
    out, prev = [], ZERO_HASH
    for i, e in enumerate(entries):
        e = e.resealed(prev, i)
        out.append(e)
        prev = e.entry_hash
    return out


class BulletinBoard:
    """Single-writer log; reads see only committed entries.

    With ``path`` set, every append is also written through to that file.
    """

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._entries: list[BbEntry] = []
        self._path = Path(path) if path is not None else None
        if self._path is not None:
            self._path.write_bytes(MAGIC)

    @classmethod
    def from_entries(cls, entries: Iterable[BbEntry]) -> "BulletinBoard":
        bb = cls()
        bb._entries = list(entries)
        return bb

    @property
    def current_phase(self) -> Phase | None:
        return self._entries[-1].phase if self._entries else None

    def append(self, phase: Phase, author: str, body: Any) -> BbEntry:
        payload = body if isinstance(body, bytes) else encode(body)
        with self._lock:
            if self._entries and phase.rank < self._entries[-1].phase.rank:
                raise PhaseOrderViolation(
                    f"{phase.value} entry after {self._entries[-1].phase.value} has opened")
            prev = self._entries[-1].entry_hash if self._entries else ZERO_HASH
            seq = len(self._entries)
            entry = BbEntry(seq, phase, author, payload, prev, entry_hash(prev, seq, phase, author, payload))
            self._entries.append(entry)
            if self._path is not None:
                with self._path.open("ab") as fh:
                    fh.write(encode(entry.to_wire()))
            return entry

    def entries(self) -> list[BbEntry]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[BbEntry]:
        return iter(self.entries())

    def read_phase(self, phase: Phase) -> list[BbEntry]:
        return [e for e in self.entries() if e.phase == phase]

    def find(self, kind: str, phase: Phase | None = None) -> list[BbEntry]:
        return [e for e in self.entries() if (phase is None or e.phase == phase) and e.kind == kind]

    def snapshot(self) -> BbSnapshot:
        entries = self.entries()
        return BbSnapshot(entries[-1].entry_hash if entries else ZERO_HASH, len(entries))

    def to_bytes(self) -> bytes:
        return MAGIC + b"".join(encode(e.to_wire()) for e in self.entries())

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "BulletinBoard":
        if not data.startswith(MAGIC):
            raise EncodingError("not a transcript file")
        return cls.from_entries(BbEntry.from_wire(w) for w in decode_stream(data, len(MAGIC)))

    @classmethod
    def load(cls, path: str | Path) -> "BulletinBoard":
        return cls.from_bytes(Path(path).read_bytes())


def snapshot_of(entries: list[BbEntry]) -> BbSnapshot:
    return BbSnapshot(entries[-1].entry_hash if entries else ZERO_HASH, len(entries))
