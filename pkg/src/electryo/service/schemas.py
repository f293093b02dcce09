from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class ConfigIn(BaseModel):
    name: str = "electryo-demo"
    candidates: list[str] = Field(default_factory=lambda: ["Alice", "Bob", "Carol"], min_length=2)
    voter_count: int = Field(25, ge=2)
    tellers: tuple[int, int] = (3, 2)
    mix_servers: int = Field(3, ge=1)
    group: str = "test"
    seed: int = 0
    sign_extra: bool = False
    date: str = ""
    station: str = ""


class TranscriptRef(BaseModel):
    transcript: str


class SetupRequest(TranscriptRef):
    config: ConfigIn = Field(default_factory=ConfigIn)


class ElectionOut(BaseModel):
    transcript: str
    election_id: str
    state: str
    entries: int
    warnings: list[str] = []


class VoteRequest(TranscriptRef):
    voter: int
    candidate: int
    fault: Optional[str] = None


class VoteOut(BaseModel):
    voter: int
    receipt: str


class BoardOut(ElectionOut):
    board: list[tuple[int, int]]


class NotifyRequest(TranscriptRef):
    voters: Optional[list[int]] = None
    claimed: dict[int, str] = {}


class NotificationOut(BaseModel):
    voter: int
    status: str
    row: Optional[int] = None


class NotifyOut(BaseModel):
    notifications: list[NotificationOut]


class WalletOut(BaseModel):
    election_id: str
    group: str
    voter: int
    voter_id: str
    sk: str
    alpha: Optional[str] = None


class CoerceRequest(TranscriptRef):
    voter: int
    candidate: int


class CoerceOut(BaseModel):
    voter: int
    tracker: int
    alpha: str


class AuditRequest(TranscriptRef):
    direction: str = "bb-to-paper"
    sample_size: int = Field(5, ge=1)
    seed: int = 0
    box: int = 0
    method: str = "blind"


class AuditOut(BaseModel):
    direction: str
    sampled: list[int]
    matches: list[int]
    mismatches: list[tuple[int, str]]
    method: str
    population: int


class DisputeRequest(TranscriptRef):
    voter: int
    claimed: int


class VerdictOut(BaseModel):
    verdict: str
    reason: str


class FailureOut(BaseModel):
    category: str
    message: str
    phase: str = ""
    seq: Optional[int] = None


class ReportOut(BaseModel):
    ok: bool
    checked: list[str]
    skipped: list[str]
    failures: list[FailureOut]


class ScenarioRequest(BaseModel):
    config: ConfigIn = Field(default_factory=ConfigIn)
    script: dict
    transcript: Optional[str] = None
