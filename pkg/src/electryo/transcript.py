"""Typed read access to a bulletin-board transcript.

Entry bodies are canonical-encoded maps with a ``kind`` key.  This module
names the kinds, builds the Fiat-Shamir contexts each entry's proofs use, and
parses bodies back into protocol objects.  The pipeline writes with the same
helpers, so writer and verifier cannot drift apart.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .bulletin import BbEntry, BulletinBoard, Phase
from .crypto.elgamal import Ciphertext
from .crypto.groups import Group, get_group
from .crypto.rcca import RccaCiphertext
from .mixnet import RCCA, MixBatch, MixStage
from .roles import ScannerTuple
from .tellers import CommitmentFactor, DecryptShare, TallyKey
from .trackers import VoterRow
from .zkp.fiat_shamir import FsContext
from .zkp.pet import PetResult

# entry kinds
ELECTION = "election"
TALLY_KEY = "tally-key"
TRACKERS = "trackers"
TRACKER_MIX = "tracker-mix"
COMMITMENT_FACTORS = "commitment-factors"
COMMITMENT_DECRYPTION = "commitment-decryption"
VOTER_ROWS = "voter-rows"
BALLOT = "ballot"
CLOSE = "close"
MIX_INPUT = "mix-input"
MIX_STAGE = "mix-stage"
MIX_SKIPPED = "mix-skipped"
IDSIG_DECRYPTION = "idsig-decryption"
ELIGIBILITY = "eligibility"
JOINED_ROWS = "joined-rows"
TALLY_DECRYPTION = "tally-decryption"
TALLY_BOARD = "tally-board"
PAUSE = "notification-pause"
PET = "pet"
AUDIT_DECRYPTION = "audit-decryption"
AUDIT_RECORD = "audit-record"
DISPUTE = "dispute"

# eligibility statuses
OK = "ok"
BAD_SIGNATURE = "bad-signature"
DUPLICATE_ID = "duplicate-id"
UNKNOWN_ID = "unknown-id"
MALFORMED = "malformed"


def tracker_mix_ctx(eid: bytes) -> FsContext:
    return FsContext.for_statement(eid, "tracker-mix")


def commitments_ctx(eid: bytes) -> FsContext:
    return FsContext.for_statement(eid, "commitments")


def stage1_ctx(eid: bytes) -> FsContext:
    return FsContext.for_statement(eid, "mix-idsig")


def stage2_ctx(eid: bytes) -> FsContext:
    return FsContext.for_statement(eid, "mix-tracker-vote")


def idsig_ctx(eid: bytes, row: int, pair: int) -> FsContext:
    return FsContext.for_statement(eid, "idsig-decryption", [row, pair])


def tally_ctx(eid: bytes, row: int, col: int) -> FsContext:
    return FsContext.for_statement(eid, "tally-decryption", [row, col])


def audit_ctx(eid: bytes, purpose: str, index: int) -> FsContext:
    return FsContext.for_statement(eid, "audit", [purpose, index])


def parse_rows(group: Group, kinds, rows) -> list[tuple]:
    return [
        tuple(RccaCiphertext.from_wire(group, s) if k == RCCA else Ciphertext.from_wire(group, s)
              for s, k in zip(row, kinds))
        for row in rows
    ]


def rows_wire(rows) -> list:
    return [[s.to_wire() for s in row] for row in rows]


def shares_wire(shares) -> list:
    return [s.to_wire() for s in shares]


@dataclass(frozen=True)
class ElectionParams:
    election_id: bytes
    group: Group
    candidates: tuple[str, ...]
    n_voters: int
    n_trackers: int
    n_tellers: int
    threshold: int
    mix_servers: int
    extra: bytes

    def to_wire(self) -> dict:
        return {"kind": ELECTION, "election_id": self.election_id, "group": self.group.name,
                "candidates": list(self.candidates), "n_voters": self.n_voters,
                "n_trackers": self.n_trackers, "tellers": [self.n_tellers, self.threshold],
                "mix_servers": self.mix_servers, "extra": self.extra}

    @classmethod
    def from_wire(cls, w: dict) -> "ElectionParams":
        n, t = w["tellers"]
        return cls(bytes(w["election_id"]), get_group(w["group"]), tuple(w["candidates"]),
                   int(w["n_voters"]), int(w["n_trackers"]), int(n), int(t), int(w["mix_servers"]),
                   bytes(w["extra"]))


class TranscriptView:
    """Lazy parsed view; each accessor raises on a missing or malformed entry."""

    def __init__(self, bb: BulletinBoard | list[BbEntry]):
        self.entries = bb.entries() if isinstance(bb, BulletinBoard) else list(bb)

    def all(self, kind: str, phase: Phase | None = None) -> list[BbEntry]:
        return [e for e in self.entries if e.kind == kind and (phase is None or e.phase == phase)]

    def one(self, kind: str, phase: Phase | None = None) -> BbEntry:
        found = self.all(kind, phase)
        if len(found) != 1:
            raise LookupError(f"expected one {kind!r} entry, found {len(found)}")
        return found[0]

    def has(self, kind: str, phase: Phase | None = None) -> bool:
        return bool(self.all(kind, phase))

    @cached_property
    def params(self) -> ElectionParams:
        return ElectionParams.from_wire(self.one(ELECTION, Phase.Setup).body)

    @property
    def group(self) -> Group:
        return self.params.group

    @property
    def eid(self) -> bytes:
        return self.params.election_id

    @cached_property
    def key(self) -> TallyKey:
        return TallyKey.from_wire(self.group, self.one(TALLY_KEY, Phase.Setup).body["key"])

    @cached_property
    def teller_vks(self) -> dict:
        body = self.one(TALLY_KEY, Phase.Setup).body
        return {int(k): self.group.from_bytes(v) for k, v in body["teller_vks"]}

    @cached_property
    def trackers(self) -> list[int]:
        return [int(x) for x in self.one(TRACKERS, Phase.Setup).body["trackers"]]

    @cached_property
    def tracker_stages(self) -> list[MixStage]:
        return [MixStage.from_wire(self.group, s) for s in self.one(TRACKER_MIX, Phase.Setup).body["stages"]]

    @cached_property
    def assigned_trackers(self) -> list[Ciphertext]:
        rows = self.tracker_stages[-1].output.rows
        return [r[0] for r in rows[:self.params.n_voters]]

    @cached_property
    def factor_postings(self) -> dict[int, list[CommitmentFactor]]:
        out = {}
        for e in self.all(COMMITMENT_FACTORS, Phase.PreVote):
            body = e.body
            out[int(body["teller"])] = [CommitmentFactor.from_wire(self.group, p) for p in body["postings"]]
        return out

    @cached_property
    def commitment_decryption(self) -> list[tuple]:
        g = self.group
        return [
            (g.from_bytes(r["C"]), [DecryptShare.from_wire(g, s) for s in r["shares"]])
            for r in self.one(COMMITMENT_DECRYPTION, Phase.PreVote).body["rows"]
        ]

    @cached_property
    def commitments(self) -> list:
        return [c for c, _ in self.commitment_decryption]

    @cached_property
    def voter_rows(self) -> list[VoterRow]:
        return [VoterRow.from_wire(self.group, r) for r in self.one(VOTER_ROWS, Phase.PreVote).body["rows"]]

    def ballot_entries(self) -> list[BbEntry]:
        return self.all(BALLOT, Phase.CastBallots)

    @cached_property
    def ballots(self) -> list[ScannerTuple]:
        return [ScannerTuple.from_wire(self.group, e.body["tuple"]) for e in self.ballot_entries()]

    @cached_property
    def mix_input(self) -> dict:
        return self.one(MIX_INPUT, Phase.MixIdSig).body

    @cached_property
    def stage1_input_rows(self) -> list[tuple]:
        body = self.mix_input
        return parse_rows(self.group, body["kinds"], body["rows"])

    @cached_property
    def stage1_input(self) -> MixBatch | None:
        rows = self.stage1_input_rows
        return MixBatch.of(rows, tuple(self.mix_input["kinds"])) if len(rows) >= 2 else None

    def stages(self, phase: Phase) -> list[MixStage]:
        return [MixStage.from_wire(self.group, e.body["stage"]) for e in self.all(MIX_STAGE, phase)]

    @cached_property
    def stage1_stages(self) -> list[MixStage]:
        return self.stages(Phase.MixIdSig)

    @cached_property
    def stage1_output(self) -> list[tuple]:
        if self.stage1_stages:
            return list(self.stage1_stages[-1].output.rows)
        return self.stage1_input_rows

    @cached_property
    def idsig_rows(self) -> list[dict]:
        return self.one(IDSIG_DECRYPTION, Phase.MixIdSig).body["rows"]

    @cached_property
    def eligibility(self) -> list[dict]:
        return self.one(ELIGIBILITY, Phase.EligibleBallots).body["rows"]

    @cached_property
    def joined_rows(self) -> list[dict]:
        return self.one(JOINED_ROWS, Phase.EligibleBallots).body["rows"]

    @cached_property
    def stage2_input_rows(self) -> list[tuple]:
        g = self.group
        return [(Ciphertext.from_wire(g, r["tracker"]), Ciphertext.from_wire(g, r["vote"])) for r in self.joined_rows]

    @cached_property
    def stage2_stages(self) -> list[MixStage]:
        return self.stages(Phase.MixTrackerVote)

    @cached_property
    def stage2_output(self) -> list[tuple]:
        if self.stage2_stages:
            return list(self.stage2_stages[-1].output.rows)
        return self.stage2_input_rows

    @cached_property
    def tally_decryption(self) -> list[dict]:
        return self.one(TALLY_DECRYPTION, Phase.TallyBoard).body["rows"]

    @cached_property
    def tally_board(self) -> list[tuple[int, int]]:
        return [(int(t), int(v)) for t, v in self.one(TALLY_BOARD, Phase.TallyBoard).body["rows"]]

    def pets(self) -> list[dict]:
        return [e.body for e in self.all(PET, Phase.PetLog)]

    def pet_results(self) -> list[tuple[int, Ciphertext, PetResult]]:
        g = self.group
        return [(int(b["row"]), Ciphertext.from_wire(g, b["claimed"]), PetResult.from_wire(g, b["result"]))
                for b in self.pets()]

    def row_of_id(self, voter_id: bytes) -> int | None:
        for r in self.eligibility:
            if bytes(r["id"]) == voter_id and r["status"] == OK:
                return int(r["row"])
        return None

    def voter_index(self, voter_id: bytes) -> int | None:
        for i, row in enumerate(self.voter_rows):
            if row.voter_id == voter_id:
                return i
        return None

    def decrypted_ids(self) -> list[bytes]:
        return [bytes(r["id"]) for r in self.eligibility]
