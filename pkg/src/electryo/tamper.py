"""Canned transcript mutations for exercising the verifier.

Each mutation takes the entries of an honest, fully tallied transcript and
returns a corrupted copy together with the verifier category that must flag it.
All but the chain edit re-seal the hash chain, so the corruption is only
visible to the check responsible for the edited entry.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable

from .bulletin import BbEntry, Phase, reseal
from .encoding import encode
from .transcript import (
    BALLOT,
    MIX_STAGE,
    TALLY_BOARD,
    TALLY_DECRYPTION,
    VOTER_ROWS,
    ELIGIBILITY,
    TranscriptView,
)


@dataclass(frozen=True)
class Mutation:
    name: str
    category: str
    apply: Callable[[list[BbEntry]], list[BbEntry]]


def _index(entries: list[BbEntry], kind: str, phase: Phase | None = None, nth: int = 0) -> int:
    hits = [i for i, e in enumerate(entries) if e.kind == kind and (phase is None or e.phase == phase)]
    return hits[nth]


def _edit(entries: list[BbEntry], idx: int, fn) -> list[BbEntry]:
    body = copy.deepcopy(entries[idx].body)
    fn(body)
    out = list(entries)
    e = out[idx]
    out[idx] = BbEntry(e.seq, e.phase, e.author, encode(body), e.prev_hash, e.entry_hash)
    return reseal(out)


def chain_edit(entries):
    idx = _index(entries, BALLOT)
    e = entries[idx]
    out = list(entries)
    out[idx] = BbEntry(e.seq, e.phase, e.author + "-x", e.payload, e.prev_hash, e.entry_hash)
    return out


def commitment_edit(entries):
    g = TranscriptView(entries).group

    def fn(body):
        c = g.from_bytes(body["rows"][0]["C"])
        body["rows"][0]["C"] = (c * g.generator).to_bytes()
    return _edit(entries, _index(entries, VOTER_ROWS), fn)


def tracker_row_duplicate(entries):
    def fn(body):
        body["rows"][1]["tracker"] = copy.deepcopy(body["rows"][0]["tracker"])
    return _edit(entries, _index(entries, VOTER_ROWS), fn)


def vote_swap(entries):
    i, j = _index(entries, BALLOT, nth=0), _index(entries, BALLOT, nth=1)
    a, b = copy.deepcopy(entries[i].body), copy.deepcopy(entries[j].body)
    a["tuple"]["vote"], b["tuple"]["vote"] = b["tuple"]["vote"], a["tuple"]["vote"]
    out = list(entries)
    for k, body in ((i, a), (j, b)):
        e = out[k]
        out[k] = BbEntry(e.seq, e.phase, e.author, encode(body), e.prev_hash, e.entry_hash)
    return reseal(out)


def signature_forge(entries):
    def fn(body):
        sig = bytearray(body["rows"][0]["sig"])
        sig[-1] ^= 1
        body["rows"][0]["sig"] = bytes(sig)
    return _edit(entries, _index(entries, ELIGIBILITY), fn)


def mix_row_drop(entries):
    def fn(body):
        body["stage"]["output"]["rows"].pop(0)
    return _edit(entries, _index(entries, MIX_STAGE, Phase.MixTrackerVote, nth=0), fn)


def proof_edit(entries):
    def fn(body):
        proof = body["rows"][0]["shares"][0][0]["proof"]
        proof["s"] = int(proof["s"]) + 1
    return _edit(entries, _index(entries, TALLY_DECRYPTION), fn)


def tally_row_edit(entries):
    n_cand = len(TranscriptView(entries).params.candidates)

    def fn(body):
        t, v = body["rows"][0]
        body["rows"][0] = [t, (int(v) + 1) % n_cand]
    return _edit(entries, _index(entries, TALLY_BOARD), fn)


MUTATIONS: tuple[Mutation, ...] = (
    Mutation("chain-edit", "chain", chain_edit),
    Mutation("commitment-edit", "setup", commitment_edit),
    Mutation("tracker-row-duplicate", "setup", tracker_row_duplicate),
    Mutation("vote-ciphertext-swap", "ballot-proofs", vote_swap),
    Mutation("signature-forge", "eligibility", signature_forge),
    Mutation("mix-row-drop", "mix-tracker-vote", mix_row_drop),
    Mutation("proof-edit", "tally-decryption", proof_edit),
    Mutation("tally-row-edit", "tally-board", tally_row_edit),
)

__all__ = ["Mutation", "MUTATIONS"]
