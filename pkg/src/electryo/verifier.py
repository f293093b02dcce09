"""Universal verification of a transcript.

Each check reads only the entries it is responsible for, so a single
corrupted entry shows up in exactly one category.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .bulletin import BbEntry, BulletinBoard, Phase, verify_chain
from .crypto.elgamal import Ciphertext, exp_decode
from .crypto.schnorr import Signature, verify_sig
from .encoding import encode
from .errors import ChainBroken, NotInRange
from .mixnet import EG, verify_cascade
from .roles import pet_context, verify_scanner_tuple
from .tellers import DecryptShare, combine_decrypt, verify_commitment_factor
from .trackers import TrackerSet, commitment_ciphertext, commitment_decrypt_context, factor_context
from .transcript import (
    AUDIT_DECRYPTION,
    CLOSE,
    IDSIG_DECRYPTION,
    JOINED_ROWS,
    MIX_INPUT,
    MIX_SKIPPED,
    OK,
    PET,
    TALLY_BOARD,
    TALLY_DECRYPTION,
    TranscriptView,
    commitments_ctx,
    idsig_ctx,
    stage1_ctx,
    stage2_ctx,
    tally_ctx,
    tracker_mix_ctx,
)
from .zkp.pet import PetResult, verify_pet_result

CATEGORIES = (
    "chain", "setup", "ballot-proofs", "mix-idsig", "idsig-decryption", "eligibility",
    "mix-tracker-vote", "tally-decryption", "tally-board", "pet-log", "audit-log",
)


@dataclass(frozen=True)
class Failure:
    category: str
    message: str
    phase: str = ""
    seq: int | None = None

    def to_wire(self) -> dict:
        return {"category": self.category, "message": self.message, "phase": self.phase, "seq": self.seq}


@dataclass
class VerificationReport:
    failures: list[Failure] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def failed_categories(self) -> set[str]:
        return {f.category for f in self.failures}

    def to_wire(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "skipped": self.skipped,
                "failures": [f.to_wire() for f in self.failures]}

    def render(self) -> str:
        lines = []
        for cat in CATEGORIES:
            if cat in self.skipped:
                lines.append(f"  {cat:<18} skipped (phase not reached)")
                continue
            fails = [f for f in self.failures if f.category == cat]
            lines.append(f"  {cat:<18} {'FAIL' if fails else 'ok'}")
            for f in fails:
                where = f" [{f.phase}#{f.seq}]" if f.seq is not None else (f" [{f.phase}]" if f.phase else "")
                lines.append(f"      - {f.message}{where}")
        head = "transcript verifies" if self.ok else f"{len(self.failures)} failure(s)"
        return "\n".join([head, *lines])


class _Collector:
    def __init__(self, category: str):
        self.category = category
        self.items: list[Failure] = []

    def fail(self, message: str, entry: BbEntry | None = None) -> None:
        self.items.append(Failure(self.category, message,
                                  entry.phase.value if entry else "", entry.seq if entry else None))


def _decrypt_ok(key, c, shares_wire, claimed, ctx) -> bool:
    shares = [DecryptShare.from_wire(key.group, s) for s in shares_wire]
    try:
        return combine_decrypt(key, c, shares, ctx) == claimed
    except Exception:
        return False


# -- individual checks --------------------------------------------------------

def check_chain(view: TranscriptView) -> list[Failure]:
    out = _Collector("chain")
    try:
        verify_chain(view.entries)
    except ChainBroken as exc:
        entry = view.entries[exc.index] if exc.index < len(view.entries) else None
        out.fail(f"hash chain broken: {exc.reason}", entry)
    return out.items


def check_setup(view: TranscriptView) -> list[Failure]:
    out = _Collector("setup")
    p, key, eid = view.params, view.key, view.eid
    trackers = view.trackers
    if len(set(trackers)) != len(trackers) or len(trackers) != p.n_trackers or len(trackers) < 2:
        out.fail("tracker list malformed or not distinct")
    if len(trackers) < p.n_voters:
        out.fail("fewer trackers than voters")
    tset = TrackerSet(tuple(trackers), tuple(p.group.generator ** t for t in trackers))
    res = verify_cascade(tset.initial_batch(), view.tracker_stages, key.pk, tracker_mix_ctx(eid))
    if not res:
        out.fail(f"tracker mix: {res.reason}")
    if len(view.tracker_stages) != p.mix_servers:
        out.fail("tracker mix stage count differs from declared mix servers")
    assigned = view.assigned_trackers
    rows = view.voter_rows
    postings = view.factor_postings
    ctx = commitments_ctx(eid)
    if sorted(postings) != list(range(1, p.n_tellers + 1)):
        out.fail("commitment factors missing for some teller")
    if len(rows) != p.n_voters:
        out.fail(f"{len(rows)} voter rows for {p.n_voters} voters")
    for tid, posts in postings.items():
        if len(posts) != p.n_voters:
            out.fail(f"teller {tid} posted {len(posts)} commitment factors")
            continue
        for i, post in enumerate(posts):
            if post.teller_id != tid or post.voter_index != i or i >= len(rows):
                out.fail(f"teller {tid} factor {i} misaddressed")
            elif not verify_commitment_factor(key.pk, rows[i].pk, post, factor_context(ctx, tid, i)):
                out.fail(f"teller {tid} factor proof for voter {i} rejected")
    decs = view.commitment_decryption
    if len(decs) != p.n_voters:
        out.fail("commitment decryption row count mismatch")
    for i, (c_claimed, shares) in enumerate(decs[:len(assigned)]):
        try:
            c = commitment_ciphertext(assigned[i], [postings[k][i] for k in sorted(postings)])
            ok = combine_decrypt(key, c, shares, commitment_decrypt_context(ctx, i)) == c_claimed
        except Exception:
            ok = False
        if not ok:
            out.fail(f"commitment C_{i} does not match its verifiable decryption")
    ids = [r.voter_id for r in rows]
    if len(set(ids)) != len(ids):
        out.fail("duplicate voter id in pre-vote rows")
    seen = set()
    for i, row in enumerate(rows):
        key_bytes = encode(row.enc_tracker.to_wire())
        if key_bytes in seen:
            out.fail(f"voter row {i} repeats an encrypted tracker")
        seen.add(key_bytes)
        if i < len(assigned) and row.enc_tracker != assigned[i]:
            out.fail(f"voter row {i} tracker differs from tracker-mix output")
        if i < len(decs) and row.commitment != decs[i][0]:
            out.fail(f"voter row {i} commitment differs from decrypted C_{i}")
    return out.items


def check_ballot_proofs(view: TranscriptView) -> list[Failure]:
    out = _Collector("ballot-proofs")
    p, key = view.params, view.key
    entries = view.ballot_entries()
    valid = []
    for idx, (entry, tup) in enumerate(zip(entries, view.ballots)):
        ok, reason = verify_scanner_tuple(tup, key.pk, len(p.candidates), view.eid)
        if ok:
            valid.append(idx)
        else:
            out.fail(f"ballot {idx}: {reason}", entry)
    closes = view.all(CLOSE, Phase.CastBallots)
    if len(closes) != 1 or closes[0].body["count"] != len(entries):
        out.fail("closing count does not match the cast ballots")
    if view.has(MIX_INPUT):
        body = view.mix_input
        rejected = [int(i) for i, _ in body["rejected"]]
        if [int(i) for i in body["accepted"]] != valid:
            out.fail("mix input does not consist of exactly the ballots with valid proofs", view.one(MIX_INPUT))
        elif sorted(rejected) != [i for i in range(len(entries)) if i not in valid]:
            out.fail("rejected-ballot log incomplete", view.one(MIX_INPUT))
        else:
            rows = view.stage1_input_rows
            expected = [view.ballots[i].mix_row() for i in valid]
            if rows != expected:
                out.fail("mix input rows differ from the posted ballots", view.one(MIX_INPUT))
    return out.items


def _check_stage(view: TranscriptView, out: _Collector, inp_rows, stages, ctx, phase: Phase) -> None:
    p = view.params
    if len(inp_rows) < 2:
        if stages or not view.has(MIX_SKIPPED, phase):
            out.fail("mix of fewer than two rows must be skipped and logged")
        return
    from .mixnet import MixBatch
    kinds = tuple(view.mix_input["kinds"]) if phase == Phase.MixIdSig else (EG, EG)
    res = verify_cascade(MixBatch.of(inp_rows, kinds), stages, view.key.pk, ctx)
    if not res:
        out.fail(res.reason)
    if len(stages) != p.mix_servers:
        out.fail("stage count differs from declared mix servers")


def check_mix_idsig(view: TranscriptView) -> list[Failure]:
    out = _Collector("mix-idsig")
    _check_stage(view, out, view.stage1_input_rows, view.stage1_stages, stage1_ctx(view.eid), Phase.MixIdSig)
    return out.items


def check_idsig_decryption(view: TranscriptView) -> list[Failure]:
    out = _Collector("idsig-decryption")
    g, key = view.group, view.key
    rows, dec = view.stage1_output, view.idsig_rows
    if len(rows) != len(dec):
        out.fail("decryption row count differs from mix output")
    for r, (row, d) in enumerate(zip(rows, dec)):
        pairs = (*row[0].pairs, *row[1].pairs)
        if len(d["elems"]) != len(pairs) or len(d["shares"]) != len(pairs):
            out.fail(f"row {r}: wrong number of decrypted blocks")
            continue
        for pi, (pair, elem, shares) in enumerate(zip(pairs, d["elems"], d["shares"])):
            if not _decrypt_ok(key, pair, shares, g.from_bytes(elem), idsig_ctx(view.eid, r, pi)):
                out.fail(f"row {r} block {pi}: decryption proof rejected")
    return out.items


def check_eligibility(view: TranscriptView) -> list[Failure]:
    from .election import assess_eligibility, join_rows

    out = _Collector("eligibility")
    g, p = view.group, view.params
    decrypted = [[g.from_bytes(e) for e in d["elems"]] for d in view.idsig_rows]
    roll = {r.voter_id: r.vk for r in view.voter_rows}
    expected = assess_eligibility(g, view.eid, p.extra, decrypted, roll)
    posted = view.eligibility
    norm = lambda rows: [(int(r["row"]), bytes(r["id"]), bytes(r["sig"]), r["status"]) for r in rows]
    if norm(posted) != norm(expected):
        out.fail("eligibility statuses differ from recomputation over decrypted ids and signatures")
        return out.items
    joined = join_rows(posted, view.stage1_output, [r.voter_id for r in view.voter_rows],
                       view.assigned_trackers, view.commitments)
    if encode(joined) != encode(view.joined_rows):
        out.fail("joined rows differ from eligible ballots, tracker mix and commitments", view.one(JOINED_ROWS))
    if sum(1 for r in posted if r["status"] == OK) != len(view.joined_rows):
        out.fail("row count not conserved between eligibility and joined rows")
    return out.items


def check_mix_tracker_vote(view: TranscriptView) -> list[Failure]:
    out = _Collector("mix-tracker-vote")
    _check_stage(view, out, view.stage2_input_rows, view.stage2_stages, stage2_ctx(view.eid), Phase.MixTrackerVote)
    return out.items


def check_tally_decryption(view: TranscriptView) -> list[Failure]:
    out = _Collector("tally-decryption")
    g, key = view.group, view.key
    rows, dec = view.stage2_output, view.tally_decryption
    if len(rows) != len(dec):
        out.fail("tally decryption row count differs from mix output")
    for r, (row, d) in enumerate(zip(rows, dec)):
        for col, (c, elem, shares) in enumerate(zip(row, d["elems"], d["shares"])):
            if not _decrypt_ok(key, c, shares, g.from_bytes(elem), tally_ctx(view.eid, r, col)):
                out.fail(f"tally row {r} column {col}: decryption proof rejected", view.one(TALLY_DECRYPTION))
    return out.items


def check_tally_board(view: TranscriptView) -> list[Failure]:
    out = _Collector("tally-board")
    g, p = view.group, view.params
    board = view.tally_board
    entry = view.one(TALLY_BOARD)
    dec = view.tally_decryption
    if len(board) != len(dec):
        out.fail("board row count differs from decrypted rows", entry)
    for r, (row, d) in enumerate(zip(board, dec)):
        try:
            t = exp_decode(g.from_bytes(d["elems"][0]), p.n_trackers)
            v = exp_decode(g.from_bytes(d["elems"][1]), len(p.candidates)) - 1
        except NotInRange:
            out.fail(f"row {r}: decrypted values are not a tracker and a candidate", entry)
            continue
        if (t, v) != row:
            out.fail(f"row {r}: board shows {row}, decryption gives {(t, v)}", entry)
    trackers = [t for t, _ in board]
    if len(set(trackers)) != len(trackers):
        out.fail("tracker repeated on the board", entry)
    if not set(trackers) <= set(view.trackers):
        out.fail("board tracker outside the published set", entry)
    if len(board) != len(view.joined_rows):
        out.fail("row count not conserved from eligible ballots to the board", entry)
    return out.items


def check_pet_log(view: TranscriptView) -> list[Failure]:
    out = _Collector("pet-log")
    rows = view.stage1_output
    g = view.group
    for entry in view.all(PET, Phase.PetLog):
        body = entry.body
        try:
            row = int(body["row"])
            claimed = Ciphertext.from_wire(g, body["claimed"])
            result = PetResult.from_wire(g, body["result"])
            ok = verify_pet_result(view.key, rows[row][-1], claimed, result, pet_context(view.eid, row))
        except Exception:
            ok = False
        if not ok:
            out.fail("PET evidence does not verify", entry)
    return out.items


def audit_message(eid: bytes, purpose: str, digest_bytes: bytes) -> bytes:
    return encode(["electryo/audit-decryption", eid, purpose, digest_bytes])


def check_audit_log(view: TranscriptView) -> list[Failure]:
    out = _Collector("audit-log")
    vks = view.teller_vks
    for entry in view.all(AUDIT_DECRYPTION, Phase.AuditLog):
        body = entry.body
        msg = audit_message(view.eid, body["purpose"], body["digest"])
        sigs = body["signatures"]
        good = set()
        for tid, sig in sigs:
            tid = int(tid)
            if tid in vks and verify_sig(vks[tid], msg, Signature.from_wire(sig)):
                good.add(tid)
        if len(good) < view.key.threshold or len(good) != len(sigs):
            out.fail("audit decryption lacks a threshold of valid teller signatures", entry)
    return out.items


# checks keyed by category, with the entry kind that must exist for the check to run
_CHECKS: list[tuple[str, str | None, Callable[[TranscriptView], list[Failure]]]] = [
    ("setup", None, check_setup),
    ("ballot-proofs", CLOSE, check_ballot_proofs),
    ("mix-idsig", MIX_INPUT, check_mix_idsig),
    ("idsig-decryption", IDSIG_DECRYPTION, check_idsig_decryption),
    ("eligibility", JOINED_ROWS, check_eligibility),
    ("mix-tracker-vote", JOINED_ROWS, check_mix_tracker_vote),
    ("tally-decryption", TALLY_DECRYPTION, check_tally_decryption),
    ("tally-board", TALLY_BOARD, check_tally_board),
    ("pet-log", PET, check_pet_log),
    ("audit-log", AUDIT_DECRYPTION, check_audit_log),
]


def universal_verify(transcript: BulletinBoard | list[BbEntry]) -> VerificationReport:
    view = TranscriptView(transcript)
    report = VerificationReport()
    report.failures += check_chain(view)
    report.checked.append("chain")
    for category, anchor, fn in _CHECKS:
        if anchor is not None and not view.has(anchor):
            report.skipped.append(category)
            continue
        try:
            report.failures += fn(view)
        except Exception as exc:  # a malformed entry is a failure of the check that reads it
            report.failures.append(Failure(category, f"could not evaluate: {type(exc).__name__}: {exc}"))
        report.checked.append(category)
    return report


def id_absent(transcript: BulletinBoard | list[BbEntry], voter_id: bytes) -> bool:
    """An abstainer's own check: their id is not among the decrypted ballot ids."""
    return voter_id not in TranscriptView(transcript).decrypted_ids()
