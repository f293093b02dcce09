"""Comparison audits between paper ballots and posted tuples, and dispute resolution.

Every decryption here happens in camera: plaintexts stay inside an
``AuditSession`` and the public AuditLog only receives a salted digest of
what was decrypted, signed by the tellers.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import comb
from typing import TYPE_CHECKING

from .bulletin import Phase
from .crypto.elgamal import Ciphertext, eg_encrypt, exp_decode
from .crypto.groups import GroupElement
from .encoding import digest
from .errors import ElectryoError, MultiMatch, NoMatch, NotInRange, PaperBallotMissing
from .roles import PaperBallot
from .tellers import threshold_decrypt
from .transcript import AUDIT_DECRYPTION, AUDIT_RECORD, DISPUTE, OK, audit_ctx
from .verifier import audit_message
from .zkp.pet import run_pet
from .zkp.sigma import DleqProof, prove_dleq_multi, verify_dleq_multi

if TYPE_CHECKING:
    from .election import Election

BB_TO_PAPER = "BBtoPaper"
PAPER_TO_BB = "PaperToBB"

SYSTEM_FAULT = "SystemFault"
COMPLAINT_UNSUPPORTED = "ComplaintUnsupported"


def detection_probability(population: int, sample: int, flips: int) -> float:
    """Chance that a uniform sample without replacement hits at least one flipped ballot."""
    return 1 - comb(population - flips, sample) / comb(population, sample)


class AuditSession:
    """In-camera decryption context with a cache, so repeated audits reuse results."""

    def __init__(self, election: "Election", rng: random.Random | None = None):
        self.election = election
        self.rng = rng or election.rng("audit")
        self._cache: dict[tuple, GroupElement] = {}
        self._pending: list[tuple[bytes, bytes]] = []
        self._ballots = None

    @property
    def ballots(self):
        # posted tuples never change once casting has closed
        if self._ballots is None:
            self._ballots = self.election.view().ballots
        return self._ballots

    def decrypt(self, c: Ciphertext, purpose: str) -> GroupElement:
        key = (c.a.to_bytes(), c.b.to_bytes())
        if key not in self._cache:
            e = self.election
            ctx = audit_ctx(e.eid, purpose, len(self._cache))
            self._cache[key], _ = threshold_decrypt(e.tellers, e.key, c, ctx, self.rng)
        m = self._cache[key]
        self._pending.append((key[0] + key[1], m.to_bytes()))
        return m

    def discard(self) -> None:
        """Drop unflushed log items (trial runs that are never posted)."""
        self._pending = []

    def ballot_code(self, tup_code: tuple[Ciphertext, ...], purpose: str) -> tuple[GroupElement, ...]:
        return tuple(self.decrypt(c, purpose) for c in tup_code)

    def vote(self, enc_vote: Ciphertext, purpose: str) -> int | None:
        try:
            return exp_decode(self.decrypt(enc_vote, purpose), self.election.n_candidates) - 1
        except NotInRange:
            return None

    def flush(self, purpose: str) -> None:
        """Post a signed, salted digest of the decryptions made since the last flush."""
        e = self.election
        salt = self.rng.getrandbits(256).to_bytes(32, "big")
        d = digest("electryo/in-camera", salt, self._pending)
        msg = audit_message(e.eid, purpose, d)
        e.bb.append(Phase.AuditLog, "tellers", {
            "kind": AUDIT_DECRYPTION, "purpose": purpose, "digest": d, "count": len(self._pending),
            "signatures": [[t.teller_id, t.sign(msg).to_wire()] for t in e.tellers],
        })
        self._pending = []


def _require_audit_state(election: "Election") -> None:
    # AuditLog ranks last on the board, so audits run once the tally board is out.
    if election.state not in ("tallied", "notified"):
        raise ElectryoError("audits run after the tally board is published")


def _paper_index(box: list[PaperBallot]) -> dict[bytes, list[PaperBallot]]:
    out: dict[bytes, list[PaperBallot]] = {}
    for b in box:
        out.setdefault(b.ballot_code.payload(), []).append(b)
    return out


@dataclass
class AuditRecord:
    direction: str
    sampled: list[int]
    matches: list[int] = field(default_factory=list)
    mismatches: list[tuple[int, str]] = field(default_factory=list)
    method: str = ""
    population: int = 0

    @property
    def detected(self) -> bool:
        return bool(self.mismatches)

    def to_wire(self) -> dict:
        return {"kind": AUDIT_RECORD, "direction": self.direction, "sampled": self.sampled,
                "matches": self.matches, "mismatches": [list(m) for m in self.mismatches],
                "method": self.method, "population": self.population}


def rla_bb_to_paper(election: "Election", sample_size: int, rng: random.Random,
                    session: AuditSession | None = None, record: bool = True) -> AuditRecord:
    """Sample posted tuples, decrypt code and vote in camera, compare with the paper in the box."""
    _require_audit_state(election)
    session = session or AuditSession(election)
    ballots = session.ballots
    n = len(ballots)
    if not 0 < sample_size <= n:
        raise ValueError(f"sample size must be in 1..{n}")
    sampled = sorted(rng.sample(range(n), sample_size))
    papers = _paper_index(election.box)
    rec = AuditRecord(BB_TO_PAPER, sampled, method=f"fixed sample {sample_size} of {n}", population=n)
    purpose = "rla-bb-to-paper"
    for idx in sampled:
        tup = ballots[idx]
        code = session.ballot_code(tup.enc_ballot_code, purpose)
        key = b"".join(x.to_bytes() for x in code)
        found = papers.get(key)
        if not found:
            # a missing paper ballot counts as a mismatch, not an abort
            rec.mismatches.append((idx, PaperBallotMissing.__name__))
            continue
        vote = session.vote(tup.enc_vote, purpose)
        if any(p.vote == vote for p in found):
            rec.matches.append(idx)
        else:
            rec.mismatches.append((idx, "paper vote differs from electronic vote"))
    if record:
        session.flush(purpose)
        election.bb.append(Phase.AuditLog, "auditor", rec.to_wire())
    else:
        session.discard()
    return rec


@dataclass(frozen=True)
class PaperMatch:
    ballot_index: int
    method: str
    blinded_paper: tuple[bytes, ...] = ()
    blinded_candidates: tuple[tuple[bytes, ...], ...] = ()


@dataclass(frozen=True)
class BlindingStep:
    teller_id: int
    commitment: GroupElement
    proof: DleqProof


def joint_blind(election: "Election", cts: list[Ciphertext], rng, purpose: str
                ) -> tuple[list[Ciphertext], list[BlindingStep]]:
    """Every teller raises every ciphertext to its own secret exponent and proves it."""
    group = election.group
    g = group.generator
    steps = []
    for k, teller in enumerate(election.tellers):
        z = group.random_scalar(rng, nonzero=True)
        bases = [g, *(x for c in cts for x in (c.a, c.b))]
        out = [Ciphertext(c.a ** z, c.b ** z) for c in cts]
        values = [g ** z, *(x for c in out for x in (c.a, c.b))]
        ctx = audit_ctx(election.eid, purpose, -1 - k)
        proof = prove_dleq_multi(bases, values, z, ctx, rng)
        if not verify_dleq_multi(bases, values, proof, ctx):
            raise ElectryoError(f"teller {teller.teller_id} blinding proof rejected")
        steps.append(BlindingStep(teller.teller_id, values[0], proof))
        cts = out
    return cts, steps


def rla_paper_to_bb(election: "Election", paper: PaperBallot, rng: random.Random, method: str = "blind",
                    session: AuditSession | None = None, record: bool = True) -> PaperMatch:
    """Locate the posted tuple for a paper ballot via the first two printed id elements.

    ``blind`` raises the paper-derived and posted encryptions to a joint secret
    exponent before decrypting, so the raw code never appears; ``pet`` sweeps
    plaintext-equivalence tests instead.
    """
    _require_audit_state(election)
    session = session or AuditSession(election)
    e = election
    ballots = session.ballots
    first = paper.ballot_code.enc_id.pairs[0]
    printed = (first.a, first.b)
    pk = e.key.pk
    mine = [eg_encrypt(pk, x, e.group.random_scalar(rng)) for x in printed]
    purpose = f"rla-paper-to-bb/{method}"
    found: list[int] = []
    blinded_paper: tuple[bytes, ...] = ()
    blinded_cands: list[tuple[bytes, ...]] = []
    if method == "blind":
        cts = list(mine)
        for tup in ballots:
            cts.extend(tup.enc_ballot_code[:2])
        blinded, _ = joint_blind(e, cts, rng, purpose)
        plain = [session.decrypt(c, purpose).to_bytes() for c in blinded]
        blinded_paper = tuple(plain[:2])
        for j in range(len(ballots)):
            cand = tuple(plain[2 + 2 * j:4 + 2 * j])
            blinded_cands.append(cand)
            if cand == blinded_paper:
                found.append(j)
    elif method == "pet":
        for j, tup in enumerate(ballots):
            if all(run_pet(e.tellers, e.key, a, b, audit_ctx(e.eid, purpose, j * 2 + k), rng).equal
                   for k, (a, b) in enumerate(zip(mine, tup.enc_ballot_code[:2]))):
                found.append(j)
    else:
        raise ValueError(f"unknown matching method {method!r}")
    if record:
        session.flush(purpose)
        rec = AuditRecord(PAPER_TO_BB, [paper.box_serial if paper.box_serial is not None else -1],
                          matches=found, method=method, population=len(ballots))
        if len(found) != 1:
            rec.mismatches.append((rec.sampled[0], "no match" if not found else "multiple matches"))
        e.bb.append(Phase.AuditLog, "auditor", rec.to_wire())
    if not found:
        raise NoMatch(f"paper ballot {paper.box_serial} has no posted tuple")
    if len(found) > 1:
        raise MultiMatch(f"paper ballot {paper.box_serial} matches tuples {found}")
    return PaperMatch(found[0], method, blinded_paper, tuple(blinded_cands))


# -- disputes ------------------------------------------------------------------

@dataclass(frozen=True)
class DisputeCase:
    voter_index: int
    claimed_vote: int


@dataclass(frozen=True)
class DisputeVerdict:
    verdict: str
    reason: str
    evidence: dict = field(default_factory=dict)

    def to_wire(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason}


def resolve_dispute(election: "Election", case: DisputeCase, session: AuditSession | None = None) -> DisputeVerdict:
    """Decrypt the complainant's ballot code in camera, find the paper, compare."""
    _require_audit_state(election)
    session = session or AuditSession(election)
    e = election
    view = e.view()
    voter_id = e.credentials[case.voter_index].voter_id
    purpose = "dispute"

    def done(verdict: str, reason: str, **evidence) -> DisputeVerdict:
        session.flush(purpose)
        out = DisputeVerdict(verdict, reason, evidence)
        e.bb.append(Phase.AuditLog, "auditor", {"kind": DISPUTE, "voter": case.voter_index, **out.to_wire()})
        return out

    if not e.clerk.attended(voter_id):
        return done(COMPLAINT_UNSUPPORTED, "no attendance record for this voter", attended=False)
    rows = [r for r in view.eligibility if bytes(r["id"]) == voter_id]
    if not rows:
        return done(SYSTEM_FAULT, "voter attended but no ballot with this id was posted", attended=True)
    flagged = [r["status"] for r in rows if r["status"] != OK]
    if flagged:
        return done(SYSTEM_FAULT, f"ballot with this id was excluded: {flagged[0]}", attended=True)
    row = view.stage1_output[int(rows[0]["row"])]
    code = session.ballot_code(tuple(row[2:-2]), purpose)
    papers = _paper_index(e.box).get(b"".join(x.to_bytes() for x in code), [])
    if not papers:
        return done(SYSTEM_FAULT, "no paper ballot carries this ballot code", attended=True)
    electronic = session.vote(row[-2], purpose)
    paper_vote = papers[0].vote
    if paper_vote != electronic:
        return done(SYSTEM_FAULT, "paper ballot contradicts the electronic record",
                    paper_vote=paper_vote, electronic_vote=electronic, claimed=case.claimed_vote)
    return done(COMPLAINT_UNSUPPORTED, "paper ballot matches the electronic record",
                paper_vote=paper_vote, electronic_vote=electronic, claimed=case.claimed_vote)
