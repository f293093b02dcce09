from __future__ import annotations

import random

import pytest

import oracles
from conftest import honest_config, oracle_decrypt
from electryo.audit import (
    BB_TO_PAPER,
    COMPLAINT_UNSUPPORTED,
    PAPER_TO_BB,
    SYSTEM_FAULT,
    AuditSession,
    DisputeCase,
    detection_probability,
    resolve_dispute,
    rla_bb_to_paper,
    rla_paper_to_bb,
)
from electryo.election import CastFault, Election
from electryo.errors import ElectryoError, NoMatch
from electryo.transcript import AUDIT_RECORD, DISPUTE
from electryo.verifier import universal_verify

FLIPPED, DROPPED, ABSTAINER = 3, 6, 9


@pytest.fixture(scope="module")
def audited():
    e = Election(honest_config(name="audit", voter_count=10, seed=41))
    votes = {i: i % 3 for i in range(10) if i != ABSTAINER}
    e.run_all(votes, {FLIPPED: CastFault(flip_to=(votes[FLIPPED] + 1) % 3), DROPPED: CastFault(drop=True)})
    e.notify()
    return e


@pytest.mark.parametrize("n,m,k", [(20, 5, 1), (12, 4, 2), (10, 10, 1), (9, 3, 0)])
def test_detection_probability_matches_enumeration(n, m, k):
    assert detection_probability(n, m, k) == pytest.approx(oracles.hypergeometric_detection(n, m, k))


def test_full_sample_finds_the_flip(audited):
    rec = rla_bb_to_paper(audited, len(audited.view().ballots), random.Random(1), AuditSession(audited))
    assert rec.direction == BB_TO_PAPER and rec.detected
    reasons = sorted(r for _, r in rec.mismatches)
    assert reasons == ["paper vote differs from electronic vote"]
    assert len(rec.matches) == rec.population - 1
    assert audited.view().all(AUDIT_RECORD)


def test_sampled_detection_rate_near_expected(audited):
    session = AuditSession(audited)
    n = len(session.ballots)
    trials, hits = 300, 0
    rng = random.Random(2)
    for _ in range(trials):
        hits += rla_bb_to_paper(audited, 3, rng, session, record=False).detected
    p = oracles.hypergeometric_detection(n, 3, 1)
    lo, hi = oracles.binomial_band(trials, p, 4)
    assert lo <= hits <= hi


def test_sample_size_bounds(audited):
    with pytest.raises(ValueError):
        rla_bb_to_paper(audited, 0, random.Random(0))
    with pytest.raises(ValueError):
        rla_bb_to_paper(audited, 100, random.Random(0))


@pytest.mark.parametrize("method", ["blind", "pet"])
def test_paper_to_bb_finds_unique_tuple(audited, method):
    session = AuditSession(audited)
    codes = [t.enc_ballot_code for t in session.ballots]
    for serial in (0, 4):
        paper = audited.box[serial]
        match = rla_paper_to_bb(audited, paper, random.Random(serial), method, session)
        expect = [oracle_code(audited, c) for c in codes].index(paper_code(paper))
        assert match.ballot_index == expect


def oracle_code(e, code):
    return tuple(oracle_decrypt(e, c) for c in code[:2])


def paper_code(paper):
    first = paper.ballot_code.enc_id.pairs[0]
    return first.a.value, first.b.value


def test_paper_to_bb_dropped_tuple(audited):
    paper = audited.box[DROPPED]  # voters cast in index order, so serial == index here
    with pytest.raises(NoMatch):
        rla_paper_to_bb(audited, paper, random.Random(3))
    last = audited.view().all(AUDIT_RECORD)[-1].body
    assert last["direction"] == PAPER_TO_BB and last["mismatches"]


def test_unknown_match_method(audited):
    with pytest.raises(ValueError):
        rla_paper_to_bb(audited, audited.box[0], random.Random(0), "magic", record=False)


def test_disputes(audited):
    session = AuditSession(audited)
    flip = resolve_dispute(audited, DisputeCase(FLIPPED, FLIPPED % 3), session)
    assert flip.verdict == SYSTEM_FAULT and "contradicts" in flip.reason
    honest = resolve_dispute(audited, DisputeCase(0, 2), session)
    assert honest.verdict == COMPLAINT_UNSUPPORTED
    absent = resolve_dispute(audited, DisputeCase(ABSTAINER, 0), session)
    assert absent.verdict == COMPLAINT_UNSUPPORTED and "attendance" in absent.reason
    dropped = resolve_dispute(audited, DisputeCase(DROPPED, 0), session)
    assert dropped.verdict == SYSTEM_FAULT and "no ballot" in dropped.reason
    assert len(audited.view().all(DISPUTE)) >= 4


def test_audit_entries_keep_transcript_verifiable(audited):
    rla_bb_to_paper(audited, 2, random.Random(4))
    report = universal_verify(audited.bb)
    assert report.ok, report.render()
    assert "audit-log" in report.checked


def test_audits_wait_for_tally():
    e = Election(honest_config(name="early", voter_count=3, seed=42))
    e.setup()
    e.cast(0, 0)
    with pytest.raises(ElectryoError):
        rla_bb_to_paper(e, 1, random.Random(0))
