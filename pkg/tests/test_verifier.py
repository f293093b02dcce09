from __future__ import annotations

import random

import pytest

from electryo.audit import AuditSession, rla_bb_to_paper
from electryo.bulletin import BbEntry, reseal
from electryo.encoding import decode, encode
from electryo.tamper import MUTATIONS
from electryo.transcript import AUDIT_DECRYPTION, PET, TALLY_BOARD
from electryo.verifier import CATEGORIES, VerificationReport, universal_verify


def test_honest_transcript_passes_every_category(honest_entries):
    report = universal_verify(honest_entries)
    assert report.ok, report.render()
    assert set(report.checked) == set(CATEGORIES) - {"audit-log"}
    assert report.skipped == ["audit-log"]
    assert "ok" in report.render().lower()


def test_report_wire_form_is_canonical(honest_entries):
    report = universal_verify(honest_entries)
    wire = report.to_wire()
    assert decode(encode(wire)) == wire


@pytest.mark.parametrize("mutation", MUTATIONS, ids=[m.name for m in MUTATIONS])
def test_each_fixture_trips_exactly_its_category(honest_entries, mutation):
    report = universal_verify(mutation.apply(list(honest_entries)))
    assert report.failed_categories() == {mutation.category}, report.render()


def test_fixture_suite_covers_eight_cases():
    assert len(MUTATIONS) == 8
    assert {m.category for m in MUTATIONS} <= set(CATEGORIES)


def _edit_body(entries, kind, fn):
    entries = list(entries)
    idx = next(i for i, e in enumerate(entries) if e.kind == kind)
    body = decode(entries[idx].payload)
    fn(body)
    e = entries[idx]
    entries[idx] = BbEntry(e.seq, e.phase, e.author, encode(body), e.prev_hash, e.entry_hash)
    return reseal(entries)


def test_flipped_pet_verdict_trips_pet_log(honest_entries):
    def fn(body):
        body["result"]["equal"] = not body["result"]["equal"]
    report = universal_verify(_edit_body(honest_entries, PET, fn))
    assert report.failed_categories() == {"pet-log"}


def test_unreadable_entry_counts_against_its_own_category(honest_entries):
    def fn(body):
        body["result"] = {"junk": 1}
    report = universal_verify(_edit_body(honest_entries, PET, fn))
    assert report.failed_categories() == {"pet-log"}

    def rows(body):
        body["rows"] = "junk"
    report = universal_verify(_edit_body(honest_entries, TALLY_BOARD, rows))
    assert report.failed_categories() == {"tally-board"}


def test_audit_log_signatures_checked():
    from conftest import run_honest

    e = run_honest(name="audit-log", voter_count=6, seed=31)
    rla_bb_to_paper(e, 2, random.Random(0), AuditSession(e))
    entries = e.bb.entries()
    assert universal_verify(entries).ok

    def fn(body):
        body["digest"] = bytes(len(body["digest"]))
    report = universal_verify(_edit_body(entries, AUDIT_DECRYPTION, fn))
    assert report.failed_categories() == {"audit-log"}


def test_empty_report_is_ok():
    assert VerificationReport().ok
