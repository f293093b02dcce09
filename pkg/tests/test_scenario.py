from __future__ import annotations

import json

import pytest

from conftest import honest_config
from electryo.bulletin import BulletinBoard
from electryo.scenario import ScenarioError, load_script, parse_fault, run_scenario

CONFIG = dict(name="scripted", voter_count=8, seed=51)

SCRIPT = {
    "voters": {
        "0": ["vote:Alice", "check"],
        "1": ["vote:Bob", "coerce:Carol", "check"],
        "2": ["vote:2", "check"],
        "3": ["vote:Alice"],
        "4": ["abstain"],
        "5": ["vote:Bob", "check"],
        "6": ["vote:Carol"],
    },
    "faults": {"6": "scanner-flip:Alice"},
    "audits": [{"type": "bb-to-paper", "sample_size": 6, "seed": 1},
               {"type": "paper-to-bb", "box": 2, "method": "blind"}],
    "disputes": [{"voter": 6, "claimed": "Carol"}, {"voter": 0, "claimed": "Bob"}],
}


@pytest.fixture(scope="module")
def result(tmp_path_factory):
    path = tmp_path_factory.mktemp("scn") / "run.bb"
    return run_scenario(dict(CONFIG), SCRIPT, path), path


def test_checks_and_coercion(result):
    res, _ = result
    assert set(res.checks) == {0, 1, 2, 5}
    assert all(c["ok"] for c in res.checks.values())
    assert res.checks[1]["board_vote"] == res.checks[1]["expected"] == 2


def test_audits_and_disputes(result):
    res, _ = result
    bb_audit, paper_audit = res.audits
    assert bb_audit.detected
    assert paper_audit.ballot_index >= 0
    assert [d.verdict for d in res.disputes] == ["SystemFault", "ComplaintUnsupported"]


def test_verification_and_transcript_file(result):
    res, path = result
    assert res.report.ok, res.report.render()
    assert path.read_bytes() == res.transcript
    assert BulletinBoard.load(path).entries() == res.election.bb.entries()
    s = res.summary()
    assert s["verification"]["ok"] and s["state"] == "notified" and len(s["board"]) == 6
    json.dumps(s, default=str)


def test_same_seed_gives_identical_transcripts():
    a = run_scenario(dict(CONFIG), {"voters": {"0": ["vote:0"], "1": ["vote:1"]}})
    b = run_scenario(dict(CONFIG), {"voters": {"0": ["vote:0"], "1": ["vote:1"]}})
    assert a.transcript == b.transcript


def test_all_abstain_run_verifies():
    res = run_scenario(dict(CONFIG), {"voters": {str(i): ["abstain"] for i in range(8)}})
    assert res.report.ok and res.election.view().tally_board == []
    assert any("skipped" in w for w in res.election.warnings)


@pytest.mark.parametrize("script,step", [
    ({"voters": {"0": ["vote:Zed"]}}, "voter 0 action 0"),
    ({"voters": {"0": ["dance"]}}, "voter 0 action 0"),
    ({"voters": {"0": ["vote:0", "vote:1"]}}, "voter 0 action 1"),
    ({"voters": {"99": ["vote:0"]}}, "voter 99"),
    ({"voters": {"0": ["coerce:1"]}}, "voter 0"),
    ({"voters": {"0": ["vote:0"]}, "faults": {"0": "melt"}}, "fault for voter 0"),
    ({"voters": {"0": ["vote:0"], "1": ["vote:1"]}, "audits": [{"type": "x"}]}, "audit 0"),
])
def test_script_errors_name_the_step(script, step):
    with pytest.raises(ScenarioError) as exc:
        run_scenario(dict(CONFIG), script)
    assert exc.value.step == step


def test_parse_fault_forms():
    cfg = honest_config()
    assert parse_fault(cfg, "scanner-flip:Bob", "s").flip_to == 1
    assert parse_fault(cfg, "scanner-drop", "s").drop
    assert parse_fault(cfg, "copy-id:3", "s").copy_from == 3
    assert parse_fault(cfg, "forge-signature", "s").forge_signature


def test_load_script_from_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(SCRIPT))
    assert load_script(p) == SCRIPT == load_script(SCRIPT)
