"""Declarative election scripts.

A script is a JSON object::

    {"voters": {"0": ["vote:1", "check"], "1": ["abstain"], "2": ["vote:0", "coerce:2", "check"]},
     "faults": {"3": "scanner-flip:2", "4": "scanner-drop", "5": "copy-id:3", "6": "forge-signature"},
     "audits": [{"type": "bb-to-paper", "sample_size": 5, "seed": 1},
                {"type": "paper-to-bb", "box": 0, "method": "blind"}],
     "disputes": [{"voter": 3, "claimed": 1}]}

Voters not listed abstain.  Candidates may be given by index or by name.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .audit import AuditSession, DisputeCase, rla_bb_to_paper, rla_paper_to_bb, resolve_dispute
from .election import CastFault, Election, ElectionConfig
from .errors import ElectryoError
from .verifier import VerificationReport, universal_verify


class ScenarioError(ElectryoError):
    def __init__(self, step: str, message: str):
        super().__init__(f"{step}: {message}")
        self.step = step


@dataclass
class ScenarioResult:
    election: Election
    report: VerificationReport
    checks: dict[int, dict] = field(default_factory=dict)
    audits: list[Any] = field(default_factory=list)
    disputes: list[Any] = field(default_factory=list)

    @property
    def transcript(self) -> bytes:
        return self.election.bb.to_bytes()

    def summary(self) -> dict:
        e = self.election
        return {
            "state": e.state, "entries": len(e.bb), "board": [list(r) for r in e.view().tally_board],
            "checks": {str(k): v for k, v in self.checks.items()}, "warnings": list(e.warnings),
            "verification": self.report.to_wire(),
            "audits": [{"direction": a.direction, "sampled": a.sampled, "mismatches": len(a.mismatches)}
                       if hasattr(a, "direction") else {"match": a.ballot_index, "method": a.method}
                       for a in self.audits],
            "disputes": [d.to_wire() for d in self.disputes],
        }


def _candidate(config: ElectionConfig, token: str, step: str) -> int:
    if token.lstrip("-").isdigit():
        idx = int(token)
    elif token in config.candidates:
        idx = config.candidates.index(token)
    else:
        raise ScenarioError(step, f"unknown candidate {token!r}")
    if not 0 <= idx < len(config.candidates):
        raise ScenarioError(step, f"candidate index {idx} out of range")
    return idx


def parse_fault(config: ElectionConfig, spec: str, step: str) -> CastFault:
    name, _, arg = spec.partition(":")
    if name == "scanner-flip":
        return CastFault(flip_to=_candidate(config, arg, step))
    if name == "scanner-drop":
        return CastFault(drop=True)
    if name == "copy-id":
        return CastFault(copy_from=int(arg))
    if name == "forge-signature":
        return CastFault(forge_signature=True)
    raise ScenarioError(step, f"unknown fault {spec!r}")


def load_script(source: str | Path | dict) -> dict:
    if isinstance(source, dict):
        return source
    return json.loads(Path(source).read_text())


def run_scenario(config: ElectionConfig | dict, script: str | Path | dict,
                 transcript_path: str | Path | None = None) -> ScenarioResult:
    if isinstance(config, dict):
        config = ElectionConfig.from_dict(config)
    script = load_script(script)
    actions = {int(k): list(v) for k, v in script.get("voters", {}).items()}
    faults = {int(k): parse_fault(config, v, f"fault for voter {k}") for k, v in script.get("faults", {}).items()}
    for i in list(actions) + list(faults):
        if not 0 <= i < config.voter_count:
            raise ScenarioError(f"voter {i}", "index outside the electoral roll")

    e = Election(config, transcript_path)
    e.setup()
    coerce: dict[int, int] = {}
    check: set[int] = set()
    for i in sorted(actions):
        for a, act in enumerate(actions[i]):
            step = f"voter {i} action {a}"
            verb, _, arg = act.partition(":")
            if verb == "vote":
                try:
                    e.cast(i, _candidate(config, arg, step), faults.get(i))
                except ElectryoError as exc:
                    raise ScenarioError(step, str(exc)) from exc
            elif verb == "coerce":
                coerce[i] = _candidate(config, arg, step)
            elif verb == "check":
                check.add(i)
            elif verb not in ("abstain", "skip"):
                raise ScenarioError(step, f"unknown action {act!r}")
    e.close()
    e.mix()
    e.tally()
    for i, cand in sorted(coerce.items()):
        if i not in e.receipts:
            raise ScenarioError(f"voter {i}", "coerced voter did not cast a ballot")
        try:
            e.coerce(i, cand)
        except ElectryoError as exc:
            raise ScenarioError(f"voter {i} coerce", str(exc)) from exc
    e.notify()

    result = ScenarioResult(e, VerificationReport())
    for i in sorted(check):
        n = e.notifications.get(i)
        if n is None or n.status != "delivered":
            result.checks[i] = {"status": n.status if n else "not-cast"}
            continue
        shown = e.voter_check(i)
        expected = coerce.get(i, e.cast_votes[i])
        result.checks[i] = {"status": "delivered", "tracker": e.voter_tracker(i), "board_vote": shown,
                            "expected": expected, "ok": shown == expected}

    session = AuditSession(e)
    for k, spec in enumerate(script.get("audits", [])):
        step = f"audit {k}"
        kind = spec.get("type")
        rng = random.Random(spec.get("seed", k))
        if kind == "bb-to-paper":
            result.audits.append(rla_bb_to_paper(e, int(spec.get("sample_size", 5)), rng, session))
        elif kind == "paper-to-bb":
            box = int(spec.get("box", 0))
            if not 0 <= box < len(e.box):
                raise ScenarioError(step, f"no paper ballot {box} in the box")
            result.audits.append(rla_paper_to_bb(e, e.box[box], rng, spec.get("method", "blind"), session))
        else:
            raise ScenarioError(step, f"unknown audit type {kind!r}")
    for spec in script.get("disputes", []):
        case = DisputeCase(int(spec["voter"]), _candidate(config, str(spec.get("claimed", 0)), "dispute"))
        result.disputes.append(resolve_dispute(e, case, session))
    result.report = universal_verify(e.bb)
    return result
