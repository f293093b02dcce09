from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from electryo.election import Election, ElectionConfig  # noqa: E402

import oracles  # noqa: E402

HONEST_VOTES = {i: (i * 7 + 1) % 3 for i in range(25)}


def honest_config(**kw) -> ElectionConfig:
    base = dict(name="honest", candidates=("Alice", "Bob", "Carol"), voter_count=25,
                tellers=(3, 2), mix_servers=3, group="test", seed=11)
    base.update(kw)
    return ElectionConfig(**base)


def run_honest(**kw) -> Election:
    e = Election(honest_config(**kw))
    votes = {i: HONEST_VOTES[i] for i in range(e.n_voters)}
    e.run_all(votes)
    e.notify()
    return e


@pytest.fixture(scope="session")
def honest() -> Election:
    """Fully notified 25-voter election; treat as read-only."""
    return run_honest()


@pytest.fixture(scope="session")
def honest_entries(honest):
    return honest.bb.entries()


def tally_secret(election: Election) -> int:
    """Joint decryption key reconstructed by the oracle from every teller share."""
    return oracles.lagrange_secret({t.share.teller_id: t.share.secret_share for t in election.tellers})


def oracle_decrypt(election: Election, c) -> int:
    return oracles.decrypt(tally_secret(election), c.a.value, c.b.value)


# -- acceptance verdict lines ------------------------------------------------------

_VERDICTS = pytest.StashKey[list]()


class Verdict:
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    def __init__(self, log: list, number: int, label: str):
        self.log, self.number, self.label = log, number, label
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number:>2}: {status}  {self.label}"
        if self.detail:
            line += f"  [{self.detail}]"
        if exc_type is not None:
            line += f"  ({exc_type.__name__}: {exc})"
        print(line)
        self.log.append(line)
        return False


@pytest.fixture()
def criterion(request):
    log = request.config.stash.setdefault(_VERDICTS, [])
    return lambda number, label: Verdict(log, number, label)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
