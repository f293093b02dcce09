from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from ..crypto.groups import GroupElement
from ..encoding import digest


@dataclass(frozen=True)
class FsContext:
    """Everything a non-interactive challenge is bound to besides the commitments.

    The election id keeps proofs from being replayed across elections; the
    phase label separates proof families; the statement digest covers the full
    public statement (strong Fiat-Shamir).
    """

    election_id: bytes
    phase_label: str
    statement_digest: bytes

    @classmethod
    def for_statement(cls, election_id: bytes, phase_label: str, statement: Any = None) -> "FsContext":
        return cls(election_id, phase_label, digest(statement))

    def derive(self, label: str, statement: Any = None) -> "FsContext":
        return FsContext(self.election_id, f"{self.phase_label}/{label}",
                         digest(self.statement_digest, statement))


def fs_challenge(ctx: FsContext, commitments: Sequence[GroupElement]) -> int:
    if not commitments:
        raise ValueError("challenge needs at least one group element")
    group = commitments[0].group
    return group.hash_to_scalar(
        "electryo/fs", ctx.election_id, ctx.phase_label, ctx.statement_digest,
        [c.to_bytes() for c in commitments],
    )
