"""Tracking numbers: publication, secret assignment, commitments and retrieval.

A voter's commitment ``C_i = pk_i^{r_i} g^{n}`` together with
``alpha_i = g^{r_i}`` is an ElGamal encryption of ``g^n`` under the voter's
own key.  Holding ``sk_i``, the voter can open ``C_i`` to any tracker by
choosing a matching alpha, which is what makes a fake alpha possible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .crypto.elgamal import Ciphertext, exp_decode
from .crypto.groups import Group, GroupElement
from .errors import MissingShare
from .mixnet import EG, MixBatch, MixServer, MixStage, run_cascade
from .tellers import (
    AlphaShareRecord,
    CommitmentFactor,
    DecryptShare,
    TallyKey,
    Teller,
    combine_decrypt,
)
from .zkp.fiat_shamir import FsContext


@dataclass(frozen=True)
class TrackerSet:
    trackers: tuple[int, ...]
    encoded: tuple[GroupElement, ...]

    def __len__(self) -> int:
        return len(self.trackers)

    @property
    def max_n(self) -> int:
        return max(self.trackers)

    def initial_batch(self) -> MixBatch:
        """Trackers as zero-randomness encryptions; anyone can recompute this batch."""
        return MixBatch.of([(Ciphertext.trivial(e),) for e in self.encoded], (EG,))


def setup_trackers(n: int, group: Group) -> TrackerSet:
    if n < 2:
        raise ValueError("at least two trackers are needed for an anonymity set")
    trackers = tuple(range(1, n + 1))
    return TrackerSet(trackers, tuple(group.generator ** t for t in trackers))


def assign_trackers(trackers: TrackerSet, n_voters: int, servers: Sequence[MixServer],
                    pk_T: GroupElement, ctx: FsContext) -> tuple[list[Ciphertext], list[MixStage]]:
    """Mix the public trackers; row ``i`` of the output belongs to voter ``i``."""
    if len(trackers) < n_voters:
        raise ValueError("fewer trackers than voters")
    final, stages = run_cascade(trackers.initial_batch(), servers, pk_T, ctx)
    return [row[0] for row in final.rows[:n_voters]], stages


@dataclass(frozen=True)
class VoterRow:
    voter_id: bytes
    vk: GroupElement
    pk: GroupElement
    enc_tracker: Ciphertext
    commitment: GroupElement

    def to_wire(self) -> dict:
        return {"id": self.voter_id, "vk": self.vk.to_bytes(), "pk": self.pk.to_bytes(),
                "tracker": self.enc_tracker.to_wire(), "C": self.commitment.to_bytes()}

    @classmethod
    def from_wire(cls, group: Group, w: dict) -> "VoterRow":
        return cls(bytes(w["id"]), group.from_bytes(w["vk"]), group.from_bytes(w["pk"]),
                   Ciphertext.from_wire(group, w["tracker"]), group.from_bytes(w["C"]))


@dataclass(frozen=True)
class AlphaTerm:
    voter_index: int
    alpha: GroupElement

    def to_wire(self) -> dict:
        return {"voter": self.voter_index, "alpha": self.alpha.to_bytes()}

    @classmethod
    def from_wire(cls, group: Group, w: dict) -> "AlphaTerm":
        return cls(int(w["voter"]), group.from_bytes(w["alpha"]))


def commitment_ciphertext(enc_tracker: Ciphertext, factors: Sequence[CommitmentFactor]) -> Ciphertext:
    """Enc(g^n) times every teller's Enc(pk_i^{r_{i,k}}): an encryption of C_i."""
    acc = enc_tracker
    for f in factors:
        acc = acc * f.enc_factor
    return acc


def factor_context(ctx: FsContext, teller_id: int, voter_index: int) -> FsContext:
    return ctx.derive("factor", [teller_id, voter_index])


def alpha_share_context(ctx: FsContext, teller_id: int, voter_index: int) -> FsContext:
    return ctx.derive("alpha-share", [teller_id, voter_index])


def commitment_decrypt_context(ctx: FsContext, voter_index: int) -> FsContext:
    return ctx.derive("commitment", voter_index)


def construct_commitments(tellers: Sequence[Teller], key: TallyKey, voter_pks: Sequence[GroupElement],
                          enc_trackers: Sequence[Ciphertext], ctx: FsContext, rng,
                          exponents: dict[int, Sequence[int]] | None = None):
    """Every teller posts factors; a threshold of tellers decrypts each C_i.

    Returns ``(postings_by_teller, commitments, decrypt_shares_by_voter)``.
    """
    postings = {}
    for t in tellers:
        fixed = exponents.get(t.teller_id) if exponents else None
        postings[t.teller_id] = t.contribute_alpha_factors(key.pk, voter_pks, ctx, rng, exponents=fixed)
    commitments, shares = [], []
    for i, enc in enumerate(enc_trackers):
        c = commitment_ciphertext(enc, [postings[t.teller_id][i] for t in tellers])
        dctx = commitment_decrypt_context(ctx, i)
        ds = [t.decrypt_share(c, dctx, rng) for t in tellers[:key.threshold]]
        commitments.append(combine_decrypt(key, c, ds, dctx))
        shares.append(ds)
    return postings, commitments, shares


def assemble_alpha(voter_index: int, records: Sequence[AlphaShareRecord], n_tellers: int) -> AlphaTerm:
    by_teller = {r.teller_id: r for r in records if r.voter_index == voter_index}
    missing = [k for k in range(1, n_tellers + 1) if k not in by_teller]
    if missing:
        raise MissingShare(f"no alpha share from teller(s) {missing} for voter {voter_index}")
    alpha = None
    for k in sorted(by_teller):
        share = by_teller[k].g_exp_share
        alpha = share if alpha is None else alpha * share
    return AlphaTerm(voter_index, alpha)


def open_commitment(sk: int, alpha: GroupElement, commitment: GroupElement) -> GroupElement:
    return commitment / alpha ** sk


def retrieve_tracker(sk: int, alpha: GroupElement, commitment: GroupElement, max_n: int) -> int:
    """Decode the tracker behind ``(alpha, C_i)``.  No authenticity data is consulted."""
    return exp_decode(open_commitment(sk, alpha, commitment), max_n)


def fake_alpha(sk: int, commitment: GroupElement, target: int, voter_index: int = -1) -> AlphaTerm:
    group = commitment.group
    if sk % group.order == 0:
        raise ValueError("secret key must be non-zero")
    inv = pow(sk, -1, group.order)
    return AlphaTerm(voter_index, (commitment / group.generator ** target) ** inv)


def commitment_from_shares(voter_pk: GroupElement, tracker: int, exponents: Sequence[int]) -> GroupElement:
    """Direct formula ``pk^{sum r} g^n``, used as a test oracle."""
    group = voter_pk.group
    return voter_pk ** (sum(exponents) % group.order) * group.generator ** tracker


def verify_commitment_decryption(key: TallyKey, c: Ciphertext, shares: Sequence[DecryptShare],
                                 claimed: GroupElement, ctx: FsContext) -> bool:
    try:
        return combine_decrypt(key, c, shares, ctx) == claimed
    except Exception:
        return False


def verify_setup(bb) -> bool:
    """Run the setup checks of the universal verifier on a transcript."""
    from .transcript import TranscriptView
    from .verifier import check_setup

    return not check_setup(TranscriptView(bb))
