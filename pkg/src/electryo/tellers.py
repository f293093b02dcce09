"""Tally tellers: joint-Feldman key generation, verifiable threshold decryption,
and the distributed construction of tracker commitments.

Each teller contributes a secret exponent ``r_{i,k}`` per voter.  Publicly it
posts two ElGamal encryptions under the election key, one of
``pk_i^{r_{i,k}}`` and one of ``g^{r_{i,k}}``, tied by a linear proof.  The
product of the first kind, multiplied into the voter's encrypted tracker and
jointly decrypted, is the commitment ``C_i``.  The plain ``g^{r_{i,k}}`` stays
in the teller's private store until the retrieval authority asks for it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .crypto.elgamal import Ciphertext, eg_encrypt
from .crypto.groups import Group, GroupElement
from .crypto.schnorr import Signature, SigningKeyPair, sign, signing_keygen, verify_sig
from .encoding import encode
from .errors import BadShare, InsufficientShares, ShareProofInvalid
from .zkp.fiat_shamir import FsContext
from .zkp.sigma import (
    DleqProof,
    LinearProof,
    prove_dleq,
    prove_linear,
    verify_dleq,
    verify_linear,
)


# -- key generation ------------------------------------------------------------

def _eval_poly(coeffs: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for a in reversed(coeffs):
        acc = (acc * x + a) % q
    return acc


def _feldman_eval(commitments: Sequence[GroupElement], x: int) -> GroupElement:
    group = commitments[0].group
    acc = group.identity
    power = 1
    for c in commitments:
        acc = acc * c ** power
        power = power * x % group.order
    return acc


@dataclass(frozen=True)
class Dealing:
    dealer: int
    commitments: tuple[GroupElement, ...]
    shares: dict[int, int] = field(repr=False)

    def verify_share(self, receiver: int) -> bool:
        g = self.commitments[0].group.generator
        return g ** self.shares[receiver] == _feldman_eval(self.commitments, receiver)


def deal(group: Group, dealer: int, n: int, t: int, rng) -> Dealing:
    coeffs = [group.random_scalar(rng) for _ in range(t)]
    commitments = tuple(group.generator ** a for a in coeffs)
    shares = {j: _eval_poly(coeffs, j, group.order) for j in range(1, n + 1)}
    return Dealing(dealer, commitments, shares)


@dataclass(frozen=True)
class TellerShare:
    teller_id: int
    secret_share: int = field(repr=False)
    public_commitments: tuple[GroupElement, ...]


@dataclass(frozen=True)
class TallyKey:
    """Public side of the joint key: PK_T plus per-teller verification keys."""

    pk: GroupElement
    n: int
    threshold: int
    commitments: tuple[GroupElement, ...]

    @property
    def group(self) -> Group:
        return self.pk.group

    def verification_key(self, teller_id: int) -> GroupElement:
        if not 1 <= teller_id <= self.n:
            raise KeyError(teller_id)
        return _feldman_eval(self.commitments, teller_id)

    def to_wire(self) -> dict:
        return {"pk": self.pk.to_bytes(), "n": self.n, "t": self.threshold,
                "commitments": [c.to_bytes() for c in self.commitments]}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "TallyKey":
        return cls(group.from_bytes(wire["pk"]), int(wire["n"]), int(wire["t"]),
                   tuple(group.from_bytes(c) for c in wire["commitments"]))


def dkg(n: int, t: int, group: Group, rngs: Sequence, tamper=None) -> tuple[TallyKey, list[TellerShare]]:
    """Joint-Feldman DKG among ``n`` tellers with threshold ``t``.

    ``tamper`` lets tests corrupt a dealing before it is delivered.
    """
    if not 1 <= t <= n:
        raise ValueError("need 1 <= t <= n")
    if len(rngs) != n:
        raise ValueError("one randomness source per teller")
    dealings = [deal(group, d, n, t, rngs[d - 1]) for d in range(1, n + 1)]
    if tamper is not None:
        dealings = [tamper(d) for d in dealings]
    for d in dealings:
        for j in range(1, n + 1):
            if not d.verify_share(j):
                raise BadShare(f"share from dealer {d.dealer} to teller {j} fails Feldman check")
    combined = tuple(
        _product(d.commitments[l] for d in dealings) for l in range(t)
    )
    shares = [
        TellerShare(j, sum(d.shares[j] for d in dealings) % group.order, combined)
        for j in range(1, n + 1)
    ]
    return TallyKey(combined[0], n, t, combined), shares


def _product(items: Iterable[GroupElement]) -> GroupElement:
    it = iter(items)
    acc = next(it)
    for x in it:
        acc = acc * x
    return acc


def lagrange_at_zero(ids: Sequence[int], i: int, q: int) -> int:
    num, den = 1, 1
    for j in ids:
        if j != i:
            num = num * (-j) % q
            den = den * (i - j) % q
    return num * pow(den, -1, q) % q


def reconstruct_secret(shares: Sequence[TellerShare], q: int) -> int:
    ids = [s.teller_id for s in shares]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate teller ids")
    return sum(s.secret_share * lagrange_at_zero(ids, s.teller_id, q) for s in shares) % q


# -- threshold decryption -------------------------------------------------------

@dataclass(frozen=True)
class DecryptShare:
    teller_id: int
    partial: GroupElement
    proof: DleqProof

    def to_wire(self) -> dict:
        return {"teller": self.teller_id, "partial": self.partial.to_bytes(), "proof": self.proof.to_wire()}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "DecryptShare":
        return cls(int(wire["teller"]), group.from_bytes(wire["partial"]),
                   DleqProof.from_wire(group, wire["proof"]))


def partial_decrypt(share: TellerShare, c: Ciphertext, ctx: FsContext, rng) -> DecryptShare:
    group = c.a.group
    vk = group.generator ** share.secret_share
    partial = c.a ** share.secret_share
    proof = prove_dleq(group.generator, vk, c.a, partial, share.secret_share, ctx, rng)
    return DecryptShare(share.teller_id, partial, proof)


def verify_decrypt_share(key: TallyKey, c: Ciphertext, ds: DecryptShare, ctx: FsContext) -> bool:
    try:
        vk = key.verification_key(ds.teller_id)
    except KeyError:
        return False
    return verify_dleq(key.group.generator, vk, c.a, ds.partial, ds.proof, ctx)


def combine_decrypt(key: TallyKey, c: Ciphertext, shares: Sequence[DecryptShare], ctx: FsContext) -> GroupElement:
    """Check every share, then interpolate the first ``t`` distinct ones."""
    chosen: dict[int, DecryptShare] = {}
    for ds in shares:
        if not verify_decrypt_share(key, c, ds, ctx):
            raise ShareProofInvalid(f"decryption share of teller {ds.teller_id} does not verify")
        chosen.setdefault(ds.teller_id, ds)
    if len(chosen) < key.threshold:
        raise InsufficientShares(f"{len(chosen)} valid shares, need {key.threshold}")
    ids = sorted(chosen)[:key.threshold]
    q = key.group.order
    acc = key.group.identity
    for i in ids:
        acc = acc * chosen[i].partial ** lagrange_at_zero(ids, i, q)
    return c.b / acc


# -- tracker commitment factors ------------------------------------------------

@dataclass(frozen=True)
class CommitmentFactor:
    """Public posting: Enc(pk_i^r) and Enc(g^r) under PK_T with one shared ``r``."""

    teller_id: int
    voter_index: int
    enc_factor: Ciphertext
    enc_alpha: Ciphertext
    proof: LinearProof

    def to_wire(self) -> dict:
        return {"teller": self.teller_id, "voter": self.voter_index, "factor": self.enc_factor.to_wire(),
                "alpha": self.enc_alpha.to_wire(), "proof": self.proof.to_wire()}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "CommitmentFactor":
        return cls(int(wire["teller"]), int(wire["voter"]), Ciphertext.from_wire(group, wire["factor"]),
                   Ciphertext.from_wire(group, wire["alpha"]), LinearProof.from_wire(group, wire["proof"]))


def factor_equations(pk_T: GroupElement, pk_i: GroupElement, posting: CommitmentFactor):
    # witnesses: 0 = r, 1 = randomness of enc_factor, 2 = randomness of enc_alpha
    g = pk_T.group.generator
    return [
        (posting.enc_factor.a, [(1, g)]),
        (posting.enc_factor.b, [(0, pk_i), (1, pk_T)]),
        (posting.enc_alpha.a, [(2, g)]),
        (posting.enc_alpha.b, [(0, g), (2, pk_T)]),
    ]


def verify_commitment_factor(pk_T: GroupElement, pk_i: GroupElement, posting: CommitmentFactor,
                             ctx: FsContext) -> bool:
    return verify_linear(factor_equations(pk_T, pk_i, posting), 3, posting.proof, ctx)


@dataclass(frozen=True)
class AlphaShareRecord:
    """Private per-teller record, handed to the retrieval authority on request."""

    teller_id: int
    voter_index: int
    g_exp_share: GroupElement
    commitment_factor: GroupElement
    proof: DleqProof
    factor_opening: int = field(repr=False)
    alpha_opening: int = field(repr=False)
    signature: Signature | None = None

    def signed_payload(self, election_id: bytes) -> bytes:
        return encode(["alpha-share", election_id, self.teller_id, self.voter_index,
                       self.g_exp_share, self.commitment_factor, self.proof,
                       self.factor_opening, self.alpha_opening])


def check_alpha_share(rec: AlphaShareRecord, posting: CommitmentFactor, pk_T: GroupElement,
                      pk_i: GroupElement, teller_vk: GroupElement, election_id: bytes,
                      ctx: FsContext) -> bool:
    """Authenticity, exponent consistency, and agreement with the public posting."""
    if rec.signature is None or not verify_sig(teller_vk, rec.signed_payload(election_id), rec.signature):
        return False
    if (rec.teller_id, rec.voter_index) != (posting.teller_id, posting.voter_index):
        return False
    g = pk_T.group.generator
    if not verify_dleq(g, rec.g_exp_share, pk_i, rec.commitment_factor, rec.proof, ctx):
        return False
    if posting.enc_alpha != eg_encrypt(pk_T, rec.g_exp_share, rec.alpha_opening):
        return False
    return posting.enc_factor == eg_encrypt(pk_T, rec.commitment_factor, rec.factor_opening)


class Teller:
    """One tally teller: key share, signing key, and a private alpha-share store."""

    def __init__(self, share: TellerShare, signing: SigningKeyPair, election_id: bytes):
        self.share = share
        self.signing = signing
        self.election_id = election_id
        self._alpha_store: dict[int, AlphaShareRecord] = {}

    @classmethod
    def create(cls, share: TellerShare, group: Group, election_id: bytes, rng) -> "Teller":
        return cls(share, signing_keygen(group, rng), election_id)

    @property
    def teller_id(self) -> int:
        return self.share.teller_id

    @property
    def vk(self) -> GroupElement:
        return self.signing.vk

    def decrypt_share(self, c: Ciphertext, ctx: FsContext, rng) -> DecryptShare:
        return partial_decrypt(self.share, c, ctx, rng)

    def sign(self, msg: bytes) -> Signature:
        return sign(self.signing, msg)

    def contribute_alpha_factors(self, pk_T: GroupElement, voter_pks: Sequence[GroupElement],
                                 ctx: FsContext, rng, exponents: Sequence[int] | None = None
                                 ) -> list[CommitmentFactor]:
        """Pick ``r_{i,k}`` per voter, keep ``g^{r_{i,k}}`` private, post encrypted factors.

        ``exponents`` fixes the ``r_{i,k}`` (test hook).
        """
        group = pk_T.group
        g = group.generator
        postings = []
        for i, pk_i in enumerate(voter_pks):
            r = exponents[i] if exponents is not None else group.random_scalar(rng)
            s_f, s_a = group.random_scalar(rng), group.random_scalar(rng)
            alpha_k, factor_k = g ** r, pk_i ** r
            enc_factor = eg_encrypt(pk_T, factor_k, s_f)
            enc_alpha = eg_encrypt(pk_T, alpha_k, s_a)
            draft = CommitmentFactor(self.teller_id, i, enc_factor, enc_alpha, None)
            pctx = ctx.derive("factor", [self.teller_id, i])
            proof = prove_linear(factor_equations(pk_T, pk_i, draft), [r, s_f, s_a], pctx, rng)
            postings.append(CommitmentFactor(self.teller_id, i, enc_factor, enc_alpha, proof))
            dctx = ctx.derive("alpha-share", [self.teller_id, i])
            dleq = prove_dleq(g, alpha_k, pk_i, factor_k, r, dctx, rng)
            rec = AlphaShareRecord(self.teller_id, i, alpha_k, factor_k, dleq, s_f, s_a)
            self._alpha_store[i] = rec
        return postings

    def release_alpha_share(self, voter_index: int) -> AlphaShareRecord:
        rec = self._alpha_store[voter_index]
        sig = self.sign(rec.signed_payload(self.election_id))
        return AlphaShareRecord(rec.teller_id, rec.voter_index, rec.g_exp_share, rec.commitment_factor,
                                rec.proof, rec.factor_opening, rec.alpha_opening, sig)

    def has_alpha_share(self, voter_index: int) -> bool:
        return voter_index in self._alpha_store


def threshold_decrypt(tellers: Sequence[Teller], key: TallyKey, c: Ciphertext, ctx: FsContext, rng
                      ) -> tuple[GroupElement, list[DecryptShare]]:
    """Collect shares from the first ``t`` tellers and combine."""
    shares = [t.decrypt_share(c, ctx, rng) for t in tellers[:key.threshold]]
    return combine_decrypt(key, c, shares, ctx), shares
