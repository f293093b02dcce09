"""Sigma protocols made non-interactive with strong Fiat-Shamir."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..crypto.elgamal import Ciphertext
from ..crypto.groups import Group, GroupElement
from .fiat_shamir import FsContext, fs_challenge


def _elems(group: Group, wire) -> tuple[GroupElement, ...]:
    return tuple(group.from_bytes(x) for x in wire)


# -- equality of discrete logs (Chaum-Pedersen) ------------------------------

@dataclass(frozen=True)
class DleqProof:
    """Proof that ``values[i] == bases[i] ** x`` for one secret ``x``.

    With two bases this is the usual Chaum-Pedersen proof; PET shares use
    three.
    """

    commitments: tuple[GroupElement, ...]
    challenge: int
    response: int

    @property
    def commitment_a(self) -> GroupElement:
        return self.commitments[0]

    @property
    def commitment_b(self) -> GroupElement:
        return self.commitments[1]

    def to_wire(self) -> dict:
        return {"t": [t.to_bytes() for t in self.commitments], "c": self.challenge, "s": self.response}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "DleqProof":
        return cls(_elems(group, wire["t"]), int(wire["c"]), int(wire["s"]))


def prove_dleq_multi(bases: Sequence[GroupElement], values: Sequence[GroupElement], x: int,
                     ctx: FsContext, rng) -> DleqProof:
    group = bases[0].group
    w = group.random_scalar(rng)
    commitments = tuple(b ** w for b in bases)
    c = fs_challenge(ctx, [*bases, *values, *commitments])
    return DleqProof(commitments, c, (w + c * x) % group.order)


def verify_dleq_multi(bases: Sequence[GroupElement], values: Sequence[GroupElement],
                      proof: DleqProof, ctx: FsContext) -> bool:
    if not (len(bases) == len(values) == len(proof.commitments)) or not bases:
        return False
    group = bases[0].group
    if not (0 <= proof.response < group.order and 0 <= proof.challenge < group.order):
        return False
    if fs_challenge(ctx, [*bases, *values, *proof.commitments]) != proof.challenge:
        return False
    return all(
        b ** proof.response == t * v ** proof.challenge
        for b, v, t in zip(bases, values, proof.commitments)
    )


def prove_dleq(g: GroupElement, X: GroupElement, h: GroupElement, Y: GroupElement, x: int,
               ctx: FsContext, rng) -> DleqProof:
    return prove_dleq_multi((g, h), (X, Y), x, ctx, rng)


def verify_dleq(g: GroupElement, X: GroupElement, h: GroupElement, Y: GroupElement,
                proof: DleqProof, ctx: FsContext) -> bool:
    return verify_dleq_multi((g, h), (X, Y), proof, ctx)


# -- knowledge of encryption randomness ------------------------------------

@dataclass(frozen=True)
class PokProof:
    commitment: GroupElement
    challenge: int
    response: int

    def to_wire(self) -> dict:
        return {"t": self.commitment.to_bytes(), "c": self.challenge, "s": self.response}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "PokProof":
        return cls(group.from_bytes(wire["t"]), int(wire["c"]), int(wire["s"]))


def prove_pok(pk: GroupElement, c: Ciphertext, r: int, ctx: FsContext, rng) -> PokProof:
    """Schnorr proof of knowledge of ``r`` with ``c.a == g^r``.

    Knowing ``r`` means knowing the plaintext ``c.b / pk^r``.
    """
    group = pk.group
    w = group.random_scalar(rng)
    t = group.generator ** w
    ch = fs_challenge(ctx, [pk, c.a, c.b, t])
    return PokProof(t, ch, (w + ch * r) % group.order)


def verify_pok(pk: GroupElement, c: Ciphertext, proof: PokProof, ctx: FsContext) -> bool:
    group = pk.group
    if not (0 <= proof.response < group.order):
        return False
    if fs_challenge(ctx, [pk, c.a, c.b, proof.commitment]) != proof.challenge:
        return False
    return group.generator ** proof.response == proof.commitment * c.a ** proof.challenge


# -- disjunctive proof of a valid vote ----------------------------------------

@dataclass(frozen=True)
class DisjunctiveProof:
    """Chaum-Pedersen OR-proof that ``c`` encrypts ``g^j`` for some ``j`` in ``1..n``."""

    commitments: tuple[tuple[GroupElement, GroupElement], ...]
    challenges: tuple[int, ...]
    responses: tuple[int, ...]

    def to_wire(self) -> dict:
        return {
            "t": [[a.to_bytes(), b.to_bytes()] for a, b in self.commitments],
            "c": list(self.challenges),
            "s": list(self.responses),
        }

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "DisjunctiveProof":
        return cls(
            tuple((group.from_bytes(a), group.from_bytes(b)) for a, b in wire["t"]),
            tuple(int(x) for x in wire["c"]),
            tuple(int(x) for x in wire["s"]),
        )


def prove_vote(pk: GroupElement, c: Ciphertext, choice: int, r: int, n_options: int,
               ctx: FsContext, rng) -> DisjunctiveProof:
    """``choice`` is the plaintext exponent, 1-based."""
    if not 1 <= choice <= n_options:
        raise ValueError("choice outside the message space; no accepting proof exists")
    group = pk.group
    g, q = group.generator, group.order
    commitments, challenges, responses = [], [], []
    w = group.random_scalar(rng)
    for j in range(1, n_options + 1):
        if j == choice:
            commitments.append((g ** w, pk ** w))
            challenges.append(0)
            responses.append(0)
            continue
        cj, sj = group.random_scalar(rng), group.random_scalar(rng)
        shifted = c.b / g ** j
        commitments.append((g ** sj / c.a ** cj, pk ** sj / shifted ** cj))
        challenges.append(cj)
        responses.append(sj)
    total = fs_challenge(ctx, [pk, c.a, c.b, *[x for pair in commitments for x in pair]])
    idx = choice - 1
    challenges[idx] = (total - sum(challenges)) % q
    responses[idx] = (w + challenges[idx] * r) % q
    return DisjunctiveProof(tuple(commitments), tuple(challenges), tuple(responses))


def verify_vote(pk: GroupElement, c: Ciphertext, proof: DisjunctiveProof, n_options: int,
                ctx: FsContext) -> bool:
    group = pk.group
    g, q = group.generator, group.order
    if not (len(proof.commitments) == len(proof.challenges) == len(proof.responses) == n_options):
        return False
    if any(not 0 <= x < q for x in (*proof.challenges, *proof.responses)):
        return False
    total = fs_challenge(ctx, [pk, c.a, c.b, *[x for pair in proof.commitments for x in pair]])
    if sum(proof.challenges) % q != total:
        return False
    for j, ((ta, tb), cj, sj) in enumerate(zip(proof.commitments, proof.challenges, proof.responses), 1):
        if g ** sj != ta * c.a ** cj:
            return False
        if pk ** sj != tb * (c.b / g ** j) ** cj:
            return False
    return True


# -- generic linear relations -------------------------------------------------

# An equation (Y, [(i, G), ...]) states Y == prod(G ** w[i]).
Equation = tuple[GroupElement, list[tuple[int, GroupElement]]]


@dataclass(frozen=True)
class LinearProof:
    commitments: tuple[GroupElement, ...]
    challenge: int
    responses: tuple[int, ...]

    def to_wire(self) -> dict:
        return {"t": [t.to_bytes() for t in self.commitments], "c": self.challenge,
                "s": list(self.responses)}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "LinearProof":
        return cls(_elems(group, wire["t"]), int(wire["c"]), tuple(int(x) for x in wire["s"]))


def _statement_elements(equations: Sequence[Equation]) -> list[GroupElement]:
    out = []
    for y, terms in equations:
        out.append(y)
        out.extend(base for _, base in terms)
    return out


def _combine(terms, scalars, identity: GroupElement) -> GroupElement:
    acc = identity
    for i, base in terms:
        acc = acc * base ** scalars[i]
    return acc


def prove_linear(equations: Sequence[Equation], witnesses: Sequence[int], ctx: FsContext, rng,
                 cls=LinearProof):
    group = equations[0][0].group
    nonces = [group.random_scalar(rng) for _ in witnesses]
    commitments = tuple(_combine(terms, nonces, group.identity) for _, terms in equations)
    c = fs_challenge(ctx, [*_statement_elements(equations), *commitments])
    responses = tuple((w + c * x) % group.order for w, x in zip(nonces, witnesses))
    return cls(commitments, c, responses)


def verify_linear(equations: Sequence[Equation], n_witnesses: int, proof: LinearProof,
                  ctx: FsContext) -> bool:
    if not equations or len(proof.commitments) != len(equations) or len(proof.responses) != n_witnesses:
        return False
    group = equations[0][0].group
    if any(not 0 <= s < group.order for s in proof.responses):
        return False
    if fs_challenge(ctx, [*_statement_elements(equations), *proof.commitments]) != proof.challenge:
        return False
    for (y, terms), t in zip(equations, proof.commitments):
        if _combine(terms, proof.responses, group.identity) != t * y ** proof.challenge:
            return False
    return True


# -- ballot-code re-encryption link -------------------------------------------

class ReencLinkProof(LinearProof):
    """AND-proof tying published re-encrypted pairs to an element-wise encryption.

    For every printed pair ``(a, b)`` the scanner publishes ``(a g^s, b pk^s)``
    and ``E_a = Enc(a; rho_a)``, ``E_b = Enc(b; rho_b)``.  Witnesses per pair
    are ``(rho_a, rho_b, s)``.
    """


def link_equations(pk: GroupElement, published: Sequence[Ciphertext],
                   encrypted: Sequence[Ciphertext]) -> list[Equation]:
    if len(encrypted) != 2 * len(published):
        raise ValueError("need two encrypted elements per published pair")
    g = pk.group.generator
    g_inv, pk_inv = g.inverse(), pk.inverse()
    eqs: list[Equation] = []
    for p, pub in enumerate(published):
        ea, eb = encrypted[2 * p], encrypted[2 * p + 1]
        ra, rb, s = 3 * p, 3 * p + 1, 3 * p + 2
        eqs.append((ea.a, [(ra, g)]))
        eqs.append((ea.b / pub.a, [(ra, pk), (s, g_inv)]))
        eqs.append((eb.a, [(rb, g)]))
        eqs.append((eb.b / pub.b, [(rb, pk), (s, pk_inv)]))
    return eqs


def prove_reenc_link(pk: GroupElement, published: Sequence[Ciphertext], encrypted: Sequence[Ciphertext],
                     rho: Sequence[int], shifts: Sequence[int], ctx: FsContext, rng) -> ReencLinkProof:
    """``rho`` lists the encryption randomness of ``encrypted`` in order."""
    witnesses = []
    for p, s in enumerate(shifts):
        witnesses += [rho[2 * p], rho[2 * p + 1], s]
    return prove_linear(link_equations(pk, published, encrypted), witnesses, ctx, rng, cls=ReencLinkProof)


def verify_reenc_link(pk: GroupElement, published: Sequence[Ciphertext], encrypted: Sequence[Ciphertext],
                      proof: LinearProof, ctx: FsContext) -> bool:
    try:
        eqs = link_equations(pk, published, encrypted)
    except ValueError:
        return False
    return verify_linear(eqs, 3 * len(published), proof, ctx)
