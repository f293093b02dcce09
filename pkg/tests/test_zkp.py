from __future__ import annotations

import dataclasses
import random

import pytest

from electryo.crypto.elgamal import Ciphertext, eg_encrypt, eg_reencrypt, keygen
from electryo.crypto.groups import PROD_GROUP, TEST_GROUP, GroupElement
from electryo.zkp.fiat_shamir import FsContext, fs_challenge
from electryo.zkp.sigma import (
    DisjunctiveProof,
    DleqProof,
    LinearProof,
    PokProof,
    ReencLinkProof,
    prove_dleq,
    prove_dleq_multi,
    prove_linear,
    prove_pok,
    prove_reenc_link,
    prove_vote,
    verify_dleq,
    verify_dleq_multi,
    verify_linear,
    verify_pok,
    verify_reenc_link,
    verify_vote,
)

T = TEST_GROUP
EID = b"EL-zkp"


def ctx(label="t", stmt=None, eid=EID):
    return FsContext.for_statement(eid, label, stmt)


def mutations(proof):
    """Every single-component mutation of a proof dataclass."""
    for f in dataclasses.fields(proof):
        value = getattr(proof, f.name)
        for mutated in _mutate(value):
            yield f.name, dataclasses.replace(proof, **{f.name: mutated})


def _mutate(value):
    if isinstance(value, bool):
        return
    if isinstance(value, int):
        yield value + 1
    elif isinstance(value, GroupElement):
        yield value * value.group.generator
    elif isinstance(value, tuple):
        for i, item in enumerate(value):
            for m in _mutate(item):
                yield value[:i] + (m,) + value[i + 1:]


# -- Fiat-Shamir -------------------------------------------------------------------

def test_fs_challenge_known_answer():
    c = FsContext.for_statement(b"EL-kat", "kat", [1, b"x"])
    assert fs_challenge(c, [T.generator, T.generator ** 5]) == 25663


def test_fs_challenge_binds_every_input():
    base = fs_challenge(ctx(), [T.generator])
    assert fs_challenge(ctx(), [T.generator]) == base
    assert fs_challenge(ctx(eid=b"EL-other"), [T.generator]) != base
    assert fs_challenge(ctx(stmt=1), [T.generator]) != base
    assert fs_challenge(ctx("u"), [T.generator]) != base
    assert fs_challenge(ctx(), [T.generator ** 2]) != base
    assert fs_challenge(ctx().derive("a"), [T.generator]) != fs_challenge(ctx().derive("b"), [T.generator])


def test_fs_challenge_needs_commitments():
    with pytest.raises(ValueError):
        fs_challenge(ctx(), [])


# -- DLEQ ---------------------------------------------------------------------------

@pytest.mark.parametrize("group", [T, PROD_GROUP], ids=["test", "prod"])
def test_dleq_completeness_and_mutation_soundness(group):
    rng = random.Random(1)
    g = group.generator
    x = group.random_scalar(rng)
    h = g ** group.random_scalar(rng)
    X, Y = g ** x, h ** x
    proof = prove_dleq(g, X, h, Y, x, ctx(), rng)
    assert verify_dleq(g, X, h, Y, proof, ctx())
    assert DleqProof.from_wire(group, proof.to_wire()) == proof
    assert not verify_dleq(g, X, h, Y * g, proof, ctx())
    assert not verify_dleq(g, X, h, Y, proof, ctx(eid=b"EL-replay"))
    for name, bad in mutations(proof):
        assert not verify_dleq(g, X, h, Y, bad, ctx()), name


def test_dleq_multi_base():
    rng = random.Random(2)
    bases = [T.generator ** rng.randrange(1, T.order) for _ in range(5)]
    x = 4242
    values = [b ** x for b in bases]
    proof = prove_dleq_multi(bases, values, x, ctx(), rng)
    assert verify_dleq_multi(bases, values, proof, ctx())
    values[3] = values[3] * T.generator
    assert not verify_dleq_multi(bases, values, proof, ctx())
    assert not verify_dleq_multi(bases[:2], values[:2], proof, ctx())


def test_dleq_wrong_witness_rejected():
    rng = random.Random(3)
    g = T.generator
    h = g ** 99
    proof = prove_dleq(g, g ** 5, h, h ** 6, 5, ctx(), rng)
    assert not verify_dleq(g, g ** 5, h, h ** 6, proof, ctx())


# -- plaintext knowledge ------------------------------------------------------------

def test_pok_completeness_and_mutations():
    rng = random.Random(4)
    kp = keygen(T, rng)
    r = T.random_scalar(rng)
    c = eg_encrypt(kp.pk, T.generator ** 77, r)
    proof = prove_pok(kp.pk, c, r, ctx(), rng)
    assert verify_pok(kp.pk, c, proof, ctx())
    assert PokProof.from_wire(T, proof.to_wire()) == proof
    for name, bad in mutations(proof):
        assert not verify_pok(kp.pk, c, bad, ctx()), name
    assert not verify_pok(kp.pk, eg_reencrypt(kp.pk, c, 5), proof, ctx())


# -- disjunctive vote proof ---------------------------------------------------------

@pytest.mark.parametrize("choice", [1, 2, 3])
def test_vote_proof_each_candidate(choice):
    rng = random.Random(choice)
    kp = keygen(T, rng)
    r = T.random_scalar(rng)
    c = eg_encrypt(kp.pk, T.generator ** choice, r)
    proof = prove_vote(kp.pk, c, choice, r, 3, ctx(), rng)
    assert verify_vote(kp.pk, c, proof, 3, ctx())
    assert DisjunctiveProof.from_wire(T, proof.to_wire()) == proof
    for name, bad in mutations(proof):
        assert not verify_vote(kp.pk, c, bad, 3, ctx()), name
    assert not verify_vote(kp.pk, c, proof, 4, ctx())


def test_vote_proof_rejects_non_candidate_plaintext():
    rng = random.Random(7)
    kp = keygen(T, rng)
    r = T.random_scalar(rng)
    with pytest.raises(ValueError):
        prove_vote(kp.pk, eg_encrypt(kp.pk, T.generator ** 4, r), 4, r, 3, ctx(), rng)
    # an honest proof for candidate 2 does not transfer to an encryption of 4
    good = eg_encrypt(kp.pk, T.generator ** 2, r)
    proof = prove_vote(kp.pk, good, 2, r, 3, ctx(), rng)
    off = eg_encrypt(kp.pk, T.generator ** 4, r)
    assert not verify_vote(kp.pk, off, proof, 3, ctx())


# -- linear relations -----------------------------------------------------------------

def test_linear_proof_two_witnesses():
    rng = random.Random(8)
    g = T.generator
    h = g ** 1234
    a, b = 55, 777
    eqs = [(g ** a * h ** b, [(0, g), (1, h)]), (g ** b, [(1, g)])]
    proof = prove_linear(eqs, [a, b], ctx(), rng)
    assert verify_linear(eqs, 2, proof, ctx())
    assert LinearProof.from_wire(T, proof.to_wire()) == proof
    for name, bad in mutations(proof):
        assert not verify_linear(eqs, 2, bad, ctx()), name
    assert not verify_linear([(eqs[0][0] * g, eqs[0][1]), eqs[1]], 2, proof, ctx())


def test_reencryption_link_proof():
    rng = random.Random(9)
    kp = keygen(T, rng)
    printed = [eg_encrypt(kp.pk, T.generator ** rng.randrange(T.order), T.random_scalar(rng)) for _ in range(3)]
    shifts = [T.random_scalar(rng) for _ in printed]
    published = [eg_reencrypt(kp.pk, p, s) for p, s in zip(printed, shifts)]
    rho, encrypted = [], []
    for p in printed:
        for elem in (p.a, p.b):
            r = T.random_scalar(rng)
            rho.append(r)
            encrypted.append(eg_encrypt(kp.pk, elem, r))
    proof = prove_reenc_link(kp.pk, published, encrypted, rho, shifts, ctx(), rng)
    assert isinstance(proof, ReencLinkProof)
    assert verify_reenc_link(kp.pk, published, encrypted, proof, ctx())
    swapped = [encrypted[1], encrypted[0], *encrypted[2:]]
    assert not verify_reenc_link(kp.pk, published, swapped, proof, ctx())
    other = list(published)
    other[0] = eg_reencrypt(kp.pk, other[0], 1)
    assert not verify_reenc_link(kp.pk, other, encrypted, proof, ctx())
    for name, bad in mutations(proof):
        assert not verify_reenc_link(kp.pk, published, encrypted, bad, ctx()), name


def test_ciphertext_product_is_homomorphic():
    rng = random.Random(10)
    kp = keygen(T, rng)
    c1 = eg_encrypt(kp.pk, T.generator ** 3, 5)
    c2 = eg_encrypt(kp.pk, T.generator ** 4, 6)
    prod = c1 * c2
    assert isinstance(prod, Ciphertext)
    assert prod == eg_encrypt(kp.pk, T.generator ** 7, 11)
