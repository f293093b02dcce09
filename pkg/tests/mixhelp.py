"""Shared batch builders and tampering for mix-net tests."""
from __future__ import annotations

import dataclasses
import random

from electryo.crypto.elgamal import eg_encrypt, eg_reencrypt
from electryo.mixnet import MixBatch


def random_batch(pk, rows: int, width: int, rng: random.Random):
    """A batch of ``rows`` rows of ``width`` ElGamal slots plus the plaintext exponents."""
    group = pk.group
    plain = [tuple(rng.randrange(1, 50) for _ in range(width)) for _ in range(rows)]
    batch = MixBatch.of([[eg_encrypt(pk, group.generator ** m, group.random_scalar(rng)) for m in row]
                         for row in plain])
    return batch, plain


def replace_row(batch: MixBatch, i: int, row) -> MixBatch:
    rows = list(batch.rows)
    rows[i] = tuple(row)
    return MixBatch(tuple(rows), batch.kinds)


def swap_in(batch, pk, rng):
    g = pk.group.generator
    return replace_row(batch, 0, [eg_encrypt(pk, g ** 1000, 7) for _ in batch.kinds])


def drop(batch, pk, rng):
    return MixBatch(batch.rows[1:], batch.kinds)


def duplicate(batch, pk, rng):
    return replace_row(batch, 1, batch.rows[0])


def repair_slots(batch, pk, rng):
    r0, r1 = list(batch.rows[0]), list(batch.rows[1])
    r0[0], r1[0] = r1[0], r0[0]
    return replace_row(replace_row(batch, 0, r0), 1, r1)


def rerandomize(batch, pk, rng):
    row = [eg_reencrypt(pk, c, pk.group.random_scalar(rng, nonzero=True)) for c in batch.rows[0]]
    return replace_row(batch, 0, row)


OUTPUT_MUTATIONS = {
    "row-swap-in": swap_in,
    "row-drop": drop,
    "row-duplicate": duplicate,
    "slot-re-pairing": repair_slots,
    "stale-proof-rerandomized": rerandomize,
}


def proof_mutations(proof):
    """One mutation per proof field: the first scalar or element bumped."""
    for f in dataclasses.fields(proof):
        v = getattr(proof, f.name)
        if isinstance(v, int):
            yield f.name, dataclasses.replace(proof, **{f.name: v + 1})
        elif isinstance(v, tuple):
            first = v[0]
            if isinstance(first, int):
                m = first + 1
            elif isinstance(first, tuple):
                m = (first[0] * first[0].group.generator, first[1])
            else:
                m = first * first.group.generator
            yield f.name, dataclasses.replace(proof, **{f.name: (m, *v[1:])})
        else:
            yield f.name, dataclasses.replace(proof, **{f.name: v * v.group.generator})


def decrypt_rows(sk, batch: MixBatch, decrypt) -> list[tuple]:
    return [tuple(decrypt(sk, c.a.value, c.b.value) for c in row) for row in batch.rows]
