"""Verifiable parallel re-encryption mix.

The shuffle argument is the permutation-commitment proof of Terelius and
Wikstrom in the form popularised by Haenni et al., widened so one permutation
commitment and one set of permutation responses cover every ciphertext slot of
a row.  An RCCA slot is mixed as its underlying ElGamal pairs; its binding tag
travels unchanged.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

from .crypto.elgamal import Ciphertext
from .crypto.groups import Group, GroupElement
from .crypto.rcca import RccaCiphertext
from .encoding import digest
from .errors import BatchMalformed, StageProofInvalid
from .zkp.fiat_shamir import FsContext, fs_challenge

log = logging.getLogger(__name__)

Slot = Union[Ciphertext, RccaCiphertext]
EG, RCCA = "eg", "rcca"


@dataclass(frozen=True)
class MixBatch:
    rows: tuple[tuple[Slot, ...], ...]
    kinds: tuple[str, ...]

    def __post_init__(self):
        if len(self.rows) < 2:
            raise BatchMalformed(f"a mix batch needs at least 2 rows, got {len(self.rows)}")
        for row in self.rows:
            if len(row) != len(self.kinds):
                raise BatchMalformed("row arity differs from declared slot kinds")
            for slot, kind in zip(row, self.kinds):
                expected = RccaCiphertext if kind == RCCA else Ciphertext
                if not isinstance(slot, expected):
                    raise BatchMalformed(f"slot of kind {kind} holds {type(slot).__name__}")
        for k, kind in enumerate(self.kinds):
            if kind == RCCA:
                first = self.rows[0][k]
                if any(len(r[k].pairs) != len(first.pairs) or r[k].binding != first.binding for r in self.rows):
                    raise BatchMalformed(f"RCCA slot {k} is not uniform across rows")

    @classmethod
    def of(cls, rows: Sequence[Sequence[Slot]], kinds: Sequence[str] | None = None) -> "MixBatch":
        rows = tuple(tuple(r) for r in rows)
        if kinds is None:
            if not rows:
                raise BatchMalformed("cannot infer slot kinds of an empty batch")
            kinds = tuple(RCCA if isinstance(s, RccaCiphertext) else EG for s in rows[0])
        return cls(rows, tuple(kinds))

    @property
    def group(self) -> Group:
        return self.flat()[0][0].group

    @property
    def arity(self) -> int:
        return len(self.kinds)

    def __len__(self) -> int:
        return len(self.rows)

    def flat(self) -> list[list[Ciphertext]]:
        out = []
        for row in self.rows:
            pairs: list[Ciphertext] = []
            for slot in row:
                pairs.extend(slot.pairs if isinstance(slot, RccaCiphertext) else (slot,))
            out.append(pairs)
        return out

    def bindings(self) -> tuple:
        return tuple(self.rows[0][k].binding if kind == RCCA else None for k, kind in enumerate(self.kinds))

    def rebuild(self, flat_rows: Sequence[Sequence[Ciphertext]]) -> "MixBatch":
        """Reassemble flat pair rows into this batch's slot layout."""
        template = self.rows[0]
        rows = []
        for pairs in flat_rows:
            pos, row = 0, []
            for slot in template:
                if isinstance(slot, RccaCiphertext):
                    n = len(slot.pairs)
                    row.append(RccaCiphertext.from_pairs(pairs[pos:pos + n], slot.binding))
                    pos += n
                else:
                    row.append(pairs[pos])
                    pos += 1
            rows.append(tuple(row))
        return MixBatch(tuple(rows), self.kinds)

    def to_wire(self) -> dict:
        return {"kinds": list(self.kinds), "rows": [[s.to_wire() for s in row] for row in self.rows]}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "MixBatch":
        kinds = tuple(wire["kinds"])
        rows = []
        for row in wire["rows"]:
            rows.append(tuple(
                RccaCiphertext.from_wire(group, s) if kind == RCCA else Ciphertext.from_wire(group, s)
                for s, kind in zip(row, kinds)
            ))
        return cls(tuple(rows), kinds)


def _slot_pks(batch: MixBatch, pks) -> list[GroupElement]:
    """Expand one key, or one key per slot, to one key per flat pair."""
    if isinstance(pks, GroupElement):
        pks = [pks] * batch.arity
    if len(pks) != batch.arity:
        raise BatchMalformed("need one public key per slot")
    out = []
    for slot, pk in zip(batch.rows[0], pks):
        out.extend([pk] * (len(slot.pairs) if isinstance(slot, RccaCiphertext) else 1))
    return out


@lru_cache(maxsize=None)
def _generator(group: Group, i: int) -> GroupElement:
    return group.hash_to_element("electryo/mix-generator", i)


def _generators(group: Group, n: int) -> list[GroupElement]:
    return [_generator(group, i) for i in range(n + 1)]


@dataclass(frozen=True)
class ShuffleProof:
    perm_commitments: tuple[GroupElement, ...]
    chain: tuple[GroupElement, ...]
    t1: GroupElement
    t2: GroupElement
    t3: GroupElement
    t4: tuple[tuple[GroupElement, GroupElement], ...]
    t_hat: tuple[GroupElement, ...]
    s1: int
    s2: int
    s3: int
    s4: tuple[int, ...]
    s_hat: tuple[int, ...]
    s_prime: tuple[int, ...]

    def to_wire(self) -> dict:
        return {
            "c": [x.to_bytes() for x in self.perm_commitments],
            "chain": [x.to_bytes() for x in self.chain],
            "t": [self.t1.to_bytes(), self.t2.to_bytes(), self.t3.to_bytes()],
            "t4": [[a.to_bytes(), b.to_bytes()] for a, b in self.t4],
            "t_hat": [x.to_bytes() for x in self.t_hat],
            "s": [self.s1, self.s2, self.s3],
            "s4": list(self.s4),
            "s_hat": list(self.s_hat),
            "s_prime": list(self.s_prime),
        }

    @classmethod
    def from_wire(cls, group: Group, w: dict) -> "ShuffleProof":
        el = lambda xs: tuple(group.from_bytes(x) for x in xs)
        t1, t2, t3 = el(w["t"])
        s1, s2, s3 = (int(x) for x in w["s"])
        return cls(el(w["c"]), el(w["chain"]), t1, t2, t3,
                   tuple((group.from_bytes(a), group.from_bytes(b)) for a, b in w["t4"]),
                   el(w["t_hat"]), s1, s2, s3, tuple(int(x) for x in w["s4"]),
                   tuple(int(x) for x in w["s_hat"]), tuple(int(x) for x in w["s_prime"]))


@dataclass(frozen=True)
class MixServerState:
    """Secret side of one shuffle; never written to the transcript."""

    server_id: int
    permutation: tuple[int, ...] = field(repr=False)
    randomness: tuple[tuple[int, ...], ...] = field(repr=False)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _statement_digest(ctx: FsContext, pks, inp, out, commitments, chain) -> bytes:
    return digest(ctx.election_id, ctx.phase_label, ctx.statement_digest, list(pks),
                  [[c.to_wire() for c in row] for row in inp],
                  [[c.to_wire() for c in row] for row in out],
                  list(commitments), list(chain))


def _u_challenges(group: Group, stmt: bytes, n: int) -> list[int]:
    return [group.hash_to_scalar("electryo/mix-u", stmt, j) for j in range(n)]


def _prod(items, identity):
    acc = identity
    for x in items:
        acc = acc * x
    return acc


def prove_shuffle(pks: Sequence[GroupElement], inp, out, perm: Sequence[int],
                  rand: Sequence[Sequence[int]], ctx: FsContext, rng) -> ShuffleProof:
    """``out[i]`` re-encrypts ``inp[perm[i]]`` with randomness ``rand[perm[i]]``."""
    group = pks[0].group
    g, q, one = group.generator, group.order, group.identity
    n, width = len(inp), len(pks)
    h = _generators(group, n)
    h0, hs = h[0], h[1:]

    inv = [0] * n
    for i, j in enumerate(perm):
        inv[j] = i
    r = [group.random_scalar(rng) for _ in range(n)]
    commitments = [g ** r[j] * hs[inv[j]] for j in range(n)]

    # u is bound to the permutation commitments; the chain then commits to u permuted
    stmt_pre = _statement_digest(ctx, pks, inp, out, commitments, ())
    u = _u_challenges(group, stmt_pre, n)
    u_perm = [u[perm[i]] for i in range(n)]
    r_hat = [group.random_scalar(rng) for _ in range(n)]
    chain = []
    prev = h0
    for i in range(n):
        prev = g ** r_hat[i] * prev ** u_perm[i]
        chain.append(prev)

    r_bar = sum(r) % q
    v = [1] * n
    for i in range(n - 2, -1, -1):
        v[i] = u_perm[i + 1] * v[i + 1] % q
    r_hat_sum = sum(rh * vi for rh, vi in zip(r_hat, v)) % q
    r_tilde = sum(rj * uj for rj, uj in zip(r, u)) % q
    r_prime = [sum(rand[j][k] * u[j] for j in range(n)) % q for k in range(width)]

    w1, w2, w3 = (group.random_scalar(rng) for _ in range(3))
    w4 = [group.random_scalar(rng) for _ in range(width)]
    w_hat = [group.random_scalar(rng) for _ in range(n)]
    w_prime = [group.random_scalar(rng) for _ in range(n)]

    t1, t2 = g ** w1, g ** w2
    t3 = g ** w3 * _prod((hs[i] ** w_prime[i] for i in range(n)), one)
    t4 = []
    for k in range(width):
        ta = _prod((out[i][k].a ** w_prime[i] for i in range(n)), one) / g ** w4[k]
        tb = _prod((out[i][k].b ** w_prime[i] for i in range(n)), one) / pks[k] ** w4[k]
        t4.append((ta, tb))
    t_hat = []
    prev = h0
    for i in range(n):
        t_hat.append(g ** w_hat[i] * prev ** w_prime[i])
        prev = chain[i]

    stmt = _statement_digest(ctx, pks, inp, out, commitments, chain)
    fctx = FsContext(ctx.election_id, ctx.phase_label, stmt)
    c = fs_challenge(fctx, [t1, t2, t3, *[x for p in t4 for x in p], *t_hat])

    return ShuffleProof(
        tuple(commitments), tuple(chain), t1, t2, t3, tuple(t4), tuple(t_hat),
        (w1 + c * r_bar) % q, (w2 + c * r_hat_sum) % q, (w3 + c * r_tilde) % q,
        tuple((w4[k] + c * r_prime[k]) % q for k in range(width)),
        tuple((w_hat[i] + c * r_hat[i]) % q for i in range(n)),
        tuple((w_prime[i] + c * u_perm[i]) % q for i in range(n)),
    )


def check_shuffle(pks: Sequence[GroupElement], inp, out, proof: ShuffleProof, ctx: FsContext) -> VerifyResult:
    n, width = len(inp), len(pks)
    if n < 2:
        return VerifyResult(False, "batch has fewer than 2 rows")
    if len(out) != n:
        return VerifyResult(False, f"row count changed from {n} to {len(out)}")
    if any(len(row) != width for row in (*inp, *out)):
        return VerifyResult(False, "row width does not match key list")
    if not (len(proof.perm_commitments) == len(proof.chain) == len(proof.t_hat)
            == len(proof.s_hat) == len(proof.s_prime) == n) or len(proof.t4) != width or len(proof.s4) != width:
        return VerifyResult(False, "proof dimensions do not match batch")
    group = pks[0].group
    g, q, one = group.generator, group.order, group.identity
    scalars = (proof.s1, proof.s2, proof.s3, *proof.s4, *proof.s_hat, *proof.s_prime)
    if any(not 0 <= s < q for s in scalars):
        return VerifyResult(False, "response out of range")
    h = _generators(group, n)
    h0, hs = h[0], h[1:]

    stmt_pre = _statement_digest(ctx, pks, inp, out, proof.perm_commitments, ())
    u = _u_challenges(group, stmt_pre, n)
    stmt = _statement_digest(ctx, pks, inp, out, proof.perm_commitments, proof.chain)
    fctx = FsContext(ctx.election_id, ctx.phase_label, stmt)
    c = fs_challenge(fctx, [proof.t1, proof.t2, proof.t3, *[x for p in proof.t4 for x in p], *proof.t_hat])

    u_prod = 1
    for x in u:
        u_prod = u_prod * x % q
    c_bar = _prod(proof.perm_commitments, one) / _prod(hs, one)
    c_hat = proof.chain[-1] / h0 ** u_prod
    c_tilde = _prod((cj ** uj for cj, uj in zip(proof.perm_commitments, u)), one)

    if g ** proof.s1 != proof.t1 * c_bar ** c:
        return VerifyResult(False, "permutation commitment sum check failed")
    if g ** proof.s2 != proof.t2 * c_hat ** c:
        return VerifyResult(False, "commitment chain product check failed")
    if g ** proof.s3 * _prod((hs[i] ** proof.s_prime[i] for i in range(n)), one) != proof.t3 * c_tilde ** c:
        return VerifyResult(False, "permuted challenge commitment check failed")
    for k in range(width):
        a_tilde = _prod((inp[j][k].a ** u[j] for j in range(n)), one)
        b_tilde = _prod((inp[j][k].b ** u[j] for j in range(n)), one)
        lhs_a = _prod((out[i][k].a ** proof.s_prime[i] for i in range(n)), one) / g ** proof.s4[k]
        lhs_b = _prod((out[i][k].b ** proof.s_prime[i] for i in range(n)), one) / pks[k] ** proof.s4[k]
        ta, tb = proof.t4[k]
        if lhs_a != ta * a_tilde ** c or lhs_b != tb * b_tilde ** c:
            return VerifyResult(False, f"re-encryption check failed in slot {k}")
    prev = h0
    for i in range(n):
        if g ** proof.s_hat[i] * prev ** proof.s_prime[i] != proof.t_hat[i] * proof.chain[i] ** c:
            return VerifyResult(False, f"chain link {i} failed")
        prev = proof.chain[i]
    return VerifyResult(True)


def verify_shuffle(inp: MixBatch, out: MixBatch, proof: ShuffleProof, pks, ctx: FsContext) -> VerifyResult:
    if inp.kinds != out.kinds:
        return VerifyResult(False, "slot kinds differ")
    if inp.bindings() != out.bindings():
        return VerifyResult(False, "RCCA binding changed")
    try:
        flat_pks = _slot_pks(inp, pks)
    except BatchMalformed as exc:
        return VerifyResult(False, str(exc))
    in_flat, out_flat = inp.flat(), out.flat()
    if any(len(r) != len(flat_pks) for r in out_flat):
        return VerifyResult(False, "output row layout differs")
    return check_shuffle(flat_pks, in_flat, out_flat, proof, ctx)


class MixServer:
    """One mix server.  ``identity=True`` applies the identity permutation with
    zero randomness; ``tamper`` rewrites the output after proving (test hook)."""

    def __init__(self, server_id: int, rng, identity: bool = False, tamper=None):
        self.server_id = server_id
        self.rng = rng
        self.identity = identity
        self.tamper = tamper

    def shuffle(self, batch: MixBatch, pks, ctx: FsContext) -> tuple[MixBatch, ShuffleProof, MixServerState]:
        return shuffle(batch, pks, ctx, self.rng, server_id=self.server_id, identity=self.identity,
                       tamper=self.tamper)


def shuffle(batch: MixBatch, pks, ctx: FsContext, rng, server_id: int = 0, identity: bool = False,
            tamper=None) -> tuple[MixBatch, ShuffleProof, MixServerState]:
    group = batch.group
    g = group.generator
    flat_pks = _slot_pks(batch, pks)
    in_flat = batch.flat()
    n, width = len(in_flat), len(flat_pks)
    if identity:
        perm = list(range(n))
        rand = [[0] * width for _ in range(n)]
    else:
        perm = list(range(n))
        rng.shuffle(perm)
        rand = [[group.random_scalar(rng) for _ in range(width)] for _ in range(n)]
    out_flat = []
    for i in range(n):
        j = perm[i]
        out_flat.append([
            Ciphertext(c.a * g ** rand[j][k], c.b * flat_pks[k] ** rand[j][k])
            for k, c in enumerate(in_flat[j])
        ])
    proof = prove_shuffle(flat_pks, in_flat, out_flat, perm, rand, ctx, rng)
    out = batch.rebuild(out_flat)
    if tamper is not None:
        out = tamper(out)
    state = MixServerState(server_id, tuple(perm), tuple(tuple(r) for r in rand))
    return out, proof, state


@dataclass(frozen=True)
class MixStage:
    server_id: int
    output: MixBatch
    proof: ShuffleProof

    def to_wire(self) -> dict:
        return {"server": self.server_id, "output": self.output.to_wire(), "proof": self.proof.to_wire()}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "MixStage":
        return cls(int(wire["server"]), MixBatch.from_wire(group, wire["output"]),
                   ShuffleProof.from_wire(group, wire["proof"]))


def stage_context(ctx: FsContext, index: int) -> FsContext:
    return ctx.derive("stage", index)


def run_cascade(batch: MixBatch, servers: Sequence[MixServer], pks, ctx: FsContext
                ) -> tuple[MixBatch, list[MixStage]]:
    """Run every server in turn, checking each stage before feeding the next."""
    if not servers:
        raise ValueError("a cascade needs at least one mix server")
    current, stages = batch, []
    for index, server in enumerate(servers, 1):
        out, proof, _ = server.shuffle(current, pks, stage_context(ctx, index))
        res = verify_shuffle(current, out, proof, pks, stage_context(ctx, index))
        if not res:
            raise StageProofInvalid(index, res.reason)
        stages.append(MixStage(server.server_id, out, proof))
        current = out
    return current, stages


def verify_cascade(batch: MixBatch, stages: Sequence[MixStage], pks, ctx: FsContext) -> VerifyResult:
    if not stages:
        return VerifyResult(False, "empty proof chain")
    current = batch
    for index, st in enumerate(stages, 1):
        res = verify_shuffle(current, st.output, st.proof, pks, stage_context(ctx, index))
        if not res:
            return VerifyResult(False, f"stage {index}: {res.reason}")
        current = st.output
    return VerifyResult(True)
