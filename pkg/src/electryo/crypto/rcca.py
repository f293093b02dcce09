"""RCCA-secure ElGamal via a three-round OAEP (Feistel) padding.

The padded state ``len | m | 0^z | rho`` is split into two halves, run
through three Feistel rounds keyed by the ciphertext's ``binding`` (a digest
of the election id and a purpose label), embedded into group elements and
ElGamal-encrypted element by element.  The only malleability left is
re-encryption of the individual pairs: any other change makes the
redundancy check fail on decryption.

On P-256 each half fits a single element, so a ciphertext is exactly two
ElGamal pairs.  The 20-bit test group carries one byte per element, so each
half spans several pairs there.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..encoding import digest
from ..errors import InvalidCiphertext
from .elgamal import Ciphertext, eg_decrypt, eg_encrypt, eg_reencrypt
from .groups import Group, GroupElement


@dataclass(frozen=True)
class RccaLayout:
    width: int
    redundancy: int
    randomness: int
    elem_bytes: int

    @property
    def total(self) -> int:
        return 1 + self.width + self.redundancy + self.randomness

    @property
    def half(self) -> int:
        return self.total // 2

    @property
    def pairs_per_half(self) -> int:
        return self.half // self.elem_bytes


_LAYOUTS: dict[str, RccaLayout] = {}


def layout_for(group: Group) -> RccaLayout:
    layout = _LAYOUTS.get(group.name)
    if layout is None:
        if group.embed_bytes >= 30:
            layout = RccaLayout(width=48, redundancy=4, randomness=7, elem_bytes=group.embed_bytes)
        else:
            layout = RccaLayout(width=8, redundancy=3, randomness=4, elem_bytes=group.embed_bytes)
        assert layout.total % (2 * layout.elem_bytes) == 0
        _LAYOUTS[group.name] = layout
    return layout


def binding_for(election_id: bytes, label: str) -> bytes:
    return digest("electryo/rcca-binding", election_id, label)


@dataclass(frozen=True)
class RccaCiphertext:
    c1: tuple[Ciphertext, ...]
    c2: tuple[Ciphertext, ...]
    binding: bytes

    @property
    def pairs(self) -> tuple[Ciphertext, ...]:
        return self.c1 + self.c2

    @property
    def group(self) -> Group:
        return self.c1[0].group

    def to_wire(self) -> dict:
        return {
            "c1": [c.to_wire() for c in self.c1],
            "c2": [c.to_wire() for c in self.c2],
            "binding": self.binding,
        }

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "RccaCiphertext":
        return cls(
            tuple(Ciphertext.from_wire(group, c) for c in wire["c1"]),
            tuple(Ciphertext.from_wire(group, c) for c in wire["c2"]),
            bytes(wire["binding"]),
        )

    @classmethod
    def from_pairs(cls, pairs, binding: bytes) -> "RccaCiphertext":
        pairs = tuple(pairs)
        if len(pairs) % 2:
            raise InvalidCiphertext("odd number of pairs")
        n = len(pairs) // 2
        return cls(pairs[:n], pairs[n:], binding)

    def is_well_formed(self, binding: bytes | None = None) -> bool:
        """Structural check anyone can run without a key."""
        if not self.c1:
            return False
        lay = layout_for(self.group)
        if len(self.c1) != lay.pairs_per_half or len(self.c2) != lay.pairs_per_half:
            return False
        if binding is not None and self.binding != binding:
            return False
        return len(self.binding) == 32


def _round(binding: bytes, index: int, data: bytes, n: int) -> bytes:
    return hashlib.shake_256(b"electryo/oaep3" + binding + bytes([index]) + data).digest(n)


def _xor(x: bytes, y: bytes) -> bytes:
    return bytes(a ^ b for a, b in zip(x, y))


def _chunks(data: bytes, size: int) -> list[bytes]:
    return [data[i:i + size] for i in range(0, len(data), size)]


def pad(group: Group, m: bytes, rho: bytes, binding: bytes) -> tuple[list[GroupElement], list[GroupElement]]:
    lay = layout_for(group)
    if len(m) > lay.width:
        raise ValueError(f"plaintext is {len(m)} bytes, width is {lay.width}")
    if len(rho) != lay.randomness:
        raise ValueError("wrong randomness length")
    state = bytes([len(m)]) + m.ljust(lay.width, b"\0") + bytes(lay.redundancy) + rho
    left, right = state[:lay.half], state[lay.half:]
    left = _xor(left, _round(binding, 1, right, lay.half))
    right = _xor(right, _round(binding, 2, left, lay.half))
    left = _xor(left, _round(binding, 3, right, lay.half))
    return ([group.embed(c) for c in _chunks(left, lay.elem_bytes)],
            [group.embed(c) for c in _chunks(right, lay.elem_bytes)])


def unpad(group: Group, left_elems, right_elems, binding: bytes) -> bytes:
    """Invert :func:`pad`; raises InvalidCiphertext unless every check passes."""
    lay = layout_for(group)
    if len(left_elems) != lay.pairs_per_half or len(right_elems) != lay.pairs_per_half:
        raise InvalidCiphertext("wrong number of blocks")
    try:
        left = b"".join(group.extract(e) for e in left_elems)
        right = b"".join(group.extract(e) for e in right_elems)
    except ValueError as exc:
        raise InvalidCiphertext(str(exc)) from None
    left = _xor(left, _round(binding, 3, right, lay.half))
    right = _xor(right, _round(binding, 2, left, lay.half))
    left = _xor(left, _round(binding, 1, right, lay.half))
    state = left + right
    n = state[0]
    body = state[1:1 + lay.width]
    zeros = state[1 + lay.width:1 + lay.width + lay.redundancy]
    if n > lay.width or any(body[n:]) or any(zeros):
        raise InvalidCiphertext("padding check failed")
    return body[:n]


def rcca_encrypt(pk: GroupElement, m: bytes, rng, binding: bytes) -> RccaCiphertext:
    group = pk.group
    rho = rng.randbytes(layout_for(group).randomness)
    left, right = pad(group, m, rho, binding)
    enc = [eg_encrypt(pk, e, group.random_scalar(rng)) for e in left + right]
    return RccaCiphertext.from_pairs(enc, binding)


def rcca_reencrypt_with(pk: GroupElement, c: RccaCiphertext, shifts: list[int]) -> RccaCiphertext:
    if len(shifts) != len(c.pairs):
        raise ValueError("one shift per pair required")
    return RccaCiphertext.from_pairs(
        (eg_reencrypt(pk, p, s) for p, s in zip(c.pairs, shifts)), c.binding
    )


def rcca_reencrypt(pk: GroupElement, c: RccaCiphertext, rng) -> RccaCiphertext:
    shifts = [pk.group.random_scalar(rng) for _ in c.pairs]
    return rcca_reencrypt_with(pk, c, shifts)


def rcca_decrypt(sk: int, c: RccaCiphertext) -> bytes:
    if not c.is_well_formed():
        raise InvalidCiphertext("malformed ciphertext structure")
    left = [eg_decrypt(sk, p) for p in c.c1]
    right = [eg_decrypt(sk, p) for p in c.c2]
    return unpad(c.group, left, right, c.binding)
