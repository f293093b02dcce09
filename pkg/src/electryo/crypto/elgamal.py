"""ElGamal and exponential ElGamal over a :class:`Group`.

Ciphertexts are ``(a, b) = (g^r, m * pk^r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ..errors import NotInRange
from .groups import Group, GroupElement


@dataclass(frozen=True)
class ElGamalKeyPair:
    pk: GroupElement
    sk: int

    @classmethod
    def from_secret(cls, group: Group, sk: int) -> "ElGamalKeyPair":
        sk %= group.order
        return cls(group.generator ** sk, sk)


@dataclass(frozen=True)
class Ciphertext:
    a: GroupElement
    b: GroupElement

    @property
    def group(self) -> Group:
        return self.a.group

    def __mul__(self, other: "Ciphertext") -> "Ciphertext":
        return Ciphertext(self.a * other.a, self.b * other.b)

    def __truediv__(self, other: "Ciphertext") -> "Ciphertext":
        return Ciphertext(self.a / other.a, self.b / other.b)

    def __pow__(self, e: int) -> "Ciphertext":
        return Ciphertext(self.a ** e, self.b ** e)

    def to_wire(self) -> list:
        return [self.a.to_bytes(), self.b.to_bytes()]

    @classmethod
    def from_wire(cls, group: Group, wire) -> "Ciphertext":
        a, b = wire
        return cls(group.from_bytes(a), group.from_bytes(b))

    @classmethod
    def trivial(cls, m: GroupElement) -> "Ciphertext":
        """Encryption of ``m`` with zero randomness; anyone can check it."""
        return cls(m.group.identity, m)


def keygen(group: Group, rng) -> ElGamalKeyPair:
    return ElGamalKeyPair.from_secret(group, group.random_scalar(rng, nonzero=True))


def eg_encrypt(pk: GroupElement, m: GroupElement, r: int) -> Ciphertext:
    g = pk.group.generator
    return Ciphertext(g ** r, m * pk ** r)


def eg_reencrypt(pk: GroupElement, c: Ciphertext, s: int) -> Ciphertext:
    return Ciphertext(c.a * pk.group.generator ** s, c.b * pk ** s)


def eg_decrypt(sk: int, c: Ciphertext) -> GroupElement:
    return c.b / c.a ** sk


def exp_encode(group: Group, n: int) -> GroupElement:
    return group.generator ** n


@lru_cache(maxsize=64)
def _power_table(group: Group, start: int, count: int) -> dict[bytes, int]:
    table: dict[bytes, int] = {}
    x = group.generator ** start
    for n in range(start, start + count):
        table.setdefault(x.to_bytes(), n)
        x = x * group.generator
    return table


def exp_decode(m: GroupElement, max_n: int, method: str | None = None) -> int:
    """Return ``n`` in ``[1, max_n]`` with ``g^n == m``.

    ``method`` is ``"scan"`` (exhaustive table of ``g^1 .. g^max_n``) or
    ``"bsgs"``; by default small groups scan and large ones use baby-step
    giant-step.
    """
    group = m.group
    if method is None:
        method = "scan" if group.order < 2**32 else "bsgs"
    if method == "scan":
        n = _power_table(group, 1, max_n).get(m.to_bytes())
        if n is None:
            raise NotInRange(f"no exponent in [1, {max_n}]")
        return n
    width = math.isqrt(max_n) + 1
    table = _power_table(group, 0, width)
    giant = group.generator ** (-width)
    y = m
    for i in range(max_n // width + 1):
        j = table.get(y.to_bytes())
        if j is not None and 1 <= i * width + j <= max_n:
            return i * width + j
        y = y * giant
    raise NotInRange(f"no exponent in [1, {max_n}]")
