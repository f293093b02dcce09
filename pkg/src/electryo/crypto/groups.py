"""Prime-order groups with two interchangeable backends.

``TEST_GROUP`` is the quadratic-residue subgroup of a 21-bit safe prime.  Its
order is just under 2**20, small enough that discrete logs can be found by
brute force in tests, and larger than 10**6 so that six-digit receipt codes
map injectively into the exponent space.

``PROD_GROUP`` is NIST P-256 (cofactor 1), with point arithmetic delegated to
the ``ecdsa`` package.

Scalars are plain Python ints reduced modulo ``group.order``.
"""
from __future__ import annotations

import hashlib
from typing import Any

import ecdsa
from ecdsa.ellipticcurve import INFINITY, PointJacobi

from ..encoding import encode


class GroupElement:
    __slots__ = ("group", "value")

    def __init__(self, group: "Group", value: Any):
        self.group = group
        self.value = value

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.group, self.group._mul(self.value, other.value))

    def __truediv__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.group, self.group._mul(self.value, self.group._inv(other.value)))

    def __pow__(self, exponent: int) -> "GroupElement":
        return GroupElement(self.group, self.group._exp(self.value, exponent % self.group.order))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group._inv(self.value))

    def is_identity(self) -> bool:
        return self.group._eq(self.value, self.group.identity.value)

    def to_bytes(self) -> bytes:
        return self.group._encode(self.value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group is other.group and self.group._eq(self.value, other.value)

    def __hash__(self) -> int:
        return hash(self.to_bytes())

    def __repr__(self) -> str:
        return f"<{self.group.name} {self.to_bytes().hex()[:16]}>"


class Group:
    name: str
    order: int
    generator: GroupElement
    identity: GroupElement
    element_bytes: int
    embed_bytes: int  # payload bytes carried by one embedded element

    @property
    def scalar_bytes(self) -> int:
        return (self.order.bit_length() + 7) // 8

    def random_scalar(self, rng, nonzero: bool = False) -> int:
        return rng.randrange(1 if nonzero else 0, self.order)

    def hash_to_scalar(self, *parts: Any) -> int:
        h = hashlib.sha512(encode(["electryo/h2s", self.name, list(parts)])).digest()
        return int.from_bytes(h, "big") % self.order

    def _expand(self, *parts: Any) -> int:
        return int.from_bytes(hashlib.sha512(encode(["electryo/h2g", self.name, list(parts)])).digest(), "big")

    def from_bytes(self, data: bytes) -> GroupElement:
        return GroupElement(self, self._decode(bytes(data)))

    def __repr__(self) -> str:
        return f"<Group {self.name} |q|={self.order.bit_length()} bits>"

    # backend hooks
    def _mul(self, x, y): raise NotImplementedError
    def _inv(self, x): raise NotImplementedError
    def _exp(self, x, e): raise NotImplementedError
    def _eq(self, x, y): raise NotImplementedError
    def _encode(self, x) -> bytes: raise NotImplementedError
    def _decode(self, data: bytes): raise NotImplementedError
    def embed(self, chunk: bytes) -> GroupElement: raise NotImplementedError
    def extract(self, element: GroupElement) -> bytes: raise NotImplementedError
    def hash_to_element(self, *parts: Any) -> GroupElement: raise NotImplementedError


class ModPGroup(Group):
    """Order-q subgroup of Z_p^* for a safe prime p = 2q + 1."""

    def __init__(self, name: str, p: int, q: int, g: int):
        if p != 2 * q + 1:
            raise ValueError("ModPGroup requires a safe prime p = 2q + 1")
        if pow(g, q, p) != 1 or g in (0, 1):
            raise ValueError("g does not generate the order-q subgroup")
        self.name = name
        self.p = p
        self.order = q
        self.element_bytes = (p.bit_length() + 7) // 8
        # chunk || counter byte must stay below p
        self.embed_bytes = (p.bit_length() - 1 - 8) // 8
        self.generator = GroupElement(self, g)
        self.identity = GroupElement(self, 1)

    def _mul(self, x, y):
        return x * y % self.p

    def _inv(self, x):
        return pow(x, -1, self.p)

    def _exp(self, x, e):
        return pow(x, e, self.p)

    def _eq(self, x, y):
        return x == y

    def _encode(self, x) -> bytes:
        return x.to_bytes(self.element_bytes, "big")

    def _is_member(self, x: int) -> bool:
        return 0 < x < self.p and pow(x, self.order, self.p) == 1

    def _decode(self, data: bytes):
        if len(data) != self.element_bytes:
            raise ValueError("wrong element length")
        x = int.from_bytes(data, "big")
        if not self._is_member(x):
            raise ValueError("not a subgroup element")
        return x

    def embed(self, chunk: bytes) -> GroupElement:
        if len(chunk) != self.embed_bytes:
            raise ValueError("chunk width mismatch")
        base = int.from_bytes(chunk, "big") << 8
        for ctr in range(256):
            x = base + ctr + 1
            if self._is_member(x):
                return GroupElement(self, x)
        raise ValueError("no embedding within counter range")

    def extract(self, element: GroupElement) -> bytes:
        x = element.value - 1
        base, ctr = x >> 8, x & 0xFF
        if base >> (8 * self.embed_bytes):
            raise ValueError("element outside embedding range")
        # canonical: no smaller counter would have been accepted
        for c in range(ctr):
            if self._is_member((base << 8) + c + 1):
                raise ValueError("non-canonical embedding")
        return base.to_bytes(self.embed_bytes, "big")

    def hash_to_element(self, *parts: Any) -> GroupElement:
        ctr = 0
        while True:
            x = self._expand(*parts, ctr) % self.p
            y = x * x % self.p
            if y not in (0, 1):
                return GroupElement(self, y)
            ctr += 1


class P256Group(Group):
    """NIST P-256 with affine compressed encoding; the identity is ``None``."""

    def __init__(self):
        self.name = "P-256"
        self.curve = ecdsa.NIST256p.curve
        self._g = ecdsa.NIST256p.generator
        self.p = int(self.curve.p())
        self.order = int(self._g.order())
        self.element_bytes = 33
        self.embed_bytes = 30
        self.generator = GroupElement(self, self._g)
        self.identity = GroupElement(self, None)

    @staticmethod
    def _norm(point):
        return None if point is None or point == INFINITY else point

    def _mul(self, x, y):
        if x is None:
            return y
        if y is None:
            return x
        return self._norm(x + y)

    def _inv(self, x):
        return None if x is None else -x

    def _exp(self, x, e):
        if x is None or e == 0:
            return None
        return self._norm(x * e)

    def _eq(self, x, y):
        if x is None or y is None:
            return x is None and y is None
        return x == y

    def _encode(self, x) -> bytes:
        if x is None:
            return bytes(self.element_bytes)
        return x.to_bytes("compressed")

    def _decode(self, data: bytes):
        if len(data) != self.element_bytes:
            raise ValueError("wrong element length")
        if data == bytes(self.element_bytes):
            return None
        try:
            return PointJacobi.from_bytes(self.curve, data, valid_encodings=("compressed",), order=self.order)
        except Exception as exc:  # ecdsa raises several types for malformed points
            raise ValueError(f"invalid point encoding: {exc}") from None

    def _point_from_x(self, x: int) -> PointJacobi | None:
        p = self.p
        rhs = (pow(x, 3, p) + self.curve.a() * x + self.curve.b()) % p
        y = pow(rhs, (p + 1) // 4, p)
        if y * y % p != rhs:
            return None
        if y & 1:
            y = p - y
        return PointJacobi(self.curve, x, y, 1, self.order)

    def embed(self, chunk: bytes) -> GroupElement:
        if len(chunk) != self.embed_bytes:
            raise ValueError("chunk width mismatch")
        base = int.from_bytes(chunk, "big") << 8
        for ctr in range(256):
            pt = self._point_from_x(base + ctr)
            if pt is not None:
                return GroupElement(self, pt)
        raise ValueError("no embedding within counter range")

    def extract(self, element: GroupElement) -> bytes:
        pt = element.value
        if pt is None:
            raise ValueError("identity carries no payload")
        x, y = int(pt.x()), int(pt.y())
        if y & 1:
            raise ValueError("non-canonical embedding")
        base, ctr = x >> 8, x & 0xFF
        if base >> (8 * self.embed_bytes):
            raise ValueError("element outside embedding range")
        for c in range(ctr):
            if self._point_from_x((base << 8) + c) is not None:
                raise ValueError("non-canonical embedding")
        return base.to_bytes(self.embed_bytes, "big")

    def hash_to_element(self, *parts: Any) -> GroupElement:
        ctr = 0
        while True:
            pt = self._point_from_x(self._expand(*parts, ctr) % self.p)
            if pt is not None:
                return GroupElement(self, pt)
            ctr += 1


TEST_GROUP = ModPGroup("test-2^20", p=2097143, q=1048571, g=4)
PROD_GROUP = P256Group()

GROUPS = {"test": TEST_GROUP, "prod": PROD_GROUP}


def get_group(name: str) -> Group:
    for key, group in GROUPS.items():
        if name in (key, group.name):
            return group
    raise ValueError(f"unknown group backend {name!r}")
