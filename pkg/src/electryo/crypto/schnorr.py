"""Schnorr signatures over the election group.

The challenge is truncated to at most 16 bytes, so on P-256 a signature is
48 bytes and fits inside a single RCCA plaintext.  Nonces are derived
deterministically from the key and message.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..encoding import encode
from .groups import Group, GroupElement


@dataclass(frozen=True)
class Signature:
    challenge: int
    response: int

    def to_bytes(self, group: Group) -> bytes:
        return (self.challenge.to_bytes(_challenge_bytes(group), "big")
                + self.response.to_bytes(group.scalar_bytes, "big"))

    @classmethod
    def from_bytes(cls, group: Group, data: bytes) -> "Signature":
        cb = _challenge_bytes(group)
        if len(data) != cb + group.scalar_bytes:
            raise ValueError("wrong signature length")
        return cls(int.from_bytes(data[:cb], "big"), int.from_bytes(data[cb:], "big"))

    def to_wire(self) -> list:
        return [self.challenge, self.response]

    @classmethod
    def from_wire(cls, wire) -> "Signature":
        return cls(int(wire[0]), int(wire[1]))


@dataclass(frozen=True)
class SigningKeyPair:
    vk: GroupElement
    sigk: int

    @classmethod
    def from_secret(cls, group: Group, sigk: int) -> "SigningKeyPair":
        return cls(group.generator ** sigk, sigk % group.order)


def _challenge_bytes(group: Group) -> int:
    return min(16, group.scalar_bytes)


def _challenge(vk: GroupElement, commitment: GroupElement, msg: bytes) -> int:
    group = vk.group
    h = hashlib.sha256(encode(["electryo/schnorr", group.name, vk, commitment, msg])).digest()
    return int.from_bytes(h[:_challenge_bytes(group)], "big")


def signing_keygen(group: Group, rng) -> SigningKeyPair:
    return SigningKeyPair.from_secret(group, group.random_scalar(rng, nonzero=True))


def sign(key: SigningKeyPair, msg: bytes) -> Signature:
    group = key.vk.group
    k = group.hash_to_scalar("schnorr-nonce", key.sigk, msg) or 1
    commitment = group.generator ** k
    c = _challenge(key.vk, commitment, msg)
    return Signature(c, (k + c * key.sigk) % group.order)


def verify_sig(vk: GroupElement, msg: bytes, sig: Signature) -> bool:
    group = vk.group
    if not (0 <= sig.response < group.order) or sig.challenge >> (8 * _challenge_bytes(group)):
        return False
    if vk.is_identity():
        return False
    commitment = group.generator ** sig.response / vk ** sig.challenge
    return _challenge(vk, commitment, msg) == sig.challenge
