"""Plaintext equivalence test run by a threshold of tellers.

Each teller raises the ciphertext ratio ``c1 / c2`` to a fresh secret ``z_k``,
publishing ``g^{z_k}`` and a three-base DLEQ proof.  The product of the
blinded ratios is jointly decrypted; it opens to the identity exactly when the
plaintexts agree.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..crypto.elgamal import Ciphertext
from ..crypto.groups import Group, GroupElement
from ..errors import InsufficientShares, ShareInvalid, ShareProofInvalid
from ..tellers import DecryptShare, TallyKey, Teller, combine_decrypt
from .fiat_shamir import FsContext
from .sigma import DleqProof, prove_dleq_multi, verify_dleq_multi


@dataclass(frozen=True)
class PetShare:
    teller_id: int
    commitment: GroupElement  # g^{z_k}
    blinded_ratio: Ciphertext
    dleq: DleqProof

    def to_wire(self) -> dict:
        return {"teller": self.teller_id, "z": self.commitment.to_bytes(),
                "ratio": self.blinded_ratio.to_wire(), "proof": self.dleq.to_wire()}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "PetShare":
        return cls(int(wire["teller"]), group.from_bytes(wire["z"]),
                   Ciphertext.from_wire(group, wire["ratio"]), DleqProof.from_wire(group, wire["proof"]))


@dataclass(frozen=True)
class PetResult:
    equal: bool
    blinded: Ciphertext
    pet_shares: tuple[PetShare, ...]
    decrypt_shares: tuple[DecryptShare, ...]

    def to_wire(self) -> dict:
        return {"equal": self.equal, "blinded": self.blinded.to_wire(),
                "pet": [s.to_wire() for s in self.pet_shares],
                "dec": [s.to_wire() for s in self.decrypt_shares]}

    @classmethod
    def from_wire(cls, group: Group, wire: dict) -> "PetResult":
        return cls(bool(wire["equal"]), Ciphertext.from_wire(group, wire["blinded"]),
                   tuple(PetShare.from_wire(group, s) for s in wire["pet"]),
                   tuple(DecryptShare.from_wire(group, s) for s in wire["dec"]))


def _ratio(c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return c1 / c2


def pet_contribute(teller_id: int, c1: Ciphertext, c2: Ciphertext, ctx: FsContext, rng) -> PetShare:
    group = c1.a.group
    ratio = _ratio(c1, c2)
    z = group.random_scalar(rng, nonzero=True)
    g = group.generator
    bases = (g, ratio.a, ratio.b)
    values = (g ** z, ratio.a ** z, ratio.b ** z)
    proof = prove_dleq_multi(bases, values, z, ctx.derive("blind", teller_id), rng)
    return PetShare(teller_id, values[0], Ciphertext(values[1], values[2]), proof)


def verify_pet_share(c1: Ciphertext, c2: Ciphertext, share: PetShare, ctx: FsContext) -> bool:
    ratio = _ratio(c1, c2)
    g = c1.a.group.generator
    if share.commitment.is_identity():
        return False
    return verify_dleq_multi((g, ratio.a, ratio.b),
                             (share.commitment, share.blinded_ratio.a, share.blinded_ratio.b),
                             share.dleq, ctx.derive("blind", share.teller_id))


def pet_blind(key: TallyKey, c1: Ciphertext, c2: Ciphertext, shares: Sequence[PetShare],
              ctx: FsContext) -> Ciphertext:
    """Verify blinding shares and multiply them into one ciphertext."""
    seen: dict[int, PetShare] = {}
    for s in shares:
        if not verify_pet_share(c1, c2, s, ctx):
            raise ShareInvalid(f"PET share of teller {s.teller_id} does not verify")
        seen.setdefault(s.teller_id, s)
    if len(seen) < key.threshold:
        raise InsufficientShares(f"{len(seen)} PET shares, need {key.threshold}")
    acc = Ciphertext.trivial(key.group.identity)
    for tid in sorted(seen):
        acc = acc * seen[tid].blinded_ratio
    return acc


def pet_combine(key: TallyKey, c1: Ciphertext, c2: Ciphertext, shares: Sequence[PetShare],
                decrypt_shares: Sequence[DecryptShare], ctx: FsContext) -> bool:
    blinded = pet_blind(key, c1, c2, shares, ctx)
    try:
        opened = combine_decrypt(key, blinded, decrypt_shares, ctx.derive("open"))
    except ShareProofInvalid as exc:
        raise ShareInvalid(str(exc)) from None
    return opened.is_identity()


def run_pet(tellers: Sequence[Teller], key: TallyKey, c1: Ciphertext, c2: Ciphertext,
            ctx: FsContext, rng) -> PetResult:
    """Both PET rounds with the first ``t`` tellers."""
    active = list(tellers[:key.threshold])
    shares = [pet_contribute(t.teller_id, c1, c2, ctx, rng) for t in active]
    blinded = pet_blind(key, c1, c2, shares, ctx)
    dec = [t.decrypt_share(blinded, ctx.derive("open"), rng) for t in active]
    equal = pet_combine(key, c1, c2, shares, dec, ctx)
    return PetResult(equal, blinded, tuple(shares), tuple(dec))


def verify_pet_result(key: TallyKey, c1: Ciphertext, c2: Ciphertext, result: PetResult,
                      ctx: FsContext) -> bool:
    try:
        if pet_blind(key, c1, c2, result.pet_shares, ctx) != result.blinded:
            return False
        return pet_combine(key, c1, c2, result.pet_shares, result.decrypt_shares, ctx) == result.equal
    except (ShareInvalid, InsufficientShares):
        return False
