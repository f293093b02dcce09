"""Polling-station actors: clerk, smartcard, printer, scanner and the tracker
retrieval authority (TRA)."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .crypto.elgamal import Ciphertext, ElGamalKeyPair, eg_encrypt, eg_reencrypt, keygen
from .crypto.groups import Group, GroupElement
from .crypto.rcca import RccaCiphertext, binding_for, rcca_encrypt, rcca_reencrypt_with
from .crypto.schnorr import Signature, SigningKeyPair, sign, signing_keygen
from .encoding import encode
from .errors import (
    AlreadyVoted,
    InvalidCardOutput,
    InvalidReceiptCode,
    NotOnRoll,
    PetFailed,
    UnfilledBallot,
)
from .tellers import AlphaShareRecord, CommitmentFactor, TallyKey, Teller, check_alpha_share
from .trackers import AlphaTerm, alpha_share_context, assemble_alpha
from .zkp.fiat_shamir import FsContext
from .zkp.pet import PetResult, run_pet
from .zkp.sigma import (
    DisjunctiveProof,
    PokProof,
    ReencLinkProof,
    prove_pok,
    prove_reenc_link,
    prove_vote,
    verify_pok,
    verify_reenc_link,
    verify_vote,
)

QR_V6_BITS = 1088
QR_V10_BITS = 2192

ID_LABEL = "ballot-id"
SIG_LABEL = "ballot-sig"


# -- credentials and registration ----------------------------------------------

@dataclass(frozen=True)
class VoterCredential:
    voter_id: bytes
    signing: SigningKeyPair = field(repr=False)
    selene: ElGamalKeyPair = field(repr=False)
    contact: str = ""

    @classmethod
    def create(cls, voter_id: bytes, group: Group, rng, contact: str = "") -> "VoterCredential":
        return cls(voter_id, signing_keygen(group, rng), keygen(group, rng), contact)


def voter_id_for(index: int) -> bytes:
    return f"V{index:07d}".encode()


class Clerk:
    """Checks voters against the roll and keeps the paper attendance log."""

    def __init__(self, roll: Sequence[bytes]):
        self.roll = set(roll)
        self.attendance: list[bytes] = []

    def register(self, voter_id: bytes) -> int:
        if voter_id not in self.roll:
            raise NotOnRoll(voter_id.decode(errors="replace"))
        if voter_id in self.attendance:
            raise AlreadyVoted(voter_id.decode(errors="replace"))
        self.attendance.append(voter_id)
        return len(self.attendance) - 1

    def attended(self, voter_id: bytes) -> bool:
        return voter_id in self.attendance


# -- smartcard ------------------------------------------------------------------

def signature_message(voter_id: bytes, election_id: bytes, extra: bytes = b"") -> bytes:
    return encode(["electryo/ballot-signature", voter_id, election_id, extra])


@dataclass(frozen=True)
class CardOutput:
    enc_id: RccaCiphertext
    enc_sig: RccaCiphertext


def card_issue(credential: VoterCredential, election_id: bytes, pk_T: GroupElement, rng,
               extra: bytes = b"", forge: bool = False) -> CardOutput:
    """Encrypt the id and a signature on ``id || election id || extra``.

    ``forge`` makes a compromised card emit a signature under a random key.
    """
    group = pk_T.group
    key = signing_keygen(group, rng) if forge else credential.signing
    sig = sign(key, signature_message(credential.voter_id, election_id, extra))
    return CardOutput(
        rcca_encrypt(pk_T, credential.voter_id, rng, binding_for(election_id, ID_LABEL)),
        rcca_encrypt(pk_T, sig.to_bytes(group), rng, binding_for(election_id, SIG_LABEL)),
    )


# -- printed ballot -----------------------------------------------------------------

def _component_bits(c: RccaCiphertext) -> int:
    return len(c.pairs) * 2 * c.group.element_bytes * 8


@dataclass(frozen=True)
class BallotCode:
    enc_id: RccaCiphertext
    enc_sig: RccaCiphertext

    def elements(self) -> list[GroupElement]:
        return [x for p in (*self.enc_id.pairs, *self.enc_sig.pairs) for x in (p.a, p.b)]

    def payload(self) -> bytes:
        return b"".join(e.to_bytes() for e in self.elements())

    def component_bits(self) -> tuple[int, int]:
        return _component_bits(self.enc_id), _component_bits(self.enc_sig)

    def fits_qr(self) -> bool:
        bits = self.component_bits()
        return max(bits) <= QR_V6_BITS and sum(bits) <= QR_V10_BITS

    def to_wire(self) -> dict:
        return {"id": self.enc_id.to_wire(), "sig": self.enc_sig.to_wire()}

    @classmethod
    def from_wire(cls, group: Group, w: dict) -> "BallotCode":
        return cls(RccaCiphertext.from_wire(group, w["id"]), RccaCiphertext.from_wire(group, w["sig"]))

    @classmethod
    def from_elements(cls, elements: Sequence[GroupElement], election_id: bytes) -> "BallotCode":
        pairs = [Ciphertext(elements[i], elements[i + 1]) for i in range(0, len(elements), 2)]
        half = len(pairs) // 2
        return cls(RccaCiphertext.from_pairs(pairs[:half], binding_for(election_id, ID_LABEL)),
                   RccaCiphertext.from_pairs(pairs[half:], binding_for(election_id, SIG_LABEL)))


@dataclass(frozen=True)
class PaperBallot:
    ballot_code: BallotCode
    vote: int | None = None
    box_serial: int | None = None

    def fill(self, vote: int) -> "PaperBallot":
        if self.vote is not None:
            raise ValueError("ballot already marked")
        return replace(self, vote=vote)

    def deposit(self, serial: int) -> "PaperBallot":
        return replace(self, box_serial=serial)


class Printer:
    """Re-encrypts the card output; it never holds a decryption key."""

    def __init__(self, pk_T: GroupElement, election_id: bytes, rng):
        self.pk_T = pk_T
        self.election_id = election_id
        self.rng = rng

    def print_ballot(self, card: CardOutput) -> PaperBallot:
        ok = (isinstance(card.enc_id, RccaCiphertext) and isinstance(card.enc_sig, RccaCiphertext)
              and card.enc_id.is_well_formed(binding_for(self.election_id, ID_LABEL))
              and card.enc_sig.is_well_formed(binding_for(self.election_id, SIG_LABEL)))
        if not ok:
            raise InvalidCardOutput("card output is not a pair of well-formed ballot ciphertexts")
        group = self.pk_T.group
        reenc = []
        for c in (card.enc_id, card.enc_sig):
            reenc.append(rcca_reencrypt_with(self.pk_T, c, [group.random_scalar(self.rng) for _ in c.pairs]))
        code = BallotCode(*reenc)
        if not code.fits_qr():
            raise InvalidCardOutput("ballot code exceeds QR capacity")
        return PaperBallot(code)


# -- receipt codes ------------------------------------------------------------------

_DAMM = (
    (0, 3, 1, 7, 5, 9, 8, 6, 4, 2),
    (7, 0, 9, 2, 1, 5, 4, 8, 6, 3),
    (4, 2, 0, 6, 8, 7, 1, 3, 5, 9),
    (1, 7, 5, 0, 9, 8, 3, 4, 2, 6),
    (6, 1, 2, 3, 0, 4, 5, 9, 7, 8),
    (3, 6, 7, 4, 2, 0, 9, 5, 8, 1),
    (5, 8, 6, 9, 7, 2, 0, 1, 3, 4),
    (8, 9, 4, 5, 3, 6, 2, 0, 1, 7),
    (9, 4, 3, 8, 6, 1, 7, 2, 0, 5),
    (2, 5, 8, 1, 4, 3, 6, 7, 9, 0),
)


def damm_check(digits: str) -> int:
    interim = 0
    for ch in digits:
        interim = _DAMM[interim][int(ch)]
    return interim


@dataclass(frozen=True)
class ReceiptCode:
    digits: str
    check: int

    @classmethod
    def generate(cls, rng) -> "ReceiptCode":
        digits = "".join(str(rng.randrange(10)) for _ in range(5))
        return cls(digits, damm_check(digits))

    @classmethod
    def parse(cls, text: str) -> "ReceiptCode":
        text = text.strip()
        if len(text) != 6 or not text.isdigit():
            raise InvalidReceiptCode("receipt code must be six decimal digits")
        if damm_check(text) != 0:
            raise InvalidReceiptCode("check digit mismatch")
        return cls(text[:5], int(text[5]))

    def __str__(self) -> str:
        return f"{self.digits}{self.check}"

    @property
    def value(self) -> int:
        return int(str(self))

    def element(self, group: Group) -> GroupElement:
        return group.generator ** self.value


def vote_element(group: Group, candidate: int) -> GroupElement:
    return group.generator ** (candidate + 1)


# -- scanner ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ScannerTuple:
    enc_id: RccaCiphertext
    enc_sig: RccaCiphertext
    enc_ballot_code: tuple[Ciphertext, ...]
    enc_vote: Ciphertext
    enc_rc: Ciphertext
    vote_proof: DisjunctiveProof
    rc_proof: PokProof
    link_proof: ReencLinkProof

    def statement(self) -> dict:
        return {"id": self.enc_id.to_wire(), "sig": self.enc_sig.to_wire(),
                "code": [c.to_wire() for c in self.enc_ballot_code],
                "vote": self.enc_vote.to_wire(), "rc": self.enc_rc.to_wire()}

    def to_wire(self) -> dict:
        w = self.statement()
        w["proofs"] = {"vote": self.vote_proof.to_wire(), "rc": self.rc_proof.to_wire(),
                       "link": self.link_proof.to_wire()}
        return w

    @classmethod
    def from_wire(cls, group: Group, w: dict) -> "ScannerTuple":
        p = w["proofs"]
        return cls(
            RccaCiphertext.from_wire(group, w["id"]), RccaCiphertext.from_wire(group, w["sig"]),
            tuple(Ciphertext.from_wire(group, c) for c in w["code"]),
            Ciphertext.from_wire(group, w["vote"]), Ciphertext.from_wire(group, w["rc"]),
            DisjunctiveProof.from_wire(group, p["vote"]), PokProof.from_wire(group, p["rc"]),
            ReencLinkProof.from_wire(group, p["link"]),
        )

    def mix_row(self) -> tuple:
        return (self.enc_id, self.enc_sig, *self.enc_ballot_code, self.enc_vote, self.enc_rc)


def ballot_context(election_id: bytes, statement: dict) -> FsContext:
    return FsContext.for_statement(election_id, "ballot", statement)


def verify_scanner_tuple(t: ScannerTuple, pk_T: GroupElement, n_candidates: int,
                         election_id: bytes) -> tuple[bool, str]:
    if not (t.enc_id.is_well_formed(binding_for(election_id, ID_LABEL))
            and t.enc_sig.is_well_formed(binding_for(election_id, SIG_LABEL))):
        return False, "ballot-code ciphertexts malformed"
    ctx = ballot_context(election_id, t.statement())
    if not verify_vote(pk_T, t.enc_vote, t.vote_proof, n_candidates, ctx.derive("vote")):
        return False, "vote proof rejected"
    if not verify_pok(pk_T, t.enc_rc, t.rc_proof, ctx.derive("rc")):
        return False, "receipt-code proof rejected"
    published = (*t.enc_id.pairs, *t.enc_sig.pairs)
    if not verify_reenc_link(pk_T, published, t.enc_ballot_code, t.link_proof, ctx.derive("link")):
        return False, "re-encryption link proof rejected"
    return True, ""


@dataclass
class ScannerFault:
    """Misbehaviour injected into one scan."""

    flip_to: int | None = None
    drop: bool = False
    copy_code: BallotCode | None = None


class Scanner:
    def __init__(self, pk_T: GroupElement, election_id: bytes, n_candidates: int, rng):
        self.pk_T = pk_T
        self.election_id = election_id
        self.n_candidates = n_candidates
        self.rng = rng

    def scan(self, ballot: PaperBallot, fault: ScannerFault | None = None) -> tuple[ScannerTuple, ReceiptCode]:
        # The receipt code comes off the stream before the vote is looked at.
        rc = ReceiptCode.generate(self.rng)
        if ballot.vote is None:
            raise UnfilledBallot("ballot has no mark")
        vote = ballot.vote
        code = ballot.ballot_code
        if fault is not None:
            if fault.flip_to is not None:
                vote = fault.flip_to
            if fault.copy_code is not None:
                code = fault.copy_code
        return self._build(code, vote, rc), rc

    def _build(self, code: BallotCode, vote: int, rc: ReceiptCode) -> ScannerTuple:
        group = self.pk_T.group
        rng = self.rng
        printed = (*code.enc_id.pairs, *code.enc_sig.pairs)
        shifts = [group.random_scalar(rng) for _ in printed]
        published = [eg_reencrypt(self.pk_T, p, s) for p, s in zip(printed, shifts)]
        rho, enc_code = [], []
        for p in printed:
            for elem in (p.a, p.b):
                r = group.random_scalar(rng)
                rho.append(r)
                enc_code.append(eg_encrypt(self.pk_T, elem, r))
        r_vote, r_rc = group.random_scalar(rng), group.random_scalar(rng)
        enc_vote = eg_encrypt(self.pk_T, vote_element(group, vote), r_vote)
        enc_rc = eg_encrypt(self.pk_T, rc.element(group), r_rc)
        half = len(code.enc_id.pairs)
        enc_id = RccaCiphertext.from_pairs(published[:half], code.enc_id.binding)
        enc_sig = RccaCiphertext.from_pairs(published[half:], code.enc_sig.binding)
        draft = ScannerTuple(enc_id, enc_sig, tuple(enc_code), enc_vote, enc_rc, None, None, None)
        ctx = ballot_context(self.election_id, draft.statement())
        return replace(
            draft,
            vote_proof=prove_vote(self.pk_T, enc_vote, vote + 1, r_vote, self.n_candidates, ctx.derive("vote"), rng),
            rc_proof=prove_pok(self.pk_T, enc_rc, r_rc, ctx.derive("rc"), rng),
            link_proof=prove_reenc_link(self.pk_T, published, enc_code, rho, shifts, ctx.derive("link"), rng),
        )


# -- tracker retrieval authority -----------------------------------------------------------

def pet_context(election_id: bytes, row: int) -> FsContext:
    return FsContext.for_statement(election_id, "receipt-pet", row)


class TRA:
    """Gates alpha release on a receipt-code PET and assembles alpha from teller shares."""

    def __init__(self, key: TallyKey, tellers: Sequence[Teller], election_id: bytes, rng):
        self.key = key
        self.tellers = list(tellers)
        self.election_id = election_id
        self.rng = rng
        self._suppressed: dict[int, AlphaTerm] = {}

    def gate(self, claimed: str, enc_rc: Ciphertext, row: int) -> tuple[bool, Ciphertext, PetResult]:
        """PET between the claimed code and the posted one.

        A malformed code raises before any teller is involved.  Returns the
        verdict, the TRA's own encryption of the claim, and the PET evidence.
        """
        rc = ReceiptCode.parse(claimed)
        group = self.key.group
        mine = eg_encrypt(self.key.pk, rc.element(group), group.random_scalar(self.rng))
        res = run_pet(self.tellers, self.key, enc_rc, mine, pet_context(self.election_id, row), self.rng)
        return res.equal, mine, res

    def suppress(self, voter_index: int, fake: AlphaTerm) -> None:
        """Authenticated request from a coerced voter: deliver ``fake`` instead of the real alpha."""
        self._suppressed[voter_index] = AlphaTerm(voter_index, fake.alpha)

    def is_suppressed(self, voter_index: int) -> bool:
        return voter_index in self._suppressed

    def notify(self, voter_index: int, gate_passed: bool, records: Sequence[AlphaShareRecord],
               postings: dict[int, CommitmentFactor], voter_pk: GroupElement,
               teller_vks: dict[int, GroupElement], base_ctx: FsContext) -> AlphaTerm:
        if not gate_passed:
            raise PetFailed(f"receipt code check failed for voter {voter_index}")
        good = [
            r for r in records
            if r.teller_id in postings and check_alpha_share(
                r, postings[r.teller_id], self.key.pk, voter_pk, teller_vks[r.teller_id],
                self.election_id, alpha_share_context(base_ctx, r.teller_id, voter_index))
        ]
        real = assemble_alpha(voter_index, good, self.key.n)
        return self._suppressed.get(voter_index, real)


def release_shares(tellers: Sequence[Teller], voter_index: int) -> list[AlphaShareRecord]:
    return [t.release_alpha_share(voter_index) for t in tellers if t.has_alpha_share(voter_index)]
