from __future__ import annotations

import dataclasses
import random

import pytest

import oracles
from electryo.crypto.elgamal import eg_decrypt, eg_encrypt, keygen
from electryo.crypto.groups import PROD_GROUP, TEST_GROUP
from electryo.crypto.rcca import rcca_decrypt
from electryo.crypto.schnorr import Signature, verify_sig
from electryo.errors import (
    AlreadyVoted,
    InvalidCardOutput,
    InvalidReceiptCode,
    NotOnRoll,
    PetFailed,
    UnfilledBallot,
)
from electryo.roles import (
    QR_V6_BITS,
    QR_V10_BITS,
    TRA,
    CardOutput,
    Clerk,
    Printer,
    ReceiptCode,
    Scanner,
    ScannerFault,
    ScannerTuple,
    VoterCredential,
    card_issue,
    damm_check,
    signature_message,
    verify_scanner_tuple,
    vote_element,
    voter_id_for,
)
from electryo.tellers import Teller, dkg
from electryo.trackers import AlphaTerm

T = TEST_GROUP
EID = b"EL-roles"


def station(group=T, seed=0):
    rng = random.Random(seed)
    kp = keygen(group, rng)
    cred = VoterCredential.create(voter_id_for(3), group, rng)
    return rng, kp, cred


def test_clerk_roll_and_attendance():
    clerk = Clerk([voter_id_for(i) for i in range(3)])
    assert clerk.register(voter_id_for(1)) == 0
    assert clerk.attended(voter_id_for(1)) and not clerk.attended(voter_id_for(0))
    with pytest.raises(AlreadyVoted):
        clerk.register(voter_id_for(1))
    with pytest.raises(NotOnRoll):
        clerk.register(b"V9999999")


def test_card_output_decrypts_to_id_and_valid_signature():
    rng, kp, cred = station()
    card = card_issue(cred, EID, kp.pk, rng)
    assert rcca_decrypt(kp.sk, card.enc_id) == cred.voter_id
    sig = Signature.from_bytes(T, rcca_decrypt(kp.sk, card.enc_sig))
    assert verify_sig(cred.signing.vk, signature_message(cred.voter_id, EID), sig)
    assert not verify_sig(cred.signing.vk, signature_message(cred.voter_id, b"EL-other"), sig)


def test_forged_card_signature_fails_under_voter_key():
    rng, kp, cred = station()
    card = card_issue(cred, EID, kp.pk, rng, forge=True)
    sig = Signature.from_bytes(T, rcca_decrypt(kp.sk, card.enc_sig))
    assert not verify_sig(cred.signing.vk, signature_message(cred.voter_id, EID), sig)


def test_signature_extra_fields_are_bound():
    rng, kp, cred = station()
    card = card_issue(cred, EID, kp.pk, rng, extra=b"2026-10-16|station-4")
    sig = Signature.from_bytes(T, rcca_decrypt(kp.sk, card.enc_sig))
    assert verify_sig(cred.signing.vk, signature_message(cred.voter_id, EID, b"2026-10-16|station-4"), sig)
    assert not verify_sig(cred.signing.vk, signature_message(cred.voter_id, EID), sig)


@pytest.mark.parametrize("group", [T, PROD_GROUP], ids=["test", "prod"])
def test_printer_rerandomises_and_fits_qr(group):
    rng, kp, cred = station(group, 1)
    card = card_issue(cred, EID, kp.pk, rng)
    paper = Printer(kp.pk, EID, rng).print_ballot(card)
    code = paper.ballot_code
    assert code.enc_id != card.enc_id and rcca_decrypt(kp.sk, code.enc_id) == cred.voter_id
    id_bits, sig_bits = code.component_bits()
    assert id_bits <= QR_V6_BITS and sig_bits <= QR_V6_BITS and id_bits + sig_bits <= QR_V10_BITS
    assert code.fits_qr()
    assert type(code).from_elements(code.elements(), EID) == code
    assert type(code).from_wire(group, code.to_wire()) == code


def test_prod_ballot_code_component_sizes():
    rng, kp, cred = station(PROD_GROUP, 2)
    code = Printer(kp.pk, EID, rng).print_ballot(card_issue(cred, EID, kp.pk, rng)).ballot_code
    # two pairs of 33-byte points per component
    assert code.component_bits() == (4 * 33 * 8, 4 * 33 * 8)


def test_printer_rejects_malformed_card():
    rng, kp, cred = station()
    card = card_issue(cred, EID, kp.pk, rng)
    with pytest.raises(InvalidCardOutput):
        Printer(kp.pk, EID, rng).print_ballot(CardOutput(card.enc_sig, card.enc_id))
    with pytest.raises(InvalidCardOutput):
        Printer(kp.pk, b"EL-other", rng).print_ballot(card)


def test_damm_check_digit_agrees_with_oracle():
    assert damm_check("572") == oracles.damm("572") == 4
    rng = random.Random(3)
    for _ in range(200):
        d = "".join(str(rng.randrange(10)) for _ in range(5))
        assert damm_check(d) == oracles.damm(d)
        assert damm_check(d + str(damm_check(d))) == 0


def test_damm_catches_single_errors_and_transpositions():
    code = str(ReceiptCode.generate(random.Random(4)))
    for pos in range(6):
        for digit in "0123456789":
            if digit != code[pos]:
                with pytest.raises(InvalidReceiptCode):
                    ReceiptCode.parse(code[:pos] + digit + code[pos + 1:])
    for pos in range(5):
        if code[pos] != code[pos + 1]:
            swapped = code[:pos] + code[pos + 1] + code[pos] + code[pos + 2:]
            with pytest.raises(InvalidReceiptCode):
                ReceiptCode.parse(swapped)


def test_receipt_code_parsing():
    rc = ReceiptCode.parse(" 57241" + str(oracles.damm("57241")) + " ")
    assert rc.digits == "57241" and rc.check == oracles.damm("57241")
    assert ReceiptCode.parse(str(rc)) == rc
    for bad in ("12345", "1234567", "12a456", ""):
        with pytest.raises(InvalidReceiptCode):
            ReceiptCode.parse(bad)
    assert rc.element(T) == T.generator ** rc.value


def scan_one(vote=1, fault=None, seed=5):
    rng, kp, cred = station(seed=seed)
    paper = Printer(kp.pk, EID, rng).print_ballot(card_issue(cred, EID, kp.pk, rng)).fill(vote)
    scanner = Scanner(kp.pk, EID, 3, random.Random(seed + 100))
    tup, rc = scanner.scan(paper, fault)
    return kp, cred, paper, tup, rc


def test_scanner_tuple_contents_and_proofs():
    kp, cred, paper, tup, rc = scan_one(vote=2)
    assert verify_scanner_tuple(tup, kp.pk, 3, EID) == (True, "")
    assert eg_decrypt(kp.sk, tup.enc_vote) == vote_element(T, 2)
    assert eg_decrypt(kp.sk, tup.enc_rc) == rc.element(T)
    assert rcca_decrypt(kp.sk, tup.enc_id) == cred.voter_id
    printed = paper.ballot_code.elements()
    assert [eg_decrypt(kp.sk, c) for c in tup.enc_ballot_code] == printed
    assert ScannerTuple.from_wire(T, tup.to_wire()) == tup
    assert len(tup.mix_row()) == 2 + len(printed) + 2


def test_scanner_tuple_tampering_detected():
    kp, _, _, tup, _ = scan_one()
    other = scan_one(seed=6)[3]
    assert not verify_scanner_tuple(dataclasses.replace(tup, enc_vote=other.enc_vote), kp.pk, 3, EID)[0]
    assert not verify_scanner_tuple(dataclasses.replace(tup, enc_rc=other.enc_rc), kp.pk, 3, EID)[0]
    code = list(tup.enc_ballot_code)
    code[0], code[1] = code[1], code[0]
    assert not verify_scanner_tuple(dataclasses.replace(tup, enc_ballot_code=tuple(code)), kp.pk, 3, EID)[0]
    assert not verify_scanner_tuple(tup, kp.pk, 3, b"EL-other")[0]


def test_scanner_faults():
    kp, _, paper, tup, _ = scan_one(vote=0, fault=ScannerFault(flip_to=2))
    assert paper.vote == 0 and eg_decrypt(kp.sk, tup.enc_vote) == vote_element(T, 2)
    assert verify_scanner_tuple(tup, kp.pk, 3, EID)[0]
    with pytest.raises(UnfilledBallot):
        Scanner(kp.pk, EID, 3, random.Random(0)).scan(dataclasses.replace(paper, vote=None))
    with pytest.raises(ValueError):
        paper.fill(1)


def test_receipt_code_does_not_depend_on_vote():
    codes = {str(scan_one(vote=v, seed=7)[4]) for v in range(3)}
    assert len(codes) == 1


@pytest.fixture(scope="module")
def tra_setup():
    key, shares = dkg(3, 2, T, [random.Random(i) for i in range(3)])
    rng = random.Random(11)
    tellers = [Teller.create(s, T, EID, rng) for s in shares]
    return key, tellers, TRA(key, tellers, EID, rng)


def test_tra_gate_accepts_only_the_right_code(tra_setup):
    key, tellers, tra = tra_setup
    rc = ReceiptCode.generate(random.Random(12))
    posted = eg_encrypt(key.pk, rc.element(T), 999)
    ok, mine, pet = tra.gate(str(rc), posted, 0)
    assert ok and pet.equal and eg_encrypt(key.pk, rc.element(T), 0).b != mine.b
    wrong = ReceiptCode.generate(random.Random(13))
    assert str(wrong) != str(rc)
    assert not tra.gate(str(wrong), posted, 0)[0]
    with pytest.raises(InvalidReceiptCode):
        tra.gate("000001", posted, 0)


def test_tra_notify_refuses_without_gate_and_honours_suppression(tra_setup):
    key, tellers, tra = tra_setup
    with pytest.raises(PetFailed):
        tra.notify(0, False, [], {}, T.generator, {}, None)
    fake = AlphaTerm(4, T.generator ** 3)
    tra.suppress(4, fake)
    assert tra.is_suppressed(4) and not tra.is_suppressed(5)
