from .elgamal import (
    Ciphertext,
    ElGamalKeyPair,
    eg_decrypt,
    eg_encrypt,
    eg_reencrypt,
    exp_decode,
    exp_encode,
    keygen,
)
from .groups import GROUPS, PROD_GROUP, TEST_GROUP, Group, GroupElement, get_group
from .rcca import (
    RccaCiphertext,
    binding_for,
    layout_for,
    rcca_decrypt,
    rcca_encrypt,
    rcca_reencrypt,
    rcca_reencrypt_with,
)
from .schnorr import Signature, SigningKeyPair, sign, signing_keygen, verify_sig

__all__ = [
    "Ciphertext", "ElGamalKeyPair", "eg_decrypt", "eg_encrypt", "eg_reencrypt",
    "exp_decode", "exp_encode", "keygen", "GROUPS", "PROD_GROUP", "TEST_GROUP",
    "Group", "GroupElement", "get_group", "RccaCiphertext", "binding_for",
    "layout_for", "rcca_decrypt", "rcca_encrypt", "rcca_reencrypt",
    "rcca_reencrypt_with", "Signature", "SigningKeyPair", "sign",
    "signing_keygen", "verify_sig",
]
