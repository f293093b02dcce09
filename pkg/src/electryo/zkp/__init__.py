from .fiat_shamir import FsContext, fs_challenge
from .sigma import (
    DisjunctiveProof,
    DleqProof,
    LinearProof,
    PokProof,
    ReencLinkProof,
    prove_dleq,
    prove_dleq_multi,
    prove_linear,
    prove_pok,
    prove_reenc_link,
    prove_vote,
    verify_dleq,
    verify_dleq_multi,
    verify_linear,
    verify_pok,
    verify_reenc_link,
    verify_vote,
)
