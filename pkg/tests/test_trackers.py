from __future__ import annotations

import random

import pytest

import oracles
from conftest import oracle_decrypt
from electryo.crypto.elgamal import keygen
from electryo.crypto.groups import TEST_GROUP
from electryo.errors import MissingShare, NotInRange
from electryo.mixnet import MixServer, verify_cascade
from electryo.tellers import Teller, dkg
from electryo.trackers import (
    AlphaTerm,
    assemble_alpha,
    assign_trackers,
    commitment_from_shares,
    construct_commitments,
    fake_alpha,
    open_commitment,
    retrieve_tracker,
    setup_trackers,
    verify_setup,
)
from electryo.transcript import tracker_mix_ctx
from electryo.zkp.fiat_shamir import FsContext

T = TEST_GROUP


def test_setup_trackers():
    ts = setup_trackers(5, T)
    assert ts.trackers == (1, 2, 3, 4, 5) and ts.max_n == 5
    assert [e.value for e in ts.encoded] == [pow(oracles.G, n, oracles.P) for n in range(1, 6)]
    with pytest.raises(ValueError):
        setup_trackers(1, T)


def test_assignment_is_a_permutation_of_published_trackers(honest):
    view = honest.view()
    assigned = [oracles.small_dlog(oracle_decrypt(honest, c), honest.n_voters) for c in view.assigned_trackers]
    assert sorted(assigned) == view.trackers == list(range(1, honest.n_voters + 1))
    assert verify_cascade(setup_trackers(honest.n_voters, T).initial_batch(), view.tracker_stages,
                          view.key.pk, tracker_mix_ctx(honest.eid))
    assert verify_setup(honest.bb)


def test_commitment_opens_to_assigned_tracker(honest):
    view = honest.view()
    for i, row in enumerate(view.voter_rows):
        n = oracles.small_dlog(oracle_decrypt(honest, row.enc_tracker), honest.n_voters)
        sk = honest.credentials[i].selene.sk
        alpha = honest.inbox[i].alpha.value
        opened = row.commitment.value * pow(alpha, oracles.Q - sk, oracles.P) % oracles.P
        assert opened == pow(oracles.G, n, oracles.P)
        assert honest.voter_tracker(i) == n


def test_fake_alpha_opens_to_every_tracker(honest):
    view = honest.view()
    for i in range(honest.n_voters):
        sk = honest.credentials[i].selene.sk
        C = view.voter_rows[i].commitment
        for target in view.trackers:
            assert retrieve_tracker(sk, fake_alpha(sk, C, target, i).alpha, C, honest.n_voters) == target
        assert fake_alpha(sk, C, honest.voter_tracker(i), i).alpha == honest.inbox[i].alpha


def test_random_alpha_rarely_lands_in_range():
    rng = random.Random(5)
    kp = keygen(T, rng)
    C = T.generator ** rng.randrange(T.order)
    max_n, trials = 25, 10_000
    hits = 0
    for _ in range(trials):
        try:
            retrieve_tracker(kp.sk, T.generator ** T.random_scalar(rng), C, max_n)
            hits += 1
        except NotInRange:
            pass
    lo, hi = oracles.binomial_band(trials, max_n / T.order)
    assert lo <= hits <= hi


def test_commitment_construction_matches_direct_formula():
    rng = random.Random(6)
    key, shares = dkg(3, 2, T, [random.Random(i) for i in range(3)])
    eid = b"EL-trk"
    tellers = [Teller.create(s, T, eid, rng) for s in shares]
    ts = setup_trackers(4, T)
    ctx = FsContext.for_statement(eid, "trackers", None)
    enc, stages = assign_trackers(ts, 3, [MixServer(1, rng), MixServer(2, rng)], key.pk, ctx)
    assert len(enc) == 3 and len(stages) == 2
    voters = [keygen(T, rng) for _ in range(3)]
    exps = {t.teller_id: [rng.randrange(1, T.order) for _ in voters] for t in tellers}
    secret = oracles.lagrange_secret({s.teller_id: s.secret_share for s in shares})
    _, commitments, _ = construct_commitments(tellers, key, [v.pk for v in voters], enc, ctx, rng, exponents=exps)
    for i, v in enumerate(voters):
        n = oracles.small_dlog(oracles.decrypt(secret, enc[i].a.value, enc[i].b.value), 4)
        assert commitments[i] == commitment_from_shares(v.pk, n, [exps[k][i] for k in sorted(exps)])
        alpha = T.generator ** (sum(exps[k][i] for k in exps) % T.order)
        assert open_commitment(v.sk, alpha, commitments[i]) == T.generator ** n
    with pytest.raises(ValueError):
        assign_trackers(ts, 5, [MixServer(1, rng)], key.pk, ctx)


def test_alpha_assembly_needs_every_teller(honest):
    with pytest.raises(MissingShare):
        assemble_alpha(0, [], 3)
    with pytest.raises(ValueError):
        fake_alpha(0, T.generator, 1)
    term = AlphaTerm(3, T.generator ** 5)
    assert AlphaTerm.from_wire(T, term.to_wire()) == term
