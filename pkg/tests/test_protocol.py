import random
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from vdp.dp_params import PrivacyParams
from vdp.group import commit, one_minus, setup_group
from vdp.morra import AbortWithBlame, MorraParticipant
from vdp.protocol import (BIT_COMMIT, CLIENT, MORRA_COMMIT, OUTPUT, PhaseError, ProverOutput, SessionVerifier,
                          Undecodable, adjust_bits, aggregate, coin_slice, morra_parties, prover_adjust_and_output,
                          prover_init, prover_name, update_commitment, verifier_check_prover,
                          verifier_update_commitments, verify_bit_commitments)
from vdp.shares import build_client_submission

PARAMS = PrivacyParams.from_coins(40, 2 ** -10)


def _client_data(pp, xs, rng, k=0, K=1):
    subs = [build_client_submission(pp, x, K, rng, str(i)) for i, x in enumerate(xs)]
    shares = [s.private[k][0] for s in subs]
    comms = [s.broadcast.commitments[0][k] for s in subs]
    return shares, comms


@given(bits=st.lists(st.integers(0, 1), min_size=40, max_size=40), seed=st.integers(0, 2 ** 32))
def test_honest_prover_passes_check(bits, seed):
    pp = setup_group("toy61")
    rng = random.Random(seed)
    shares, comms = _client_data(pp, [1, 0, 1, 1], rng)
    state, msg = prover_init(pp, PARAMS, shares, rng)
    assert verify_bit_commitments(pp, msg, 40) is None
    out = prover_adjust_and_output(state, bits)
    updated = verifier_update_commitments(pp, msg.commitments, bits)
    assert verifier_check_prover(pp, comms, updated, out.y, out.z)
    assert out.y == 3 + sum(adjust_bits(state.v, bits))


def test_all_groups_round_trip(any_pp, rng):
    shares, comms = _client_data(any_pp, [1, 1, 0], rng)
    state, msg = prover_init(any_pp, PARAMS, shares, rng)
    bits = [rng.randrange(2) for _ in range(40)]
    out = prover_adjust_and_output(state, bits)
    assert verifier_check_prover(any_pp, comms, verifier_update_commitments(any_pp, msg.commitments, bits),
                                 out.y, out.z)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), max_size=50))
def test_adjust_is_xor(pairs):
    v = [a for a, _ in pairs]
    b = [c for _, c in pairs]
    assert adjust_bits(v, b) == [x ^ y for x, y in pairs]


def test_flipped_commitment_randomness_is_negated(pp, rng):
    s = rng.randrange(pp.q)
    for v in (0, 1):
        assert update_commitment(pp, commit(pp, v, s), 1) == commit(pp, 1 - v, -s)
        assert update_commitment(pp, commit(pp, v, s), 0) == commit(pp, v, s)
        assert one_minus(pp, commit(pp, v, s)) == commit(pp, 1 - v, -s)


def test_unadjusted_z_fails_when_a_coin_is_one(toy, rng):
    """Summing s_j without the sign flip breaks the check as soon as any b_j = 1."""
    shares, comms = _client_data(toy, [1], rng)
    state, msg = prover_init(toy, PARAMS, shares, rng)
    bits = [0] * 40
    bits[3] = 1
    out = prover_adjust_and_output(state, bits)
    naive_z = (sum(r for _, r in shares) + sum(state.s)) % toy.q
    updated = verifier_update_commitments(toy, msg.commitments, bits)
    assert verifier_check_prover(toy, comms, updated, out.y, out.z)
    assert not verifier_check_prover(toy, comms, updated, out.y, naive_z)


@pytest.mark.parametrize("dy,dz", [(1, 0), (0, 1), (-1, 5)])
def test_tampered_output_fails(pp, rng, dy, dz):
    shares, comms = _client_data(pp, [1, 0], rng)
    state, msg = prover_init(pp, PARAMS, shares, rng)
    bits = [rng.randrange(2) for _ in range(40)]
    out = prover_adjust_and_output(state, bits)
    updated = verifier_update_commitments(pp, msg.commitments, bits)
    assert not verifier_check_prover(pp, comms, updated, (out.y + dy) % pp.q, (out.z + dz) % pp.q)


def test_dropping_a_client_fails(toy, rng):
    shares, comms = _client_data(toy, [1, 1, 0, 1], rng)
    state, msg = prover_init(toy, PARAMS, shares[:2] + shares[3:], rng)
    bits = [0] * 40
    out = prover_adjust_and_output(state, bits)
    assert not verifier_check_prover(toy, comms, list(msg.commitments), out.y, out.z)


def test_prover_phase_errors(toy, rng):
    state, _ = prover_init(toy, PARAMS, [], rng)
    with pytest.raises(PhaseError):
        prover_adjust_and_output(state, [0] * 39)
    prover_adjust_and_output(state, [0] * 40)
    with pytest.raises(PhaseError):
        prover_adjust_and_output(state, [0] * 40)


def test_verify_bit_commitments_reports_index(toy, rng):
    _, msg = prover_init(toy, PARAMS, [], rng)
    assert verify_bit_commitments(toy, msg, 40) is None
    bad = replace(msg, commitments=msg.commitments[:7] + (commit(toy, 2, 1),) + msg.commitments[8:])
    assert verify_bit_commitments(toy, bad, 40) == 7
    assert verify_bit_commitments(toy, replace(msg, proofs=msg.proofs[:-1]), 40) == -1
    # proofs are bound to the prover index and the bin
    assert verify_bit_commitments(toy, replace(msg, prover=2), 40) == 0
    assert verify_bit_commitments(toy, replace(msg, bin=1), 40) == 0


def test_aggregate():
    outs = [ProverOutput(1, 0, 10, 0), ProverOutput(2, 0, 20, 0)]
    y, est = aggregate(outs, PARAMS, 2, 101)
    assert y == 30 and est == 30 - 40
    with pytest.raises(AbortWithBlame) as exc:
        aggregate(outs[:1], PARAMS, 2, 101)
    assert exc.value.party == "prover:2"


def test_coin_slices_partition():
    K, M, n_b = 3, 2, 5
    bits = list(range(K * M * n_b))
    got = [x for k in range(1, K + 1) for m in range(M) for x in coin_slice(bits, k, m, M, n_b)]
    assert got == bits
    assert morra_parties(2) == ["prover:1", "prover:2", "verifier"]


def test_session_verifier_enforces_order(toy, rng):
    sv = SessionVerifier(toy, PARAMS, 1, 1, 1, b"")
    with pytest.raises(AbortWithBlame) as exc:
        sv.receive(BIT_COMMIT, prover_name(1), None)
    assert exc.value.party == prover_name(1)
    # once aborted it stays aborted
    with pytest.raises(AbortWithBlame):
        sv.receive(CLIENT, "client:0", None)
    v = sv.finish()
    assert not v.accepted and v.blame == (prover_name(1),)


def test_session_verifier_flow(toy, rng):
    sv = SessionVerifier(toy, PARAMS, 1, 1, 2, b"s")
    subs = [build_client_submission(toy, x, 1, rng, str(i), b"s") for i, x in enumerate([1, 0])]
    for i, s in enumerate(subs):
        sv.receive(CLIENT, f"client:{i}", s.broadcast)
    assert sv.accepted_clients() == ["client:0", "client:1"]
    state, msg = prover_init(toy, PARAMS, [s.private[0][0] for s in subs], rng, session_id=b"s")
    sv.receive(BIT_COMMIT, "prover:1", msg)
    parts = [MorraParticipant(toy, p, 40, rng) for p in morra_parties(1)]
    for p in parts:
        sv.receive(MORRA_COMMIT, p.party, p.commit([]))
    for p in reversed(parts):
        sv.receive("MORRA_REVEAL", p.party, p.reveal([]))
    out = prover_adjust_and_output(state, coin_slice(sv.coins, 1, 0, 1, 40))
    sv.receive(OUTPUT, "prover:1", out)
    v = sv.finish()
    assert v.accepted and v.released and v.aggregate[0][0] == out.y


def test_undecodable_client_is_rejected_not_fatal(toy):
    sv = SessionVerifier(toy, PARAMS, 1, 1, 1, b"")
    sv.receive(CLIENT, "client:0", Undecodable("bad"))
    assert sv.clients["client:0"].reason == "malformed bundle"
    v = sv.finish()
    assert v.phase == "bit_proofs" and v.reason == "no response"
