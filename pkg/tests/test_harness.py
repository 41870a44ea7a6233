import math
import random
from collections import Counter

import pytest
from scipy.stats import binomtest, chi2_contingency

from vdp.dp_params import FieldTooSmall, ResultTooSmall
from vdp.harness import (AdversarySpec, BenchConfig, ConfigError, InsufficientTrials, SessionConfig, audit_privacy,
                         expected_blame, run_benchmark, run_session, run_sweep, sketch_session)
from vdp.harness.audit import estimate_epsilon
from vdp.harness.bench import CSV_COLUMNS, PHASES, exponentiation_timing, linear_fit_r2, synthetic_client_data
from vdp.harness.session import BEHAVIORS, CLIENT_BEHAVIORS, PROVER_BEHAVIORS, VERIFIER_BEHAVIORS
from vdp.group import commit, setup_group
from vdp.transcript import SessionTranscript, verify_session

SMALL = dict(K=2, n=5, n_b=31, group_id="toy61")


# ---------------------------------------------------------------- sessions
def test_seed_fixes_transcript():
    a = run_session(SessionConfig(**SMALL, seed=4)).to_json()
    b = run_session(SessionConfig(**SMALL, seed=4)).to_json()
    c = run_session(SessionConfig(**SMALL, seed=5)).to_json()
    assert a == b != c


def test_unseeded_sessions_differ_but_verify():
    a, b = run_session(SessionConfig(**SMALL)), run_session(SessionConfig(**SMALL))
    assert a.session_id != b.session_id
    assert verify_session(a).accepted and verify_session(b).accepted


@pytest.mark.parametrize("K,M", [(1, 1), (3, 1), (2, 4), (1, 3)])
def test_honest_shapes(K, M):
    t = run_session(SessionConfig(K=K, n=6, M=M, n_b=31, group_id="toy16", seed=K * 10 + M))
    assert t.verdict.accepted and len(t.verdict.aggregate) == M
    assert verify_session(SessionTranscript.from_json(t.to_json())).accepted


def test_estimate_tracks_true_count():
    xs = [1] * 30 + [0] * 20
    errs = []
    for s in range(20):
        t = run_session(SessionConfig(K=2, n=50, n_b=64, group_id="toy61", seed=s, inputs=xs))
        errs.append(t.verdict.aggregate[0][1] - 30)
    assert abs(sum(errs) / len(errs)) < 3  # noise std is sqrt(2*64/4) ~ 5.7 per run


def test_explicit_histogram_inputs():
    xs = [[1, 0, 0]] * 4 + [[0, 0, 1]] * 2
    t = run_session(SessionConfig(K=2, n=6, M=3, n_b=31, group_id="toy61", seed=1, inputs=xs))
    assert t.verdict.accepted


@pytest.mark.parametrize("adv,phase", [
    ("prover1:tamper_output", "output_check"),
    ("prover2:tamper_output", "output_check"),
    ("prover1:nonbit_commitment", "bit_proofs"),
    ("prover2:morra_misreveal", "morra"),
    ("verifier:morra_misreveal", "morra"),
    ("prover1:morra_silent", "morra"),
    ("verifier:morra_silent", "morra"),
    ("prover2:exclude_client=3", "output_check"),
    ("prover1:drop_out", "output_check"),
    ("client2:collude_illegal_input", "client_validation"),
])
def test_adversaries_detected_with_blame(adv, phase):
    spec = AdversarySpec.parse(adv)
    t = run_session(SessionConfig(**SMALL, seed=8), [spec])
    v = t.verdict
    assert not v.accepted and v.phase == phase
    assert expected_blame(spec) in v.blame
    assert verify_session(SessionTranscript.from_json(t.to_json())).same_as(v)


def test_collusion_rejects_client_but_releases():
    v = run_session(SessionConfig(**SMALL, seed=3, M=3), ["client1:collude_illegal_input"]).verdict
    assert v.released and v.blame == ("client:1",)
    assert not v.clients["client:1"].accepted
    assert v.aggregate is not None


def test_morra_adaptive_is_accepted_and_unbiased():
    for spec in ("prover1:morra_adaptive", "verifier:morra_adaptive"):
        v = run_session(SessionConfig(**SMALL, seed=1), [spec]).verdict
        assert v.accepted and expected_blame(AdversarySpec.parse(spec)) is None
    ones = total = 0
    for s in range(40):
        t = run_session(SessionConfig(**SMALL, seed=s), ["prover1:morra_adaptive", "verifier:morra_adaptive"])
        reveals = [m.body for m in t.messages if m.phase == "MORRA_REVEAL"]
        q = t.pp.q
        for col in zip(*(r.values for r in reveals)):
            ones += (sum(col) % q) > (q + 1) // 2
            total += 1
    assert binomtest(ones, total, 0.5).pvalue > 0.001


def test_adversary_spec_parsing():
    s = AdversarySpec.parse("prover2:exclude_client=3")
    assert (s.role, s.index, s.behavior, s.target, s.party) == ("prover", 2, "exclude_client", 3, "prover:2")
    assert AdversarySpec.parse("verifier:morra_misreveal").party == "verifier"
    assert AdversarySpec.parse("client0:collude_illegal_input").party == "client:0"
    for bad in ("prover1", "wizard1:honest", "prover1:fly", "prover:tamper_output", "prover1:exclude_client",
                "client1:tamper_output", "prover1:exclude_client=x"):
        with pytest.raises(ConfigError):
            AdversarySpec.parse(bad)
    assert set(BEHAVIORS) >= set(PROVER_BEHAVIORS) | set(VERIFIER_BEHAVIORS) | set(CLIENT_BEHAVIORS)


def test_config_validation():
    with pytest.raises(ConfigError):
        run_session(SessionConfig(K=0, n=1, n_b=31, group_id="toy61"))
    with pytest.raises(ConfigError):
        run_session(SessionConfig(K=1, n=2, n_b=31, group_id="toy61", inputs=[1]))
    with pytest.raises(ResultTooSmall):
        SessionConfig(n_b=30).validate()
    # n + K*n_b must stay below q/2
    with pytest.raises(FieldTooSmall):
        SessionConfig(K=1, n=20, n_b=31, group_id="toy101").validate()


def test_config_epsilon_to_coins():
    assert SessionConfig(epsilon=1.0, delta=2 ** -10).privacy_params().n_b == 763
    assert SessionConfig(n_b=100).privacy_params().epsilon == pytest.approx(2.7613, abs=1e-4)


# ---------------------------------------------------------------- audit
def test_audit_requires_trials():
    with pytest.raises(InsufficientTrials):
        audit_privacy(SessionConfig(K=1, n_b=100, group_id="toy61"), [1], [0], 100)


def test_audit_rejects_non_neighbours():
    with pytest.raises(ValueError):
        audit_privacy(SessionConfig(K=1, n_b=100, group_id="toy61"), [1, 1], [0, 0], 10_000)


def test_estimator_oracle():
    # P_A = {0: .5, 1: .5}, P_B = {0: .75, 1: .25}: worst set is {y >= 1}: ln((.5 - d)/.25)
    a, b = Counter({0: 50, 1: 50}), Counter({0: 75, 1: 25})
    eps, where = estimate_epsilon(a, b, 100, 0.01)
    assert eps == pytest.approx(math.log(0.49 / 0.25))
    assert where == "P_X[y >= 1] vs P_X'"


def test_audit_identical_inputs_near_zero():
    r = audit_privacy(SessionConfig(K=1, n_b=100, group_id="toy61"), [1, 0], [1, 0], 100_000, mechanism="ideal")
    assert r.epsilon_hat < 0.05


def test_audit_decreases_with_coins():
    a = audit_privacy(SessionConfig(K=1, n_b=100, group_id="toy61"), [1], [0], 200_000, mechanism="ideal")
    b = audit_privacy(SessionConfig(K=1, n_b=200, group_id="toy61"), [1], [0], 200_000, mechanism="ideal")
    assert b.epsilon_hat < a.epsilon_hat < a.epsilon


def test_audit_noise_path_matches_protocol():
    """The noise-only path and full sessions give the same output distribution."""
    cfg = SessionConfig(K=1, n_b=40, group_id="toy61")
    p = audit_privacy(cfg, [1, 0], [0, 0], 600, mechanism="protocol", min_trials=600)
    n = audit_privacy(cfg, [1, 0], [0, 0], 6000, mechanism="noise", min_trials=600)

    def binned(h):
        return [sum(c for y, c in h.items() if y < 19), sum(c for y, c in h.items() if 19 <= y < 22),
                sum(c for y, c in h.items() if y >= 22)]
    assert chi2_contingency([binned(p.hist_a), binned(n.hist_a)])[1] > 0.001
    assert "eps_hat" in p.to_text() and p.to_dict()["mechanism"] == "protocol"


# ---------------------------------------------------------------- bench
def test_synthetic_clients_open_correctly():
    pp = setup_group("toy61")
    shares, comms = synthetic_client_data(pp, 50, random.Random(0))
    assert all(commit(pp, x, r) == c for (x, r), c in zip(shares, comms))


def test_bench_rows_and_csv():
    rep = run_benchmark(BenchConfig(n=50, n_b=32, K=2, M=2, group_id="toy61", reps=5))
    assert [r.phase for r in rep.rows] == list(PHASES)
    assert all(r.reps == 5 and r.mean_ms > 0 for r in rep.rows)
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 6
    assert lines[1].startswith("sigma_prove,50,32,2,2,")


def test_bench_budget_cuts_repetitions():
    rep = run_benchmark(BenchConfig(n=100, n_b=512, group_id="toy61", reps=50, budget_s=0.3))
    assert 1 <= rep.rows[0].reps < 50


def test_sweep_and_fit():
    rep = run_sweep("coins", BenchConfig(n=10, group_id="toy61", reps=2, phases=("sigma_prove",)),
                    values=(64, 128, 256))
    assert [r.n_b for r in rep.rows] == [64, 128, 256]
    with pytest.raises(ValueError):
        run_sweep("planets", BenchConfig())
    assert linear_fit_r2([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert exponentiation_timing("toy61", trials=10) > 0


# ---------------------------------------------------------------- sketch baseline
def test_sketch_honest_run_is_correct():
    ins = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 0]]
    out = sketch_session(ins, 3, rng=random.Random(1))
    assert out.accepted == [0, 1, 2, 3] and out.aggregate == [1, 2, 1] and not out.attack_succeeded


def test_sketch_rejects_illegal_without_collusion():
    ins = [[1, 0], [3, 0], [1, 1]]
    out = sketch_session(ins, 2, rng=random.Random(2))
    assert out.accepted == [0]


@pytest.mark.parametrize("attack,inputs", [("ignore_input", [[1, 0], [0, 1], [0, 1]]),
                                           ("collude_illegal_input", [[1, 0], [0, 1], [9, 0]])])
def test_sketch_attacks_go_unnoticed(attack, inputs):
    wins = sum(sketch_session(inputs, 2, attack=attack, target=1 if attack == "ignore_input" else 2,
                              rng=random.Random(s)).attack_succeeded for s in range(50))
    assert wins == 50
