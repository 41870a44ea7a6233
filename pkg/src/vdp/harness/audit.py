"""Empirical (epsilon, delta) audit of the released count.

Runs the mechanism many times on two neighbouring datasets, histograms the
released values and reports the largest privacy loss seen on one-sided
threshold sets ``{y >= t}`` and ``{y <= t}``:

    eps_hat = max over T and both orderings of ln((P_A[T] - delta) / P_B[T])

For a shift-by-one between two binomials these tail sets are where the loss
concentrates, so the plug-in value is a lower bound on the true epsilon
and should sit below the analytic one.
"""
from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from ..dp_params import lift
from ..group import setup_group
from ..morra import morra_combine, scalar_to_bit
from ..protocol import adjust_bits
from .session import SessionConfig, run_session

MIN_TRIALS = 10_000
MECHANISMS = ("protocol", "noise", "ideal")


class InsufficientTrials(ValueError):
    pass


@dataclass
class AuditReport:
    epsilon_hat: float
    epsilon: float
    delta: float
    n_b: int
    K: int
    trials: int
    mechanism: str
    worst_set: str | None
    hist_a: dict = field(default_factory=dict)
    hist_b: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.epsilon_hat <= self.epsilon

    def summary(self) -> str:
        return (f"eps_hat={self.epsilon_hat:.4f} eps={self.epsilon:.4f} delta={self.delta:.6g} "
                f"n_b={self.n_b} K={self.K} trials={self.trials} mechanism={self.mechanism} "
                f"worst={self.worst_set} -> {'PASS' if self.passed else 'FAIL'}")

    def to_text(self) -> str:
        lines = [self.summary(), "y count_X count_X'"]
        for y in sorted(set(self.hist_a) | set(self.hist_b)):
            lines.append(f"{y} {self.hist_a.get(y, 0)} {self.hist_b.get(y, 0)}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"epsilon_hat": self.epsilon_hat, "epsilon": self.epsilon, "delta": self.delta,
                "n_b": self.n_b, "K": self.K, "trials": self.trials, "mechanism": self.mechanism,
                "worst_set": self.worst_set, "passed": self.passed,
                "histogram": {"X": {str(k): v for k, v in sorted(self.hist_a.items())},
                              "X_neighbor": {str(k): v for k, v in sorted(self.hist_b.items())}}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _tail_probs(hist: Counter, support, trials: int):
    counts = np.array([hist.get(y, 0) for y in support], dtype=float)
    ge = np.cumsum(counts[::-1])[::-1] / trials  # P[y >= support[i]]
    le = np.cumsum(counts) / trials              # P[y <= support[i]]
    return ge, le


def estimate_epsilon(hist_a: Counter, hist_b: Counter, trials: int, delta: float):
    """Plug-in estimate over one-sided threshold sets; returns (eps_hat, description)."""
    support = sorted(set(hist_a) | set(hist_b))
    ge_a, le_a = _tail_probs(hist_a, support, trials)
    ge_b, le_b = _tail_probs(hist_b, support, trials)
    best, where = 0.0, None
    for name_a, name_b, pa_all, pb_all, kind in (
        ("X", "X'", ge_a, ge_b, ">="), ("X", "X'", le_a, le_b, "<="),
        ("X'", "X", ge_b, ge_a, ">="), ("X'", "X", le_b, le_a, "<="),
    ):
        for t, pa, pb in zip(support, pa_all, pb_all):
            num = pa - delta
            if num <= 0:
                continue
            val = math.inf if pb == 0 else math.log(num / pb)
            if val > best:
                best, where = val, f"P_{name_a}[y {kind} {t}] vs P_{name_b}"
    return best, where


def _noise_trial(q: int, n_b: int, K: int, rng) -> int:
    """The protocol's noise path without the proofs: Morra coins XOR private bits."""
    parties = [[rng.randrange(q) for _ in range(K * n_b)] for _ in range(K + 1)]
    coins = [scalar_to_bit(q, morra_combine(vals, q)) for vals in zip(*parties)]
    total = 0
    for k in range(K):
        v = [rng.randrange(2) for _ in range(n_b)]
        total += sum(adjust_bits(v, coins[k * n_b:(k + 1) * n_b]))
    return total


def _sample(config: SessionConfig, X, trials: int, mechanism: str, seed: int) -> Counter:
    params = config.privacy_params()
    q = setup_group(config.group_id).q
    n_b, K = params.n_b, config.K
    true_sum = sum(X)
    hist = Counter()
    if mechanism == "protocol":
        base = replace(config, n=len(X), inputs=list(X))
        for t in range(trials):
            tr = run_session(replace(base, seed=f"{seed}/{t}"))
            if not tr.verdict.accepted:
                raise RuntimeError(f"honest audit session rejected: {tr.verdict.reason}")
            hist[lift(tr.verdict.aggregate[0][0], q)] += 1
    elif mechanism == "noise":
        rng = random.Random(f"vdp-audit/{seed}")
        for _ in range(trials):
            hist[true_sum + _noise_trial(q, n_b, K, rng)] += 1
    elif mechanism == "ideal":
        gen = np.random.default_rng([0x5EED, seed])
        ys = true_sum + gen.binomial(n_b, 0.5, size=(trials, K)).sum(axis=1)
        hist.update(int(y) for y in ys)
    else:
        raise ValueError(f"unknown mechanism {mechanism!r}; choose from {MECHANISMS}")
    return hist


def audit_privacy(config: SessionConfig, X, X_neighbor, trials: int, mechanism: str = "noise",
                  seed: int = 0, min_trials: int = MIN_TRIALS) -> AuditReport:
    """Estimate epsilon for counting-query inputs ``X`` (0/1 list) and a neighbour.

    ``mechanism`` picks what is sampled: ``"protocol"`` runs full sessions
    (proofs included, slow), ``"noise"`` runs only the coin-generation path
    of the protocol, and ``"ideal"`` draws from the ideal functionality.
    """
    if trials < min_trials:
        raise InsufficientTrials(f"{trials} trials requested; at least {min_trials} are needed "
                                 "to resolve tail probabilities near delta")
    if len(X) != len(X_neighbor) or sum(a != b for a, b in zip(X, X_neighbor)) > 1:
        raise ValueError("X and X_neighbor must differ in at most one client's input")
    if config.M != 1:
        raise ValueError("the audit covers counting queries (M = 1)")
    params = config.privacy_params()
    hist_a = _sample(config, X, trials, mechanism, seed)
    hist_b = _sample(config, X_neighbor, trials, mechanism, seed + 1)
    eps_hat, worst = estimate_epsilon(hist_a, hist_b, trials, params.delta)
    return AuditReport(eps_hat, params.epsilon, params.delta, params.n_b, config.K, trials, mechanism, worst,
                       dict(hist_a), dict(hist_b))
