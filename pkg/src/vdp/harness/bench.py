"""Per-phase wall-clock benchmark of one protocol run.

Phases match the cost breakdown of a counting-query run: proving the private
bits, verifying them, Morra, the prover's aggregation and the verifier's
final check.  Network time is not modelled.

Client commitments are synthetic: openings follow an arithmetic progression
in the randomness, so all ``n`` commitments come from one multiplication
each instead of two exponentiations.  The check phase still multiplies the
real commitments and compares against a real ``Com(y, z)``.
"""
from __future__ import annotations

import csv
import io
import random
import statistics
import time
from dataclasses import dataclass, field, replace

from ..dp_params import PrivacyParams
from ..group import setup_group
from ..morra import MorraParticipant, run_morra
from ..protocol import (coin_slice, morra_parties, prover_adjust_and_output, prover_init, verifier_check_prover,
                        verifier_update_commitments, verify_bit_commitments)

PHASES = ("sigma_prove", "sigma_verify", "morra", "aggregate", "check")
CSV_COLUMNS = ("phase", "n", "n_b", "M", "K", "mean_ms", "std_ms")
SWEEPS = {
    "coins": ("n_b", (2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13, 2 ** 14)),
    "clients": ("n", (10 ** 3, 10 ** 4, 10 ** 5)),
    "bins": ("M", (1, 2, 4, 8, 16)),
}
# published single-exponentiation timings (8-core Apple M1), for context only
REFERENCE_EXP_US = {"Z_p*": 35.0, "curve25519": 328.0}


@dataclass
class BenchConfig:
    n: int = 1000
    n_b: int = 1024
    M: int = 1
    K: int = 1
    group_id: str = "schnorr2048"
    reps: int = 5
    budget_s: float | None = None  # wall-clock budget; cuts repetitions, never below one
    phases: tuple = PHASES
    seed: int = 0
    delta: float = 2.0 ** -10


@dataclass
class BenchRow:
    phase: str
    n: int
    n_b: int
    M: int
    K: int
    mean_ms: float
    std_ms: float
    reps: int = 0
    samples: list = field(default_factory=list, repr=False)


@dataclass
class BenchReport:
    config: BenchConfig
    rows: list = field(default_factory=list)

    def row(self, phase: str, **match) -> BenchRow:
        for r in self.rows:
            if r.phase == phase and all(getattr(r, k) == v for k, v in match.items()):
                return r
        raise KeyError(phase)

    def extend(self, other: "BenchReport"):
        self.rows.extend(other.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow((r.phase, r.n, r.n_b, r.M, r.K, f"{r.mean_ms:.3f}", f"{r.std_ms:.3f}"))
        return buf.getvalue()


def synthetic_client_data(pp, n: int, rng):
    """``n`` bit shares with commitments built incrementally: r_i = r_0 + i * step."""
    grp, q = pp.group, pp.q
    r0, step = rng.randrange(q), rng.randrange(1, q)
    xs = [rng.randrange(2) for _ in range(n)]
    h_step = grp.exp(pp.h, step)
    # multiplier to go from (x_prev, r) to (x_next, r + step), keyed by x_next - x_prev
    mult = {0: h_step, 1: grp.mul(pp.g, h_step), -1: grp.div(h_step, pp.g)}
    shares, commitments = [], []
    c = grp.mul(grp.exp(pp.h, r0), pp.g) if xs and xs[0] else grp.exp(pp.h, r0)
    r, prev = r0, xs[0] if xs else 0
    for i, x in enumerate(xs):
        if i:
            c = grp.mul(c, mult[x - prev])
            r = (r + step) % q
        shares.append((x, r))
        commitments.append(c)
        prev = x
    return shares, commitments


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, (time.perf_counter() - t0) * 1000.0


def _one_rep(pp, params, cfg: BenchConfig, clients, rng):
    K, M, n_b = cfg.K, cfg.M, params.n_b
    times = {}

    def prove():
        return {(k, m): prover_init(pp, params, clients[(k, m)][0], rng, index=k, bin=m)
                for k in range(1, K + 1) for m in range(M)}

    def verify():
        return [verify_bit_commitments(pp, msg, n_b) for _, msg in proved.values()]

    proved, times["sigma_prove"] = _timed(prove)
    if "sigma_verify" in cfg.phases:
        bad, times["sigma_verify"] = _timed(verify)
        assert all(b is None for b in bad), "honest bit proofs failed to verify"
    if "morra" in cfg.phases:
        parts = [MorraParticipant(pp, p, K * M * n_b, rng) for p in morra_parties(K)]
        coins, times["morra"] = _timed(lambda: run_morra(pp, parts, K * M * n_b).bits)
    else:
        coins = tuple(rng.randrange(2) for _ in range(K * M * n_b))

    def agg():
        return {key: prover_adjust_and_output(replace(state, phase="committed"),
                                              coin_slice(coins, key[0], key[1], M, n_b))
                for key, (state, _) in proved.items()}

    def check():
        ok = True
        for (k, m), (_, msg) in proved.items():
            updated = verifier_update_commitments(pp, msg.commitments, coin_slice(coins, k, m, M, n_b))
            out = outputs[(k, m)]
            ok &= verifier_check_prover(pp, clients[(k, m)][1], updated, out.y, out.z)
        return ok

    outputs, times["aggregate"] = _timed(agg)
    ok, times["check"] = _timed(check)
    assert ok, "honest output failed the verifier check"
    return {p: t for p, t in times.items() if p in cfg.phases}


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    pp = setup_group(cfg.group_id)
    params = PrivacyParams.from_coins(cfg.n_b, cfg.delta)
    rng = random.Random(f"vdp-bench/{cfg.seed}")
    clients = {(k, m): synthetic_client_data(pp, cfg.n, rng)
               for k in range(1, cfg.K + 1) for m in range(cfg.M)}
    samples = {p: [] for p in cfg.phases}
    start = time.perf_counter()
    for rep in range(max(1, cfg.reps)):
        for p, t in _one_rep(pp, params, cfg, clients, rng).items():
            samples[p].append(t)
        spent = time.perf_counter() - start
        if cfg.budget_s is not None and spent * (rep + 2) / (rep + 1) > cfg.budget_s:
            break
    report = BenchReport(cfg)
    for p in cfg.phases:
        xs = samples[p]
        report.rows.append(BenchRow(p, cfg.n, cfg.n_b, cfg.M, cfg.K, statistics.fmean(xs),
                                    statistics.stdev(xs) if len(xs) > 1 else 0.0, len(xs), xs))
    return report


def run_sweep(kind: str, base: BenchConfig, values=None) -> BenchReport:
    try:
        attr, default = SWEEPS[kind]
    except KeyError:
        raise ValueError(f"unknown sweep {kind!r}; choose from {', '.join(SWEEPS)}") from None
    report = BenchReport(base)
    values = default if values is None else values
    for v in values:
        budget = None if base.budget_s is None else base.budget_s / len(values)
        report.extend(run_benchmark(replace(base, **{attr: v}, budget_s=budget)))
    return report


def linear_fit_r2(xs, ys) -> float:
    from scipy.stats import linregress
    return linregress(xs, ys).rvalue ** 2


def exponentiation_timing(group_id: str, trials: int = 200, seed: int = 0) -> float:
    """Mean microseconds for one ``h^k`` with a uniform exponent."""
    pp = setup_group(group_id)
    rng = random.Random(seed)
    ks = [rng.randrange(pp.q) for _ in range(trials)]
    exp, h = pp.group.exp, pp.h
    t0 = time.perf_counter()
    for k in ks:
        exp(h, k)
    return (time.perf_counter() - t0) / trials * 1e6


def exponentiation_report(group_ids=("schnorr2048", "ristretto255"), trials: int = 200) -> str:
    lines = []
    for gid in group_ids:
        ref_key = "curve25519" if gid == "ristretto255" else "Z_p*"
        us = exponentiation_timing(gid, trials)
        lines.append(f"exp[{gid}] = {us:.1f} us (reference {ref_key}: {REFERENCE_EXP_US[ref_key]:.0f} us, "
                     f"ratio {us / REFERENCE_EXP_US[ref_key]:.2f}x)")
    return "\n".join(lines)
