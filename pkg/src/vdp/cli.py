"""``vdp`` command line.

Exit codes: 0 success or accepted, 2 usage / configuration / malformed input,
3 protocol rejection (or a failed audit).
"""
from __future__ import annotations

import argparse
import json
import re
import sys

from .dp_params import PrivacyParamError, PrivacyParams
from .group import DEFAULT_GROUP_ENV, GROUP_IDS, UnsupportedSecurityLevel, default_group_id
from .transcript import MalformedTranscript, SessionTranscript, verify_session

EXIT_OK, EXIT_USAGE, EXIT_REJECT = 0, 2, 3


class UsageError(Exception):
    pass


def parse_delta(text) -> float:
    """Decimal, ``2^-10`` or ``2**-10``."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        m = re.fullmatch(r"\s*(\d+(?:\.\d*)?)\s*(?:\^|\*\*)\s*(-?\d+(?:\.\d*)?)\s*", str(text))
        try:
            value = float(m.group(1)) ** float(m.group(2)) if m else float(text)
        except (ValueError, OverflowError):
            raise argparse.ArgumentTypeError(f"cannot parse delta {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in (0, 1), got {text!r}")
    return value


def _positive_int(text) -> int:
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _privacy_from(args) -> PrivacyParams:
    if args.coins is not None:
        return PrivacyParams.from_coins(args.coins, args.delta)
    return PrivacyParams.from_epsilon(args.epsilon, args.delta)


# ---------------------------------------------------------------- params
def cmd_params(args, out) -> int:
    if args.coins is None and args.epsilon is None:
        raise UsageError("give --epsilon or --coins")
    p = _privacy_from(args)
    print(f"epsilon = {p.epsilon:.4f}", file=out)
    print(f"delta   = {p.delta:.6g}", file=out)
    print(f"n_b     = {p.n_b}", file=out)
    print(f"E|noise| ~ {p.expected_abs_noise(args.k):.2f} (K = {args.k})", file=out)
    return EXIT_OK


# ------------------------------------------------------------------- run
def cmd_run(args, out) -> int:
    from .harness import ConfigError, SessionConfig, run_session

    cfg = SessionConfig(K=args.k, n=args.n, M=args.bins, epsilon=args.epsilon if args.epsilon is not None else 1.0,
                        delta=args.delta, n_b=args.coins, group_id=args.group, seed=args.seed)
    try:
        transcript = run_session(cfg, args.adversary or ())
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    text = transcript.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    verdict = verify_session(SessionTranscript.from_json(text))
    _print_verdict(verdict, out)
    if args.out:
        print(f"transcript written to {args.out}", file=out)
    return EXIT_OK if verdict.accepted else EXIT_REJECT


def _print_verdict(v, out):
    if v.aggregate is not None:
        for m, (_, est) in enumerate(v.aggregate):
            print(f"bin {m}: estimate {est:g}", file=out)
    if v.accepted:
        print("verdict: accepted", file=out)
    else:
        print(f"verdict: rejected at {v.phase}; blame: {', '.join(v.blame) or '-'}; reason: {v.reason}", file=out)


# ---------------------------------------------------------------- verify
def cmd_verify(args, out) -> int:
    try:
        with open(args.input, "rb") as fh:
            raw = fh.read()
        transcript = SessionTranscript.from_json(raw.decode("utf-8"))
    except (OSError, UnicodeDecodeError, MalformedTranscript) as exc:
        print(f"malformed transcript: {exc}", file=sys.stderr)
        return EXIT_USAGE
    verdict = verify_session(transcript)
    _print_verdict(verdict, out)
    return EXIT_OK if verdict.accepted else EXIT_REJECT


# ----------------------------------------------------------------- bench
def cmd_bench(args, out) -> int:
    from .harness.bench import PHASES, BenchConfig, exponentiation_report, run_benchmark, run_sweep

    phases = tuple(args.phases.split(",")) if args.phases else PHASES
    if any(p not in PHASES for p in phases):
        raise UsageError(f"phases must come from {', '.join(PHASES)}")
    cfg = BenchConfig(n=args.n, n_b=args.coins or 1024, M=args.bins, K=args.k, group_id=args.group,
                      reps=args.reps, budget_s=args.budget, phases=phases, seed=args.seed or 0, delta=args.delta)
    if cfg.n_b < 31:
        raise UsageError("n_b must exceed 30")
    report = run_sweep(args.sweep, cfg) if args.sweep else run_benchmark(cfg)
    csv_text = report.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    out.write(csv_text)
    if args.exp:
        print(exponentiation_report(), file=out)
    return EXIT_OK


# ----------------------------------------------------------------- audit
def cmd_audit(args, out) -> int:
    from .harness import InsufficientTrials, SessionConfig, audit_privacy

    if args.coins is None:
        raise UsageError("audit needs --coins")
    cfg = SessionConfig(K=args.k, n=2, n_b=args.coins, delta=args.delta, group_id=args.group)
    try:
        report = audit_privacy(cfg, [1, 0], [0, 0], args.trials, mechanism=args.mechanism, seed=args.seed or 0)
    except InsufficientTrials as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_json())
    print(report.to_text() if args.histogram else report.summary(), file=out)
    return EXIT_OK if report.passed else EXIT_REJECT


# --------------------------------------------------------------- attacks
def cmd_attacks(args, out) -> int:
    from .harness import SessionConfig, expected_blame, run_session, sketch_session
    from .harness.session import AdversarySpec

    scenarios = [("nonbit", "prover1:nonbit_commitment"), ("misreveal", "prover1:morra_misreveal"),
                 ("tamper", "prover1:tamper_output"), ("ignore", "prover2:exclude_client=3"),
                 ("collude", "client3:collude_illegal_input")]
    all_ok = True
    for label, adv in scenarios:
        spec = AdversarySpec.parse(adv)
        hits = 0
        for t in range(args.trials):
            v = run_session(SessionConfig(K=2, n=6, n_b=args.coins or 31, group_id=args.group, seed=f"atk/{t}"),
                            [spec]).verdict
            hits += (not v.accepted) and expected_blame(spec) in v.blame
        all_ok &= hits == args.trials
        print(f"{label:9s} {adv:32s} detected {hits}/{args.trials}", file=out)
    honest = [[1, 0], [0, 1], [1, 0], [0, 1]]
    a = sketch_session(honest, 2, attack="ignore_input", target=1)
    b = sketch_session(honest[:3] + [[4, 0]], 2, attack="collude_illegal_input", target=3)
    print(f"sketch baseline: ignore {'undetected' if a.attack_succeeded else 'caught'}, "
          f"collude {'undetected' if b.attack_succeeded else 'caught'}", file=out)
    return EXIT_OK if all_ok else EXIT_REJECT


# ------------------------------------------------------------------ glue
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vdp", description="Verifiable differentially private counting queries.")
    ap.add_argument("--config", help="JSON file whose keys override command-line flags")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, k=2):
        p.add_argument("--epsilon", type=float)
        p.add_argument("--delta", type=parse_delta, default=2.0 ** -10, help="decimal or 2^-k")
        p.add_argument("--coins", type=_positive_int, help="n_b; overrides --epsilon")
        p.add_argument("--k", type=_positive_int, default=k, help="number of provers")
        p.add_argument("--group", default=default_group_id(), choices=GROUP_IDS,
                       help=f"group backend (default from ${DEFAULT_GROUP_ENV})")
        p.add_argument("--seed")

    p = sub.add_parser("params", help="privacy calculus")
    common(p, k=1)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("run", help="run one session and write its transcript")
    common(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--bins", type=_positive_int, default=1)
    p.add_argument("--adversary", action="append", help="e.g. prover1:tamper_output (repeatable)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="re-verify a transcript file")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="per-phase timings as CSV")
    common(p, k=1)
    p.set_defaults(group="schnorr2048")
    p.add_argument("--sweep", choices=("coins", "clients", "bins"))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--bins", type=_positive_int, default=1)
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--budget", type=float, help="seconds; reduces repetitions to fit")
    p.add_argument("--phases", help="comma-separated subset of phases")
    p.add_argument("--exp", action="store_true", help="also print single-exponentiation timings")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("audit", help="empirical privacy audit")
    common(p, k=1)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--mechanism", choices=("protocol", "noise", "ideal"), default="noise")
    p.add_argument("--histogram", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("attacks", help="soundness scenarios and the sketch-baseline contrast")
    common(p)
    p.set_defaults(group="toy61")
    p.add_argument("--trials", type=_positive_int, default=10)
    p.set_defaults(func=cmd_attacks)
    return ap


def _apply_config(ap, args):
    try:
        with open(args.config) as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    if not isinstance(overrides, dict):
        raise UsageError("config file must hold a JSON object")
    sub = next(a for a in ap._subparsers._group_actions if a.dest == "command").choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest == "help":
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        # same validation as the flag itself
        if action.type is not None and value is not None and not isinstance(value, list):
            value = action.type(str(value))
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} is not one of {list(action.choices)}")
        setattr(args, dest, value)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            _apply_config(ap, args)
        return args.func(args, out)
    except (UsageError, PrivacyParamError, UnsupportedSecurityLevel, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
