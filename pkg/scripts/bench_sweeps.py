"""Run the three benchmark sweeps (coins, clients, bins) and write one CSV each."""
import argparse
import pathlib

from vdp.harness.bench import BenchConfig, exponentiation_report, linear_fit_r2, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--group", default="ristretto255")
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--budget", type=float, default=None, help="seconds per sweep")
    ap.add_argument("--outdir", default="bench_out")
    args = ap.parse_args()
    out = pathlib.Path(args.outdir)
    out.mkdir(exist_ok=True)
    base = BenchConfig(group_id=args.group, reps=args.reps, budget_s=args.budget)
    for kind in ("coins", "clients", "bins"):
        rep = run_sweep(kind, base)
        (out / f"sweep_{kind}.csv").write_text(rep.to_csv())
        print(f"{kind}: {len(rep.rows)} rows -> {out / f'sweep_{kind}.csv'}")
        if kind == "coins":
            for phase in ("sigma_prove", "sigma_verify"):
                rows = [r for r in rep.rows if r.phase == phase]
                print(f"  {phase}: R^2 vs n_b = {linear_fit_r2([r.n_b for r in rows], [r.mean_ms for r in rows]):.4f}")
    print(exponentiation_report())


if __name__ == "__main__":
    main()
