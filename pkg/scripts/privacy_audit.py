"""Empirical privacy audit over a range of coin counts."""
import argparse

from vdp.harness import SessionConfig, audit_privacy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--coins", default="64,100,256,1024")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--mechanism", default="noise", choices=("protocol", "noise", "ideal"))
    ap.add_argument("--k", type=int, default=1)
    args = ap.parse_args()
    for n_b in map(int, args.coins.split(",")):
        cfg = SessionConfig(K=args.k, n_b=n_b, group_id="toy61")
        print(audit_privacy(cfg, [1, 0, 1], [1, 0, 0], args.trials, mechanism=args.mechanism).summary())


if __name__ == "__main__":
    main()
