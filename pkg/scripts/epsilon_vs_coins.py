"""Tabulate epsilon against the number of private coins for a few deltas."""
import argparse

from vdp.dp_params import MIN_COINS, privacy_for_coins


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-coins", type=int, default=2 ** 14)
    ap.add_argument("--deltas", default="2^-10,2^-20,2^-30")
    args = ap.parse_args()
    from vdp.cli import parse_delta
    deltas = [parse_delta(d) for d in args.deltas.split(",")]
    print("n_b," + ",".join(f"eps@{d:.3g}" for d in deltas))
    n = MIN_COINS
    while n <= args.max_coins:
        print(f"{n}," + ",".join(f"{privacy_for_coins(n, d):.4f}" for d in deltas))
        n *= 2


if __name__ == "__main__":
    main()
