"""Sup-error decay of Newman rationals and minimax polynomials on |x|.

Writes one CSV per approximant and prints the log-error vs sqrt(degree) fit.

    python3 scripts/run_rates.py --out-dir runs/rates
"""

import argparse
from pathlib import Path

from graphpade.theory import JumpTarget, log_sqrt_fit, rate_experiment, write_rates_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=100_000)
    ap.add_argument("--out-dir", default="runs/rates")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    target = JumpTarget(a=1.0, b=0.0, sigma=0, shift=0.0)
    degrees = list(range(5, 51, 5))
    rational = rate_experiment("rational", target, degrees, args.grid)
    poly = rate_experiment("polynomial", target, degrees, args.grid)
    write_rates_csv(rational, out / "rational.csv")
    write_rates_csv(poly, out / "polynomial.csv")

    print("degree  rational      polynomial    n * poly")
    for (d, r), (_, p) in zip(rational, poly):
        print(f"{d:6d}  {r:.4e}  {p:.4e}  {d * p:.3f}")
    slope, _, r2 = log_sqrt_fit(rational)
    print(f"log(rational error) ~ {slope:.3f} * sqrt(n), R^2 = {r2:.4f}")


if __name__ == "__main__":
    main()
