"""Ablation of the Remez initialization.

Compares Remez alone, descent from the Remez fit, and descent from the
small uniform start under the same training budget, per seed.

    python3 scripts/run_ablation.py --seeds 5
"""

import argparse

from graphpade.experiments import ExperimentSpec, run_single
from graphpade.optimizer import improvement

METHODS = ("remez", "rational+remez", "rational-no-remez")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--threads", type=int, default=3)
    args = ap.parse_args()

    print("target seed  remez          remez+descent  no-remez       improved  wins")
    for target in ("abs", "sign"):
        wins = 0
        for seed in range(args.seeds):
            reps, _ = run_single(ExperimentSpec(target=target, methods=METHODS, seed=seed, threads=args.threads))
            r = {rep.method: rep.spectral_mse for rep in reps}
            win = r["rational+remez"] < min(r["remez"], r["rational-no-remez"])
            wins += win
            print(f"{target:6s} {seed:4d}  {r['remez']:.6e}  {r['rational+remez']:.6e}  "
                  f"{r['rational-no-remez']:.6e}  {improvement(r['remez'], r['rational+remez']):7.2%}  {win}")
        print(f"{target}: Remez init wins in {wins}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
