"""Monte Carlo estimate against the exact finite-n moment for every config word.

    python3 scripts/mc_vs_exact.py configs/k2.json --n 40 --trials 500
"""
import argparse

import numpy as np

from opfree.algebra import op_norm
from opfree.config import load_config
from opfree.matmodel import empirical_moments, exact_moment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()
    cfg = load_config(args.config)
    trials = args.trials or cfg.trials
    seed = cfg.seed if args.seed is None else args.seed
    stats = empirical_moments([w.word for w in cfg.words], cfg.models, cfg.diag, args.n, trials, seed)
    print(f"n={args.n} trials={trials} seed={seed}")
    print(f"{'word':<14}{'|mc - exact|':>14}{'max z':>9}")
    for spec, (mean, se) in zip(cfg.words, stats):
        ref = exact_moment(spec.word, cfg.models, cfg.diag, args.n)
        diff = mean - ref
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.nan_to_num(np.maximum(np.abs(diff.real) / se.real, np.abs(diff.imag) / se.imag))
        print(f"{spec.id:<14}{op_norm(diff):>14.3e}{float(z.max()):>9.2f}")


if __name__ == "__main__":
    main()
