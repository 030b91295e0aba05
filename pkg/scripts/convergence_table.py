"""Exact-engine deviation table with a fitted decay rate per word.

    python3 scripts/convergence_table.py configs/scalar.json [--law boolean]
"""
import argparse

import numpy as np

from opfree.config import load_config
from opfree.matmodel import convergence_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--law", choices=("conditional", "boolean"), default=None)
    args = ap.parse_args()
    cfg = load_config(args.config)
    law = args.law or cfg.law
    print(f"{'word':<14}" + "".join(f"{'n=' + str(n):>12}" for n in cfg.n_list) + f"{'slope':>9}")
    for spec in cfg.words:
        rows = convergence_sweep(spec.word, cfg.models, cfg.diag, cfg.n_list, "exact", law=law, word_id=spec.id)
        dev = np.array([r.deviation_norm for r in rows])
        live = dev > 1e-12
        # log-log slope over the nonzero deviations; -1 means O(1/n)
        slope = np.polyfit(np.log(np.array(cfg.n_list)[live]), np.log(dev[live]), 1)[0] if live.sum() >= 2 else float("nan")
        print(f"{spec.id:<14}" + "".join(f"{d:>12.3e}" for d in dev) + f"{slope:>9.2f}")


if __name__ == "__main__":
    main()
