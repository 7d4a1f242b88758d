"""Run the agent sweep grid against the rolling Lagrangian baseline at full
scale and tabulate the paired signed-rank result for each configuration.

    python3 scripts/sweep_rl.py [--n-sims 50] [--csv sweep.csv]
"""

import argparse
import csv
import time

from alloc_arena.agent import sweep_grid
from alloc_arena.harness import ExperimentConfig, paired_series, run_experiment
from alloc_arena.stats import wilcoxon_signed_rank


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-sims", type=int, default=50)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--csv", help="write the table here as well")
    args = ap.parse_args()

    rows = []
    for name, agent in sweep_grid():
        start = time.perf_counter()
        cfg = ExperimentConfig(n_sims=args.n_sims, strategies=["rl", "rolling_lagrangian", "static"], agent=agent,
                               emit_plots=False, workers=args.workers)
        result = run_experiment(cfg, write=False)
        x, y = paired_series(result.records, "rl", "rolling_lagrangian", cfg.burn_in)
        _, s = paired_series(result.records, "rl", "static", cfg.burn_in)
        w = wilcoxon_signed_rank(x, y)
        rows.append(dict(config=name, rl=x.mean(), rolling=y.mean(), static=s.mean(), W=w.W, z=w.z,
                         p_value=w.p_value, median_diff=w.median_diff, seconds=time.perf_counter() - start))
        r = rows[-1]
        print(f"{name:18s} rl {r['rl']:.3f} rolling {r['rolling']:.3f} static {r['static']:.3f} "
              f"z {r['z']:+7.2f} p {r['p_value']:.3g} median {r['median_diff']:g} ({r['seconds']:.0f}s)")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in r.items()})
    best = max(rows, key=lambda r: r["z"])
    print(f"largest z: {best['config']} ({best['z']:.2f})")


if __name__ == "__main__":
    main()
