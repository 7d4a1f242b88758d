"""full-scale run of all four strategies, with per-strategy paired margins
and the post-shift deficit table printed after the standard outputs.

    python3 scripts/run_full_experiment.py [--config configs/full.cfg] [--out results/full]
"""

import argparse

import numpy as np

from alloc_arena import rng as rngs
from alloc_arena.coverage import expected_coverage
from alloc_arena.env import simulate_trajectory
from alloc_arena.harness import ExperimentConfig, load_config, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--out", default="results/full")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()

    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg.output_dir = args.out
    cfg.verbose = True
    if args.workers is not None:
        cfg.workers = args.workers
    result = run_experiment(cfg)

    env, L = cfg.env, cfg.burn_in
    cov = {}
    exp = {}
    p = {s: 1 - simulate_trajectory(env, rngs.stream(env.seed, s, rngs.ENV_DRIFT)) for s in range(cfg.n_sims)}
    for r in result.records:
        cov.setdefault(r.strategy, np.zeros((cfg.n_sims, env.horizon)))[r.sim_id, r.t] = r.coverage
        exp.setdefault(r.strategy, np.zeros((cfg.n_sims, env.horizon)))[r.sim_id, r.t] = \
            expected_coverage(p[r.sim_id][r.t], np.array(r.alloc))

    print(f"{'strategy':20s} {'realized':>9s} {'expected':>9s}")
    for s in cov:
        print(f"{s:20s} {cov[s][:, L + 1:].mean():9.4f} {exp[s][:, L + 1:].mean():9.4f}")

    if "oracle" in cov:
        print("\npaired per-replication margin vs oracle (mean, 2 SE)")
        for s in cov:
            if s == "oracle":
                continue
            d = cov["oracle"][:, L + 1:].mean(axis=1) - cov[s][:, L + 1:].mean(axis=1)
            print(f"  {s:20s} {d.mean():.4f}  {2 * d.std(ddof=1) / np.sqrt(d.size):.4f}")
        print("\nexpected-coverage deficit vs oracle, 5-step halves after each shift")
        for s in cov:
            if s == "oracle":
                continue
            d = (exp["oracle"] - exp[s]).mean(axis=0)
            cells = [f"t={sh.at_step}: {d[sh.at_step:sh.at_step + 5].mean():.3f} -> "
                     f"{d[sh.at_step + 5:sh.at_step + 10].mean():.3f}" for sh in env.shifts]
            print(f"  {s:20s} " + "  ".join(cells))

    w = result.summary.get("wilcoxon")
    if w and not w.get("degenerate"):
        print(f"\nwilcoxon {w['a']} vs {w['b']}: W={w['W']:.0f} z={w['z']:.2f} p={w['p_value']:.3g} "
              f"median diff={w['median_diff']:g}")
    print(f"outputs in {cfg.output_dir}")


if __name__ == "__main__":
    main()
