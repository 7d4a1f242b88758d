"""Command line entry point: ``run``, ``allocate`` and ``compare``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from alloc_arena import AllocArenaError, ConfigError, __version__

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="alloc-arena", description="Test-unit allocation under drifting failure probabilities.")
    p.add_argument("--version", action="version", version=f"alloc-arena {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run a replicated experiment")
    run.add_argument("--config", help="flat key = value config file (defaults if omitted)")
    run.add_argument("--seed", type=int, help="root seed (overrides config and $ALLOC_ARENA_SEED)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--n-sims", type=int, help="override n_sims")
    run.add_argument("--workers", type=int, help="worker processes")

    alloc = sub.add_parser("allocate", help="one-shot allocation from a probability file")
    alloc.add_argument("--probs", required=True, help="file with one detection probability per line")
    alloc.add_argument("--budget", required=True, type=int)
    alloc.add_argument("--tau", type=int, default=1, choices=(1, 2, 3))
    alloc.add_argument("--method", choices=("lagrangian", "greedy"), default="lagrangian")

    cmp_ = sub.add_parser("compare", help="Wilcoxon signed-rank test on a metrics CSV")
    cmp_.add_argument("--csv", required=True)
    cmp_.add_argument("--a", required=True, help="first strategy")
    cmp_.add_argument("--b", required=True, help="second strategy")
    cmp_.add_argument("--burn-in", type=int, default=10, help="pairs use t > burn-in")
    cmp_.add_argument("--pratt", action="store_true", help="Pratt treatment of zero differences")
    return p


def _cmd_run(args):
    from alloc_arena.harness import SEED_ENV_VAR, load_config, run_experiment

    if args.config:
        cfg = load_config(args.config)
    else:
        from alloc_arena.harness import ExperimentConfig
        cfg = ExperimentConfig()
    seed = cfg.env.seed
    if os.environ.get(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as e:
            raise ConfigError(f"${SEED_ENV_VAR} is not an integer") from e
    if args.seed is not None:
        seed = args.seed
    cfg.env = dataclasses.replace(cfg.env, seed=seed)
    if args.out:
        cfg.output_dir = args.out
    if args.n_sims is not None:
        cfg.n_sims = args.n_sims
    if args.workers is not None:
        cfg.workers = args.workers
    cfg.validate()
    result = run_experiment(cfg)
    out = Path(cfg.output_dir)
    for s, v in result.summary["post_burn_in_mean_coverage"].items():
        print(f"{s:20s} mean coverage (t > {cfg.burn_in}) = {v:.4f}")
    w = result.summary.get("wilcoxon")
    if w and not w.get("degenerate"):
        print(f"wilcoxon {w['a']} vs {w['b']}: W={w['W']:.1f} n={w['n_effective']} z={w['z']:.3f} p={w['p_value']:.4g}")
    print(f"wrote {out / 'metrics.csv'}")
    return 0


def _read_probs(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"probability file not found: {p}")
    try:
        vals = [float(line) for line in p.read_text().split() if line.strip()]
    except ValueError as e:
        raise ConfigError(f"{p}: {e}") from e
    if not vals:
        raise ConfigError(f"{p}: no probabilities")
    return np.array(vals)


def _cmd_allocate(args):
    from alloc_arena.coverage import greedy_optimal_allocation
    from alloc_arena.lagrangian import solve_allocation

    p = _read_probs(args.probs)
    if np.any((p < 0) | (p > 1)):
        raise ConfigError("probabilities must lie in [0, 1]")
    if args.budget < p.size:
        raise ConfigError(f"budget {args.budget} is smaller than the number of types {p.size}")
    if args.method == "greedy":
        alloc = greedy_optimal_allocation(p, args.budget, args.tau)
    else:
        q = np.clip(1.0 - p, 1e-6, 1 - 1e-6)
        alloc = solve_allocation(q, args.budget, args.tau)
    print(" ".join(str(int(v)) for v in alloc))
    return 0


def _cmd_compare(args):
    from alloc_arena.harness import paired_series, read_csv
    from alloc_arena.stats import wilcoxon_signed_rank

    if not Path(args.csv).is_file():
        raise ConfigError(f"CSV file not found: {args.csv}")
    records = read_csv(args.csv)
    x, y = paired_series(records, args.a, args.b, args.burn_in)
    if x.size == 0:
        raise ConfigError(f"no paired post-burn-in rows for {args.a!r} and {args.b!r}")
    w = wilcoxon_signed_rank(x, y, zero_method="pratt" if args.pratt else "wilcox")
    print(f"pairs={x.size} W={w.W:.1f} n_effective={w.n_effective} z={w.z:.4f} p_value={w.p_value:.6g} "
          f"median_diff={w.median_diff:g} mean_diff={float(np.mean(x - y)):.4f}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return USAGE_ERROR
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "allocate": _cmd_allocate, "compare": _cmd_compare}
    if args.command is None:
        parser.print_help(sys.stderr)
        return USAGE_ERROR
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except (AllocArenaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
