"""Replicated experiments: common-random-number environments, the
decide/observe loop for each strategy, and CSV / JSON / SVG outputs."""

import csv
import dataclasses
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from alloc_arena import AllocArenaError, ConfigError, InputError, __version__, rng as rngs
from alloc_arena.agent import AgentConfig
from alloc_arena.coverage import check_allocation
from alloc_arena.env import EnvConfig, RegimeShift, SignalStream, simulate_trajectory
from alloc_arena.lagrangian import LagrangianConfig
from alloc_arena.stats import DegenerateSample, coverage, estimation_mse, wilcoxon_signed_rank
from alloc_arena.strategies import KINDS, make_policy

log = logging.getLogger(__name__)

SEED_ENV_VAR = "ALLOC_ARENA_SEED"
CSV_HEADER = ["sim_id", "t", "strategy", "coverage", "mse"]


@dataclass
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    strategies: List[str] = field(default_factory=lambda: list(KINDS))
    burn_in: int = 10
    n_sims: int = 50
    tau: int = 1
    output_dir: str = "results"
    emit_plots: bool = True
    emit_qtable: bool = False
    verbose: bool = False
    workers: Optional[int] = None  # None -> os.cpu_count()
    oracle_method: str = "greedy"
    compare: List[str] = field(default_factory=lambda: ["rl", "rolling_lagrangian"])
    agent: AgentConfig = field(default_factory=AgentConfig)
    lagrangian: LagrangianConfig = field(default_factory=LagrangianConfig)

    def __post_init__(self):
        self.validate()

    def validate(self):
        self.env.validate()
        if self.n_sims < 1:
            raise ConfigError(f"n_sims must be >= 1, got {self.n_sims}")
        if not 1 <= self.burn_in < self.env.horizon:
            raise ConfigError(f"burn_in must lie in [1, horizon), got {self.burn_in}")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        for s in self.strategies:
            if s not in KINDS:
                raise ConfigError(f"unknown strategy {s!r}; expected one of {KINDS}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("strategies must be distinct")
        if self.tau not in (1, 2, 3):
            raise ConfigError(f"tau must be 1, 2 or 3, got {self.tau}")
        if self.agent.tau != self.tau:
            self.agent = dataclasses.replace(self.agent, tau=self.tau)

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["env"]["shifts"] = [dataclasses.asdict(s) for s in self.env.shifts]
        d["agent"] = self.agent.as_dict()
        return d


@dataclass
class StepRecord:
    sim_id: int
    t: int
    strategy: str
    coverage: int
    mse: float
    alloc: Optional[tuple] = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: List[StepRecord]
    trajectory: np.ndarray  # q_i(t) of replication 0, shape (T, C)
    summary: dict


def post_burn_in(t, burn_in):
    return t > burn_in


def run_replication(cfg, sim_id, qtable_path=None):
    """All strategies on one realized environment; records in (strategy, t) order."""
    env = cfg.env
    traj = simulate_trajectory(env, rngs.stream(env.seed, sim_id, rngs.ENV_DRIFT))
    signals = SignalStream(rngs.stream(env.seed, sim_id, rngs.SIGNALS), env.horizon, env.n_types, env.n_units)
    records = []
    for kind in cfg.strategies:
        policy = make_policy(
            kind, env.n_types, env.n_units, burn_in=cfg.burn_in, tau=cfg.tau,
            rng=rngs.strategy_stream(env.seed, sim_id, KINDS.index(kind)),
            agent_cfg=cfg.agent, lagrangian=cfg.lagrangian, oracle_method=cfg.oracle_method,
        )
        for t in range(env.horizon):
            q = traj[t]
            p_true = 1.0 - q
            mse = estimation_mse(policy.belief.p_hat, p_true)
            alloc = check_allocation(policy.decide(t, p_true if policy.sees_truth else None),
                                     n_units=env.n_units, n_types=env.n_types)
            x = signals.draw(t, q, alloc)
            policy.observe(alloc, x)
            records.append(StepRecord(sim_id, t, kind, coverage(x, cfg.tau), mse,
                                      tuple(int(v) for v in alloc) if cfg.verbose else None))
        if qtable_path is not None and kind == "rl":
            policy.agent.export_qtable(qtable_path)
    return sim_id, records, traj


def _run_one(args):
    cfg, sim_id, qtable_path = args
    return run_replication(cfg, sim_id, qtable_path)


def collect(cfg, qtable_dir=None):
    """Run every replication (optionally in a process pool) and merge by sim_id."""
    jobs = []
    for sim_id in range(cfg.n_sims):
        qpath = None
        if qtable_dir is not None and sim_id == 0 and "rl" in cfg.strategies:
            qpath = str(Path(qtable_dir) / "qtable_sim0.csv")
        jobs.append((cfg, sim_id, qpath))
    workers = cfg.workers or os.cpu_count() or 1
    if workers <= 1 or cfg.n_sims == 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.n_sims)) as pool:
            results = list(pool.map(_run_one, jobs))
    results.sort(key=lambda r: r[0])
    records = [rec for _, recs, _ in results for rec in recs]
    return records, results[0][2]


def paired_series(records, a, b, burn_in):
    """Coverage pairs (a, b) matched on (sim_id, t) for post-burn-in steps."""
    lookup = {(r.sim_id, r.t, r.strategy): r.coverage for r in records}
    keys = sorted({(r.sim_id, r.t) for r in records if post_burn_in(r.t, burn_in)})
    keys = [k for k in keys if (k[0], k[1], a) in lookup and (k[0], k[1], b) in lookup]
    x = np.array([lookup[k[0], k[1], a] for k in keys], dtype=float)
    y = np.array([lookup[k[0], k[1], b] for k in keys], dtype=float)
    return x, y


def summarize(records, cfg):
    strategies = list(dict.fromkeys(r.strategy for r in records))
    T = cfg.env.horizon
    per_step = {}
    post = {}
    for s in strategies:
        cov = np.zeros(T)
        mse = np.zeros(T)
        cnt = np.zeros(T)
        tail = []
        for r in records:
            if r.strategy == s:
                cov[r.t] += r.coverage
                mse[r.t] += r.mse
                cnt[r.t] += 1
                if post_burn_in(r.t, cfg.burn_in):
                    tail.append(r.coverage)
        cnt[cnt == 0] = np.nan
        per_step[s] = {"coverage": (cov / cnt).tolist(), "mse": (mse / cnt).tolist()}
        post[s] = float(np.mean(tail)) if tail else float("nan")
    summary = {"post_burn_in_mean_coverage": post, "per_step": per_step}
    a, b = cfg.compare
    if a in strategies and b in strategies:
        x, y = paired_series(records, a, b, cfg.burn_in)
        try:
            w = wilcoxon_signed_rank(x, y)
            summary["wilcoxon"] = {"a": a, "b": b, **dataclasses.asdict(w)}
        except DegenerateSample:
            summary["wilcoxon"] = {"a": a, "b": b, "degenerate": True}
    return summary


def run_experiment(cfg, write=True):
    """Run, summarize and (by default) write metrics.csv, run_metadata.json,
    summary.json and the SVG figures into ``cfg.output_dir``."""
    out = Path(cfg.output_dir)
    if write:
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise AllocArenaError(f"cannot create output directory {out}: {e}") from e
    records, traj = collect(cfg, qtable_dir=out if (write and cfg.emit_qtable) else None)
    result = ExperimentResult(cfg, records, traj, summarize(records, cfg))
    if write:
        write_csv(records, out / "metrics.csv")
        if cfg.verbose:
            write_allocations(records, out / "allocations.csv")
        write_json(out / "run_metadata.json", {"version": __version__, "config": cfg.as_dict()})
        write_json(out / "summary.json", {k: v for k, v in result.summary.items() if k != "per_step"})
        if cfg.emit_plots:
            from alloc_arena.plots import emit_summary_plots
            emit_summary_plots(result, out)
    return result


def _fmt(x):
    return f"{x:.10g}"


def write_csv(records, path):
    if not records:
        raise InputError("no records to write")
    order = {}
    for r in records:
        order.setdefault(r.strategy, len(order))
    rows = sorted(records, key=lambda r: (r.sim_id, order[r.strategy], r.t))
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in rows:
                w.writerow([r.sim_id, r.t, r.strategy, r.coverage, _fmt(r.mse)])
    except OSError as e:
        raise AllocArenaError(f"cannot write {path}: {e}") from e


def read_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise InputError(f"{path}: expected header {','.join(CSV_HEADER)}, got {header}")
            return [StepRecord(int(a), int(b), c, int(d), float(e)) for a, b, c, d, e in reader]
    except OSError as e:
        raise AllocArenaError(f"cannot read {path}: {e}") from e


def write_allocations(records, path):
    C = len(records[0].alloc)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sim_id", "t", "strategy"] + [f"n{i}" for i in range(C)])
        for r in records:
            w.writerow([r.sim_id, r.t, r.strategy, *r.alloc])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


# ---- flat key = value config files ----

def _parse_bool(v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_shifts(v):
    if v.strip().lower() in ("", "none"):
        return []
    shifts = []
    for item in v.split(","):
        parts = item.strip().split(":")
        if len(parts) != 3:
            raise ValueError(f"shift {item.strip()!r} is not type:step:new_q")
        shifts.append(RegimeShift(int(parts[0]), int(parts[1]), float(parts[2])))
    return shifts


def _coerce(name, current, raw):
    if name == "shifts":
        return _parse_shifts(raw)
    if isinstance(current, bool):
        return _parse_bool(raw)
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, (list, tuple)):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if current and isinstance(current[0], int):
            items = [int(s) for s in items]
        return type(current)(items)
    if current is None or name in ("workers", "budget_tol"):
        if raw.strip().lower() == "none":
            return None
        return int(raw) if name == "workers" else float(raw)
    return raw.strip()


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into ExperimentConfig. Nested sections use
    dotted keys (``env.n_units``, ``agent.alpha0``, ``lagrangian.grid_points``)."""
    sections = {"env": {}, "agent": {}, "lagrangian": {}, "": {}}
    defaults = {"env": EnvConfig(), "agent": AgentConfig(), "lagrangian": LagrangianConfig()}
    top_fields = {f.name for f in dataclasses.fields(ExperimentConfig)} - set(defaults)
    top_defaults = {f.name: (f.default if f.default is not dataclasses.MISSING else f.default_factory())
                    for f in dataclasses.fields(ExperimentConfig) if f.name in top_fields}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        section, _, name = key.rpartition(".")
        if section not in sections:
            raise ConfigError(f"{source}:{lineno}: unknown section {section!r}")
        valid = top_defaults if section == "" else {f.name: getattr(defaults[section], f.name)
                                                    for f in dataclasses.fields(defaults[section])}
        if name not in valid:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            sections[section][name] = _coerce(name, valid[name], raw)
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {e}") from e
    try:
        return ExperimentConfig(
            env=EnvConfig(**sections["env"]),
            agent=AgentConfig(**sections["agent"]),
            lagrangian=LagrangianConfig(**sections["lagrangian"]),
            **sections[""],
        )
    except TypeError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), str(p))
