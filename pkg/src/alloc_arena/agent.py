"""Tabular Q-learning over quantized (allocation, belief) states.

Actions move ``delta`` units from one type to another, plus a no-op. The
table is sparse over states and dense over the fixed action list, so a
state's row is one numpy vector and the feasibility mask is applied on read.
"""

import csv
from collections import deque
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from alloc_arena import ConfigError, InputError
from alloc_arena.coverage import check_allocation, check_tau, g_tail


@dataclass
class AgentConfig:
    """Agent hyperparameters.

    The defaults are the tuned regime: immediate rewards only (gamma=0),
    simulated coverage scored by its expectation under the belief, and a
    rehearsal that sweeps every feasible move from the live state. With
    discounting, rows for unvisited states read zero and a self-loop
    (no-op) always looks best; with sampled simulated indicators the
    per-move value differences drown in noise. ``classic()`` gives the
    untuned textbook setting for comparison.
    """

    alpha0: float = 0.5
    alpha_decay: float = 0.999
    alpha_min: float = 0.1
    gamma: float = 0.0
    eps0: float = 0.05
    eps_decay: float = 0.995
    eps_min: float = 0.01
    eps_boost: float = 0.2
    gap_threshold: float = 0.2
    gap_count: int = 2
    w1: float = 0.5
    w2: float = 0.5
    tau: int = 1
    delta_menu: Tuple[int, ...] = (1, 5, 10)
    offline_episodes: int = 300
    belief_bins: int = 5
    alloc_quantum: int = 10
    reward_smooth_window: int = 1
    q_clip: float = 5.0
    sim_reward: str = "expected"  # "sample" draws x ~ Bin(n, p_hat); "expected" uses P(x >= tau)
    rehearsal_mode: str = "sweep"  # "egreedy": chained epsilon-greedy steps; "sweep": each feasible move once
    rehearsal_eps: Optional[float] = None  # egreedy mode only; None -> the live epsilon
    rehearsal_chain: Optional[int] = None  # egreedy mode only; restart at the live state every k episodes

    @classmethod
    def classic(cls, **overrides):
        """Discounted, sampled-reward, epsilon-greedy-rehearsal configuration."""
        base = dict(alpha0=0.2, alpha_decay=0.999, alpha_min=0.01, gamma=0.9, eps0=0.3, eps_decay=0.995,
                    eps_min=0.02, eps_boost=0.5, offline_episodes=20, sim_reward="sample",
                    rehearsal_mode="egreedy")
        base.update(overrides)
        return cls(**base)

    def __post_init__(self):
        self.delta_menu = tuple(int(d) for d in self.delta_menu)
        for name in ("alpha0", "alpha_decay", "alpha_min", "eps_decay"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in (0, 1]")
        for name in ("gamma", "eps0", "eps_min", "eps_boost"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.w1 < 0 or self.w2 < 0:
            raise ConfigError("reward weights must be non-negative")
        if not self.delta_menu or any(d < 1 for d in self.delta_menu):
            raise ConfigError("delta_menu must hold positive integers")
        if self.belief_bins < 2 or self.alloc_quantum < 1:
            raise ConfigError("belief_bins must be >= 2 and alloc_quantum >= 1")
        if self.offline_episodes < 0 or self.reward_smooth_window < 1 or self.q_clip <= 0:
            raise ConfigError("offline_episodes >= 0, reward_smooth_window >= 1, q_clip > 0 required")
        if self.gap_count < 1:
            raise ConfigError("gap_count must be >= 1")
        check_tau(self.tau)
        if self.sim_reward not in ("sample", "expected"):
            raise ConfigError("sim_reward must be 'sample' or 'expected'")
        if self.rehearsal_eps is not None and not 0 <= self.rehearsal_eps <= 1:
            raise ConfigError("rehearsal_eps must lie in [0, 1]")
        if self.rehearsal_mode not in ("egreedy", "sweep"):
            raise ConfigError("rehearsal_mode must be 'egreedy' or 'sweep'")
        if self.rehearsal_chain is not None and self.rehearsal_chain < 1:
            raise ConfigError("rehearsal_chain must be >= 1")

    def as_dict(self):
        d = asdict(self)
        d["delta_menu"] = list(self.delta_menu)
        return d


def sweep_grid():
    """Named agent configurations tried, in order, when tuning against the
    rolling Lagrangian baseline. The first entry is the default."""
    return [
        ("default", AgentConfig()),
        ("default-eps0.1", AgentConfig(eps0=0.1, eps_boost=0.3)),
        ("default-alpha0.3", AgentConfig(alpha0=0.3, alpha_min=0.05)),
        ("default-sampled", AgentConfig(sim_reward="sample")),
        ("default-gamma0.5", AgentConfig(gamma=0.5)),
        ("classic", AgentConfig.classic()),
        ("classic-sweep", AgentConfig.classic(rehearsal_mode="sweep", offline_episodes=300)),
    ]


@dataclass(frozen=True)
class Action:
    src: int
    dst: int
    delta: int

    @property
    def is_noop(self):
        return self.delta == 0


NOOP = Action(-1, -1, 0)


class ActionSpace:
    """Fixed, ordered action list for ``n_types`` and ``delta_menu``.

    Index 0 is the no-op, then (src, dst, delta) with src, dst and delta
    ascending. Greedy ties resolve to the lowest index, so an untrained
    agent holds its allocation.
    """

    def __init__(self, n_types, n_units, delta_menu):
        self.n_types = n_types
        self.n_units = n_units
        self.actions = [NOOP] + [
            Action(i, j, d)
            for i in range(n_types)
            for j in range(n_types)
            if i != j
            for d in sorted(set(delta_menu))
        ]
        self.index = {a: k for k, a in enumerate(self.actions)}
        self._src = np.array([max(a.src, 0) for a in self.actions])
        self._dst = np.array([max(a.dst, 0) for a in self.actions])
        self._delta = np.array([a.delta for a in self.actions])

    def __len__(self):
        return len(self.actions)

    def feasible_mask(self, alloc):
        n = np.asarray(alloc)
        cap = self.n_units - (self.n_types - 1)
        mask = (n[self._src] - self._delta >= 1) & (n[self._dst] + self._delta <= cap)
        mask[0] = True
        return mask


def enumerate_feasible_actions(alloc, cfg, n_units=None):
    n = check_allocation(alloc)
    space = ActionSpace(n.size, int(n.sum()) if n_units is None else n_units, cfg.delta_menu)
    mask = space.feasible_mask(n)
    return [a for a, ok in zip(space.actions, mask) if ok]


def apply_action(alloc, action, n_units=None):
    n = check_allocation(alloc, n_units=n_units)
    if action.is_noop:
        return n.copy()
    i, j, d = action.src, action.dst, action.delta
    if i == j or not (0 <= i < n.size and 0 <= j < n.size):
        raise InputError(f"invalid action {action}")
    if n[i] - d < 1:
        raise InputError(f"action {action} would leave type {i} with {n[i] - d} units")
    out = n.copy()
    out[i] -= d
    out[j] += d
    return out


def state_key(alloc, p_hat, cfg, n_units):
    levels = np.minimum(np.asarray(alloc) // cfg.alloc_quantum, n_units // cfg.alloc_quantum)
    bins = np.minimum((np.asarray(p_hat) * cfg.belief_bins).astype(int), cfg.belief_bins - 1)
    return tuple(int(v) for v in levels) + tuple(int(v) for v in bins)


def encode_key(key):
    return ":".join(str(v) for v in key)


def hybrid_reward(sim_counts, obs_counts, cfg, sim_probs=None):
    """w1 * #types simulated at/over tau + w2 * #types observed at/over tau.

    ``obs_counts=None`` marks an offline episode, where only the simulated
    term counts. Passing ``sim_probs`` (per-type P(x >= tau) under the
    belief) replaces the simulated indicators by their expectation.
    """
    if sim_probs is not None:
        r = cfg.w1 * float(np.sum(sim_probs))
    else:
        r = cfg.w1 * float(np.sum(np.asarray(sim_counts) >= cfg.tau))
    if obs_counts is not None:
        r += cfg.w2 * float(np.sum(np.asarray(obs_counts) >= cfg.tau))
    return r


class QTable:
    def __init__(self, n_actions):
        self.n_actions = n_actions
        self.rows = {}
        self._touched = set()

    def __len__(self):
        return len(self._touched)

    def row(self, key):
        """Values for ``key``; unseen states read as zeros and are not stored."""
        r = self.rows.get(key)
        return np.zeros(self.n_actions) if r is None else r

    def get(self, key, a):
        return float(self.row(key)[a])

    def set(self, key, a, value):
        r = self.rows.get(key)
        if r is None:
            r = self.rows[key] = np.zeros(self.n_actions)
        r[a] = value
        self._touched.add((key, a))

    def max_value(self, key, mask):
        return float(np.max(self.row(key)[mask]))

    def items(self):
        for key, a in sorted(self._touched):
            yield key, a, float(self.rows[key][a])


def q_update(table, s, a, r, s_next, next_mask, cfg, alpha):
    """One Bellman step; the TD error is clipped to +/- q_clip before scaling by alpha."""
    target = r + cfg.gamma * table.max_value(s_next, next_mask)
    td = float(np.clip(target - table.get(s, a), -cfg.q_clip, cfg.q_clip))
    if alpha != 0.0:
        table.set(s, a, table.get(s, a) + alpha * td)
    return table


def select_action(table, s, mask, eps, rng):
    """Epsilon-greedy action index among ``mask``; greedy ties go to the lowest index."""
    feasible = np.flatnonzero(mask)
    if feasible.size == 0:
        raise InputError("no feasible action")
    if rng.random() < eps:
        return int(feasible[rng.integers(feasible.size)])
    values = table.row(s)[feasible]
    return int(feasible[int(np.argmax(values))])


def adaptive_exploration_step(eps, gaps, cfg):
    """Boost epsilon when enough types deviate from belief, else decay it."""
    if int(np.sum(np.asarray(gaps) > cfg.gap_threshold)) >= cfg.gap_count:
        return max(eps, cfg.eps_boost)
    return max(cfg.eps_min, eps * cfg.eps_decay)


def learning_rate(cfg, step):
    return max(cfg.alpha_min, cfg.alpha0 * cfg.alpha_decay**step)


class QLearningAgent:
    """Stateful allocator: holds the live allocation, table, schedules and RNG."""

    def __init__(self, n_types, n_units, cfg=None, rng=None):
        self.cfg = cfg or AgentConfig()
        self.n_types = n_types
        self.n_units = n_units
        self.space = ActionSpace(n_types, n_units, self.cfg.delta_menu)
        self.table = QTable(len(self.space))
        self.rng = rng if rng is not None else np.random.default_rng()
        self.eps = self.cfg.eps0
        self.steps = 0
        self.alloc = None
        self.reward_log = deque(maxlen=self.cfg.reward_smooth_window)
        self._pending = None

    @property
    def alpha(self):
        return learning_rate(self.cfg, self.steps)

    def key(self, alloc, p_hat):
        return state_key(alloc, p_hat, self.cfg, self.n_units)

    def reset(self, alloc):
        self.alloc = check_allocation(alloc, n_units=self.n_units, n_types=self.n_types)
        self._pending = None

    def act(self, p_hat):
        """Choose and apply one reallocation; returns the new live allocation."""
        s = self.key(self.alloc, p_hat)
        a = select_action(self.table, s, self.space.feasible_mask(self.alloc), self.eps, self.rng)
        self.alloc = apply_action(self.alloc, self.space.actions[a], self.n_units)
        self._pending = (s, a, np.array(p_hat, copy=True))
        return self.alloc.copy()

    def simulate(self, alloc, p_hat):
        """Simulated term inputs for the hybrid reward: (counts, probs)."""
        if self.cfg.sim_reward == "expected":
            return None, 1.0 - g_tail(alloc, 1.0 - np.asarray(p_hat), self.cfg.tau)
        return self.rng.binomial(alloc, p_hat), None

    def smoothed(self, r):
        self.reward_log.append(r)
        return float(np.mean(self.reward_log))

    def learn(self, outcome, gaps, p_hat_after):
        """Online update from the live step just taken, then adapt epsilon
        and rehearse offline under the refreshed belief."""
        if self._pending is None:
            raise InputError("learn() called without a preceding act()")
        s, a, p_hat_before = self._pending
        self._pending = None
        sim, probs = self.simulate(self.alloc, p_hat_before)
        r = self.smoothed(hybrid_reward(sim, outcome, self.cfg, probs))
        s_next = self.key(self.alloc, p_hat_after)
        q_update(self.table, s, a, r, s_next, self.space.feasible_mask(self.alloc), self.cfg, self.alpha)
        self.steps += 1
        self.eps = adaptive_exploration_step(self.eps, gaps, self.cfg)
        self.rehearse(p_hat_after)
        return r

    def rehearse(self, p_hat):
        """Chained simulated transitions from the live allocation; the live
        allocation itself is left untouched."""
        p_hat = np.asarray(p_hat)
        if self.cfg.rehearsal_mode == "sweep":
            return self._sweep(p_hat)
        eps = self.eps if self.cfg.rehearsal_eps is None else self.cfg.rehearsal_eps
        chain = self.cfg.rehearsal_chain
        for k in range(self.cfg.offline_episodes):
            if k == 0 or (chain is not None and k % chain == 0):
                alloc = self.alloc
                s = self.key(alloc, p_hat)
                mask = self.space.feasible_mask(alloc)
            a = select_action(self.table, s, mask, eps, self.rng)
            alloc = apply_action(alloc, self.space.actions[a])
            x, probs = self.simulate(alloc, p_hat)
            r = hybrid_reward(x, None, self.cfg, probs)
            s_next = self.key(alloc, p_hat)
            mask = self.space.feasible_mask(alloc)
            q_update(self.table, s, a, r, s_next, mask, self.cfg, self.alpha)
            s = s_next

    def _sweep(self, p_hat):
        """One simulated update per feasible move from the live state (at most
        ``offline_episodes``), batched: every target is computed from the
        table as it stood before the sweep."""
        cfg = self.cfg
        feasible = np.flatnonzero(self.space.feasible_mask(self.alloc))
        idx = self.rng.permutation(feasible)[: cfg.offline_episodes]
        rows = np.arange(idx.size)
        src, dst, delta = self.space._src[idx], self.space._dst[idx], self.space._delta[idx]
        cand = np.tile(self.alloc, (idx.size, 1))
        cand[rows, src] -= delta
        cand[rows, dst] += delta
        if cfg.sim_reward == "expected":
            hit = 1.0 - g_tail(cand, 1.0 - p_hat[None, :], cfg.tau)
        else:
            hit = self.rng.binomial(cand, p_hat[None, :]) >= cfg.tau
        r = cfg.w1 * hit.sum(axis=1)
        s = self.key(self.alloc, p_hat)
        if cfg.gamma > 0:
            levels = np.minimum(cand // cfg.alloc_quantum, self.n_units // cfg.alloc_quantum)
            bins = s[self.n_types:]
            nxt = np.array([self.table.max_value(tuple(int(v) for v in lv) + bins, self.space.feasible_mask(c))
                            for lv, c in zip(levels, cand)])
            r = r + cfg.gamma * nxt
        row = self.table.row(s).copy()
        td = np.clip(r - row[idx], -cfg.q_clip, cfg.q_clip)
        for a, v in zip(idx, row[idx] + self.alpha * td):
            self.table.set(s, int(a), float(v))

    def export_qtable(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["state", "src", "dst", "delta", "value"])
            for key, a, v in self.table.items():
                act = self.space.actions[a]
                w.writerow([encode_key(key), act.src, act.dst, act.delta, f"{v:.10g}"])


def offline_rehearsal(agent, belief):
    agent.rehearse(belief.p_hat)
    return agent
