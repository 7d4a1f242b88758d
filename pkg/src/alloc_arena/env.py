"""Non-stationary environment: Beta-initialized miss probabilities with
Gaussian drift, scheduled regime shifts, and binomial signal sampling."""

from dataclasses import dataclass, field

import numpy as np

from alloc_arena import ConfigError, SequenceError
from alloc_arena.coverage import check_allocation


@dataclass(frozen=True)
class RegimeShift:
    type_index: int
    at_step: int
    new_q: float


def default_shift_schedule():
    return [RegimeShift(0, 30, 0.7), RegimeShift(1, 40, 0.95), RegimeShift(2, 50, 0.95)]


@dataclass
class EnvConfig:
    n_types: int = 10
    n_units: int = 300
    horizon: int = 100
    drift_sigma: float = 0.01
    beta_a: float = 6.0
    beta_b: float = 1.0
    shifts: list = field(default_factory=default_shift_schedule)
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_types < 1:
            raise ConfigError(f"n_types must be >= 1, got {self.n_types}")
        if self.n_units < self.n_types:
            raise ConfigError(f"n_units ({self.n_units}) must be >= n_types ({self.n_types})")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.drift_sigma < 0:
            raise ConfigError(f"drift_sigma must be >= 0, got {self.drift_sigma}")
        if self.beta_a <= 0 or self.beta_b <= 0:
            raise ConfigError("Beta parameters must be positive")
        for s in self.shifts:
            if not 0 <= s.type_index < self.n_types:
                raise ConfigError(f"shift type_index {s.type_index} outside [0, {self.n_types})")
            if not 0 <= s.at_step < self.horizon:
                raise ConfigError(f"shift at_step {s.at_step} outside [0, {self.horizon})")
            if not 0.0 <= s.new_q <= 1.0:
                raise ConfigError(f"shift new_q {s.new_q} outside [0, 1]")


@dataclass(frozen=True)
class EnvState:
    t: int
    q: np.ndarray

    @property
    def p(self):
        return 1.0 - self.q


def _apply_shifts(q, t, shifts):
    for s in shifts:
        if s.at_step == t:
            q[s.type_index] = s.new_q
    return q


def init_env(cfg, rng=None):
    """Draw q_i(0) ~ Beta(a, b). Without ``rng`` the draw is seeded from ``cfg.seed``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    q = rng.beta(cfg.beta_a, cfg.beta_b, size=cfg.n_types)
    return EnvState(0, _apply_shifts(q, 0, cfg.shifts))


def advance_env(state, cfg, rng):
    """One step of drift, then clip to [0, 1], then any shift due at t+1."""
    if state.t + 1 >= cfg.horizon:
        raise SequenceError(f"cannot advance past horizon {cfg.horizon} (t={state.t})")
    q = state.q + rng.normal(0.0, cfg.drift_sigma, size=state.q.size)
    q = np.clip(q, 0.0, 1.0)
    return EnvState(state.t + 1, _apply_shifts(q, state.t + 1, cfg.shifts))


def sample_signals(state, alloc, rng, n_units=None):
    n = check_allocation(alloc, n_units=n_units, n_types=state.q.size)
    return rng.binomial(n, 1.0 - state.q)


def simulate_trajectory(cfg, rng):
    """Full (horizon, n_types) array of miss probabilities q_i(t)."""
    state = init_env(cfg, rng)
    out = np.empty((cfg.horizon, cfg.n_types))
    out[0] = state.q
    for t in range(1, cfg.horizon):
        state = advance_env(state, cfg, rng)
        out[t] = state.q
    return out


class SignalStream:
    """Common-random-number signal source for one replication.

    One uniform is drawn per (step, type, unit slot) up front; a type given
    ``n`` units at step ``t`` detects ``sum(U[t, i, :n] < p)`` signals, which
    is exactly Binomial(n, p). Two strategies that give a type the same units
    at the same step see the same outcome, and outcomes are monotone in ``n``.
    """

    def __init__(self, rng, horizon, n_types, n_units):
        self.n_units = n_units
        self._u = rng.random((horizon, n_types, n_units))

    def draw(self, t, q, alloc):
        n = check_allocation(alloc, n_units=self.n_units, n_types=len(q))
        hits = np.cumsum(self._u[t] < (1.0 - np.asarray(q))[:, None], axis=1)
        return hits[np.arange(n.size), n - 1].astype(np.int64)
