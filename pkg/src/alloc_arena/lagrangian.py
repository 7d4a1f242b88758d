"""Lagrangian threshold allocation: grid search over the multiplier with a
per-type stationarity solve (closed form for tau=1, bisection otherwise)."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from alloc_arena import AllocArenaError, ConfigError, InputError
from alloc_arena.coverage import SingularInput, check_tau, f_derivative, g_tail, greedy_fill

log = logging.getLogger(__name__)


class BracketError(AllocArenaError):
    pass


class ConvergenceError(AllocArenaError):
    pass


class DomainError(InputError):
    pass


@dataclass
class LagrangianConfig:
    lambda_min: float = -0.5
    lambda_max: float = -1e-6
    grid_points: int = 2000
    bisect_tol: float = 1e-8
    n_tol: float = 1e-9
    max_iters: int = 200
    budget_tol: Optional[float] = None  # None -> 0.5 * n_types
    scan_intervals: int = 16

    def __post_init__(self):
        if not self.lambda_min < self.lambda_max < 0:
            raise ConfigError("need lambda_min < lambda_max < 0")
        if self.grid_points < 2:
            raise ConfigError("grid_points must be >= 2")
        if self.bisect_tol <= 0 or self.n_tol <= 0 or (self.budget_tol is not None and self.budget_tol <= 0):
            raise ConfigError("tolerances must be positive")
        if self.max_iters < 1 or self.scan_intervals < 1:
            raise ConfigError("max_iters and scan_intervals must be >= 1")

    def grid(self):
        """Log-spaced multipliers from lambda_min up to lambda_max."""
        return -np.geomspace(-self.lambda_min, -self.lambda_max, self.grid_points)


@dataclass
class LagrangianSolution:
    alloc: np.ndarray
    lam: float
    n_continuous: np.ndarray
    objective: float
    fallback: bool


def closed_form_n(q, lam):
    """Root of q^n ln q = lam, i.e. log(lam / ln q) / ln q."""
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise SingularInput("closed form needs 0 < q < 1")
    log_q = np.log(q)
    ratio = lam / log_q
    if np.any(ratio <= 0):
        raise DomainError(f"lam / ln(q) must be positive (lam={lam})")
    out = np.log(ratio) / log_q
    return out[()] if out.ndim == 0 else out


def _find_bracket(fn, lo, hi, intervals):
    """Rightmost subinterval of [lo, hi] where ``fn`` goes from <0 to >=0.

    With an S-shaped tail function the residual can cross zero twice; the
    right crossing is the one on the convex branch, i.e. the minimizer.
    """
    xs = np.linspace(lo, hi, intervals + 1)
    fs = fn(xs)
    for k in range(intervals - 1, -1, -1):
        if fs[k] < 0 <= fs[k + 1] or fs[k] > 0 >= fs[k + 1]:
            return xs[k], xs[k + 1]
    return None


def bisect_n(q, lam, tau=1, cfg=None, n_max=300.0, n_min=1.0):
    """Solve f(n, q, lam) = 0 on [n_min, n_max] by midpoint bisection.

    Raises ``BracketError`` when no sign change is found in the scan and
    ``ConvergenceError`` when ``max_iters`` halvings do not meet both
    ``|f| < bisect_tol`` and a bracket width below ``n_tol``.
    """
    cfg = cfg or LagrangianConfig()
    tau = check_tau(tau)

    def fn(n):
        return f_derivative(n, q, lam, tau)

    bracket = _find_bracket(fn, n_min, n_max, cfg.scan_intervals)
    if bracket is None:
        raise BracketError(f"no sign change of f on [{n_min}, {n_max}] for q={q}, lam={lam}")
    n1, n2 = bracket
    f1 = fn(n1)
    for _ in range(cfg.max_iters):
        mid = 0.5 * (n1 + n2)
        fm = fn(mid)
        if abs(fm) < cfg.bisect_tol and (n2 - n1) < cfg.n_tol:
            return float(mid)
        if (f1 < 0) != (fm < 0):  # sign test; the product can underflow
            n2 = mid
        else:
            n1, f1 = mid, fm
    raise ConvergenceError(f"bisection did not converge in {cfg.max_iters} iterations (q={q}, lam={lam})")


def _bisect_grid(q, lams, tau, n_max, cfg):
    """Vectorized ``bisect_n`` over every (lam, q) pair, with missing brackets
    resolved to the bound the residual's sign points at."""
    Q = np.broadcast_to(q[None, :], (lams.size, q.size))
    L = np.broadcast_to(lams[:, None], Q.shape)
    xs = np.linspace(1.0, n_max, cfg.scan_intervals + 1)
    fs = np.stack([f_derivative(x, Q, L, tau) for x in xs])  # (K+1, G, C)
    crossing = ((fs[:-1] < 0) & (fs[1:] >= 0)) | ((fs[:-1] > 0) & (fs[1:] <= 0))
    has = crossing.any(axis=0)
    k = cfg.scan_intervals - 1 - np.argmax(crossing[::-1], axis=0)
    lo = xs[k]
    hi = xs[np.minimum(k + 1, cfg.scan_intervals)]
    f_lo = f_derivative(lo, Q, L, tau)
    for _ in range(cfg.max_iters):
        mid = 0.5 * (lo + hi)
        fm = f_derivative(mid, Q, L, tau)
        left = (f_lo < 0) != (fm < 0)
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        f_lo = np.where(left, f_lo, fm)
        if np.max(hi - lo) < cfg.n_tol:
            break
    n = 0.5 * (lo + hi)
    # no crossing: residual positive everywhere -> the lower bound, negative -> the upper
    n = np.where(has, n, np.where(fs[-1] < 0, n_max, 1.0))
    # a last crossing that goes + to - leaves the residual negative up to n_max
    n = np.where(has & (fs[-1] < 0), n_max, n)
    return n


def continuous_allocations(q, n_units, tau=1, cfg=None):
    """Continuous per-type solutions n_i(lam) on the grid, clamped to [1, N]."""
    cfg = cfg or LagrangianConfig()
    q = np.asarray(q, dtype=float)
    lams = cfg.grid()
    if tau == 1:
        n = closed_form_n(q[None, :], lams[:, None])
    else:
        n = _bisect_grid(q, lams, tau, float(n_units), cfg)
    return lams, np.clip(n, 1.0, float(n_units))


def solve_allocation_detail(q, n_units, tau=1, cfg=None):
    cfg = cfg or LagrangianConfig()
    tau = check_tau(tau)
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise InputError("q must be a non-empty vector")
    if np.any((q <= 0) | (q >= 1)):
        raise SingularInput(f"every q_i must lie strictly inside (0, 1): {q}")
    if n_units < q.size:
        raise InputError(f"budget {n_units} is below the number of types {q.size}")
    budget_tol = 0.5 * q.size if cfg.budget_tol is None else cfg.budget_tol

    lams, n = continuous_allocations(q, n_units, tau, cfg)
    gap = np.abs(n.sum(axis=1) - n_units)
    objective = g_tail(n, q[None, :], tau).sum(axis=1)
    ok = gap < budget_tol
    fallback = not ok.any()
    starts = np.maximum(np.floor(n), 1).astype(np.int64)
    if fallback:
        best = int(np.argmin(gap))
        log.info("no multiplier met the budget tolerance %.3g; closest sum is off by %.3g", budget_tol, gap[best])
        alloc = greedy_fill(1.0 - q, starts[best], n_units, tau)
    else:
        # compare candidates on the integer allocation each one rounds to,
        # since the band admits continuous sums on both sides of N
        best, alloc, best_obj = None, None, np.inf
        seen = set()
        for k in np.flatnonzero(ok):
            key = starts[k].tobytes()
            if key in seen:
                continue
            seen.add(key)
            cand = greedy_fill(1.0 - q, starts[k], n_units, tau)
            obj = float(g_tail(cand, q, tau).sum())
            if obj < best_obj - 1e-15:
                best, alloc, best_obj = int(k), cand, obj
    return LagrangianSolution(alloc, float(lams[best]), n[best], float(objective[best]), fallback)


def solve_allocation(q, n_units, tau=1, cfg=None):
    """Integer allocation minimizing the summed miss probability under the budget."""
    return solve_allocation_detail(q, n_units, tau, cfg).alloc
