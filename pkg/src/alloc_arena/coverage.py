"""Coverage objective, binomial tail function and the exact greedy allocator.

Allocations are plain integer numpy arrays; ``check_allocation`` enforces the
budget and the one-unit floor wherever an allocation crosses a module boundary.
"""

import heapq

import numpy as np

from alloc_arena import AllocationError, InputError

SUPPORTED_TAUS = (1, 2, 3)


class UnsupportedThreshold(InputError):
    pass


class SingularInput(InputError):
    pass


def check_tau(tau):
    if tau not in SUPPORTED_TAUS:
        raise UnsupportedThreshold(f"detection threshold must be one of {SUPPORTED_TAUS}, got {tau!r}")
    return int(tau)


def check_allocation(alloc, n_units=None, n_types=None):
    """Return ``alloc`` as an int array after validating feasibility."""
    n = np.asarray(alloc)
    if n.ndim != 1 or n.size == 0:
        raise AllocationError(f"allocation must be a non-empty vector, got shape {n.shape}")
    if not np.all(np.equal(np.mod(n, 1), 0)):
        raise AllocationError(f"allocation must be integral: {n}")
    n = n.astype(np.int64)
    if n_types is not None and n.size != n_types:
        raise AllocationError(f"allocation has {n.size} entries, expected {n_types}")
    if np.any(n < 1):
        raise AllocationError(f"every type needs at least one unit: {n.tolist()}")
    if n_units is not None and int(n.sum()) != n_units:
        raise AllocationError(f"allocation sums to {int(n.sum())}, budget is {n_units}")
    return n


def uniform_allocation(n_types, n_units):
    """N div C each, remainder to the lowest indices."""
    if n_units < n_types:
        raise AllocationError(f"budget {n_units} cannot give {n_types} types one unit each")
    n = np.full(n_types, n_units // n_types, dtype=np.int64)
    n[: n_units % n_types] += 1
    return n


def expected_coverage(p, alloc):
    p = np.asarray(p, dtype=float)
    n = np.asarray(alloc)
    if p.shape != n.shape:
        raise InputError(f"probability vector {p.shape} and allocation {n.shape} differ in shape")
    return float(np.sum(1.0 - (1.0 - p) ** n))


def g_tail(n, q, tau=1):
    """P(fewer than ``tau`` detections) when ``n`` units each miss with prob ``q``.

    Written in polynomial-in-``n`` form so it extends to real ``n``. Accepts
    scalars or broadcastable arrays.
    """
    tau = check_tau(tau)
    n = np.asarray(n, dtype=float)
    q = np.asarray(q, dtype=float)
    p = 1.0 - q
    with np.errstate(divide="ignore", invalid="ignore"):
        out = q**n
        if tau >= 2:
            out = out + n * q ** (n - 1) * p
        if tau >= 3:
            out = out + 0.5 * n * (n - 1) * q ** (n - 2) * p**2
    return out[()] if out.ndim == 0 else out


def f_derivative(n, q, lam, tau=1):
    """d/dn g_tail(n, q, tau) minus ``lam``; the stationarity residual."""
    tau = check_tau(tau)
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0.0) | (q >= 1.0)):
        raise SingularInput("derivative needs 0 < q < 1")
    n = np.asarray(n, dtype=float)
    log_q = np.log(q)
    r = (1.0 - q) / q
    if tau == 1:
        bracket = log_q
    elif tau == 2:
        bracket = log_q * (1.0 + n * r) + r
    else:
        bracket = log_q * (1.0 + n * r + 0.5 * n * (n - 1) * r**2) + (r + 0.5 * r**2 * (2 * n - 1))
    out = q**n * bracket - lam
    return out[()] if np.ndim(out) == 0 else out


def marginal_gains(p, alloc, tau=1):
    """Drop in miss probability from giving each type one more unit."""
    q = 1.0 - np.asarray(p, dtype=float)
    n = np.asarray(alloc, dtype=float)
    return g_tail(n, q, tau) - g_tail(n + 1, q, tau)


def _gain(p, n, tau):
    if tau == 1:
        return p * (1.0 - p) ** n
    q = 1.0 - p
    return float(g_tail(n, q, tau) - g_tail(n + 1, q, tau))


def greedy_fill(p, start, n_units, tau=1):
    """Add units to ``start`` one at a time by largest marginal gain.

    Ties go to the lowest index. If ``start`` already exceeds the budget,
    units are removed from the types whose last unit is worth least (never
    below one unit).
    """
    p = np.asarray(p, dtype=float)
    n = np.array(start, dtype=np.int64)
    excess = int(n.sum()) - n_units
    while excess > 0:
        loss = np.array([_gain(p[i], n[i] - 1, tau) if n[i] > 1 else np.inf for i in range(n.size)])
        n[int(np.argmin(loss))] -= 1
        excess -= 1
    heap = [(-_gain(p[i], n[i], tau), i) for i in range(n.size)]
    heapq.heapify(heap)
    for _ in range(n_units - int(n.sum())):
        _, i = heapq.heappop(heap)
        n[i] += 1
        heapq.heappush(heap, (-_gain(p[i], n[i], tau), i))
    return n


def greedy_optimal_allocation(p, n_units, tau=1):
    """Exact maximizer of ``expected_coverage`` for tau=1.

    Each term ``1 - (1-p)^n`` is concave in ``n``, so taking the best marginal
    unit each time is optimal for the separable sum. For tau > 1 the terms
    are S-shaped and the result is only a heuristic.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InputError("probability vector must be non-empty and 1-D")
    if np.any((p < 0) | (p > 1)):
        raise InputError(f"probabilities must lie in [0, 1]: {p}")
    if n_units < p.size:
        raise AllocationError(f"budget {n_units} cannot give {p.size} types one unit each")
    return greedy_fill(p, np.ones(p.size, dtype=np.int64), n_units, tau)

