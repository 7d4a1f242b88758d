"""Independent reference computations used as test oracles."""

import itertools
import math

import numpy as np


def binomial_cdf(k, n, p):
    """P(Bin(n, p) <= k) by direct pmf summation."""
    return sum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(0, min(k, n) + 1))


def binomial_pmf(n, p):
    return np.array([math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(n + 1)])


def compositions(total, parts):
    """All tuples of ``parts`` positive integers summing to ``total``."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def brute_force_coverage(p, total):
    """(best expected coverage, all optimal allocations) by exhaustive search."""
    p = np.asarray(p, dtype=float)
    best, argbest = -1.0, []
    for n in compositions(total, p.size):
        v = float(np.sum(1.0 - (1.0 - p) ** np.array(n)))
        if v > best + 1e-12:
            best, argbest = v, [n]
        elif abs(v - best) <= 1e-12:
            argbest.append(n)
    return best, argbest


def central_difference(fn, x, h=1e-5):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def exact_signed_rank_pvalue(d):
    """Two-sided sign-flip permutation p-value of the signed rank sum.

    Zeros dropped, average ranks for ties; enumerates all 2^n sign patterns.
    """
    d = np.asarray(d, dtype=float)
    d = d[d != 0]
    n = d.size
    absd = np.abs(d)
    order = np.argsort(absd, kind="mergesort")
    ranks = np.empty(n)
    sorted_abs = absd[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_abs[j + 1] == sorted_abs[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    observed = abs(float(np.sum(ranks * np.sign(d))))
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    stats = np.abs(signs @ ranks)
    return float(np.mean(stats >= observed - 1e-9)), float(np.sum(ranks * np.sign(d)))
