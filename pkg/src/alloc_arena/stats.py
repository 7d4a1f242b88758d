"""Coverage and estimation-error metrics and the Wilcoxon signed-rank test."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata

from alloc_arena import InputError

log = logging.getLogger(__name__)


class DegenerateSample(InputError):
    pass


def coverage(outcome, tau=1):
    """Number of types with at least ``tau`` signals."""
    return int(np.sum(np.asarray(outcome) >= tau))


def estimation_mse(p_hat, p_true):
    a = np.asarray(p_hat, dtype=float)
    b = np.asarray(p_true, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


@dataclass
class WilcoxonResult:
    W: float
    n_effective: int
    z: float
    p_value: float
    median_diff: float


def wilcoxon_signed_rank(x, y, zero_method="wilcox", continuity=True):
    """Paired two-sided signed-rank test on d = x - y.

    ``W`` is the signed rank sum, so it is positive when ``x`` tends to be
    larger. The p-value uses the normal approximation with average ranks
    for ties, the tie-corrected variance and a continuity correction of 1
    on the W scale (0.5 on the positive-rank-sum scale).

    ``zero_method="wilcox"`` drops zero differences before ranking;
    ``"pratt"`` ranks them and then drops them from the sum.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if d.ndim != 1:
        raise InputError("paired samples must be 1-D and equal in length")
    if zero_method not in ("wilcox", "pratt"):
        raise InputError(f"zero_method must be 'wilcox' or 'pratt', got {zero_method!r}")
    nonzero = d != 0
    if not nonzero.any():
        raise DegenerateSample("all paired differences are zero")
    median_diff = float(np.median(d))
    if zero_method == "wilcox":
        d = d[nonzero]
        ranks = rankdata(np.abs(d))
    else:
        ranks = rankdata(np.abs(d))[nonzero]
        d = d[nonzero]
    n = d.size
    if n < 5:
        log.warning("only %d non-zero differences; the normal approximation is rough", n)
    W = float(np.sum(ranks * np.sign(d)))
    # sign-flip variance of W; with average ranks this is n(n+1)(2n+1)/6 - sum(t^3 - t)/12
    var = float(np.sum(ranks**2))
    num = max(abs(W) - (1.0 if continuity else 0.0), 0.0)
    z = math.copysign(num / math.sqrt(var), W) if var > 0 else 0.0
    p = float(min(1.0, 2.0 * norm.sf(abs(z))))
    return WilcoxonResult(W, n, z, p, median_diff)
