"""Rolling recency-weighted estimates of per-type detection probabilities."""

from collections import deque

import numpy as np

from alloc_arena import InputError


class BeliefState:
    """Window of the last ``window`` (allocation, outcome) pairs and the
    resulting estimate ``p_hat``.

    The estimate is a weighted mean of per-step rates X/n with weight 1/k on
    the k-th most recent step, normalized over the steps actually held, then
    clipped to [eps_clip, 1 - eps_clip]. Before any observation ``p_hat`` sits
    at ``prior`` for every type.
    """

    def __init__(self, n_types, window=10, eps_clip=1e-6, prior=0.5):
        if window < 1:
            raise InputError(f"window must be >= 1, got {window}")
        self.n_types = n_types
        self.window = window
        self.eps_clip = eps_clip
        self.history = deque(maxlen=window)
        self.p_hat = np.full(n_types, np.clip(prior, eps_clip, 1 - eps_clip))

    def __len__(self):
        return len(self.history)

    def copy(self):
        other = BeliefState(self.n_types, self.window, self.eps_clip)
        other.history = deque(self.history, maxlen=self.window)
        other.p_hat = self.p_hat.copy()
        return other

    def update(self, alloc, outcome):
        n = np.asarray(alloc, dtype=float)
        x = np.asarray(outcome, dtype=float)
        if n.shape != (self.n_types,) or x.shape != (self.n_types,):
            raise InputError(f"expected vectors of length {self.n_types}, got {n.shape} and {x.shape}")
        self.history.append(x / n)
        rates = np.array(self.history)[::-1]  # most recent first
        w = 1.0 / np.arange(1, len(rates) + 1)
        w /= w.sum()
        self.p_hat = np.clip(w @ rates, self.eps_clip, 1 - self.eps_clip)
        return self


def update_belief(belief, alloc, outcome):
    """Non-mutating form of ``BeliefState.update``."""
    return belief.copy().update(alloc, outcome)


def expected_vs_observed_gap(belief, alloc, outcome):
    n = np.asarray(alloc, dtype=float)
    x = np.asarray(outcome, dtype=float)
    if n.shape != belief.p_hat.shape or x.shape != belief.p_hat.shape:
        raise InputError("allocation, outcome and belief must have matching length")
    return np.abs(x / n - belief.p_hat)
