import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alloc_arena import InputError
from alloc_arena.estimation import BeliefState, expected_vs_observed_gap, update_belief


def test_two_step_weights():
    b = BeliefState(1, window=2)
    b.update([10], [2])  # rate 0.2
    b.update([10], [5])  # rate 0.5, most recent
    assert b.p_hat[0] == pytest.approx(2 / 3 * 0.5 + 1 / 3 * 0.2, abs=1e-12)
    assert b.p_hat[0] == pytest.approx(0.4, abs=1e-12)


def test_zero_rate_is_clipped():
    b = update_belief(BeliefState(1), [7], [0])
    assert b.p_hat[0] == 1e-6


def test_full_rate_is_clipped():
    b = update_belief(BeliefState(1), [7], [7])
    assert b.p_hat[0] == 1 - 1e-6


@given(st.floats(0.01, 0.99), st.integers(1, 15), st.integers(1, 10))
def test_constant_rates_are_a_fixed_point(r, steps, window):
    n = 1000
    x = r * n
    b = BeliefState(2, window=window)
    for _ in range(steps):
        b.update([n, n], [x, x])
    assert np.allclose(b.p_hat, r, atol=1e-12)


def test_window_holds_at_most_l_entries():
    b = BeliefState(3, window=4)
    for k in range(9):
        b.update([5, 5, 5], [k % 5, 1, 2])
    assert len(b) == 4


def test_old_entries_leave_the_window():
    b = BeliefState(1, window=2)
    b.update([10], [10])
    b.update([10], [3])
    b.update([10], [3])
    assert b.p_hat[0] == pytest.approx(0.3)


def test_prior_before_any_observation():
    assert np.all(BeliefState(4).p_hat == 0.5)


def test_update_belief_does_not_mutate():
    b = BeliefState(2)
    b2 = update_belief(b, [3, 3], [1, 2])
    assert len(b) == 0 and len(b2) == 1
    assert np.all(b.p_hat == 0.5)


def test_dimension_mismatch():
    with pytest.raises(InputError):
        BeliefState(3).update([1, 2], [0, 1])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(1, 50), st.floats(0, 1)), min_size=1, max_size=20))
def test_estimates_never_hit_zero_or_one(steps):
    b = BeliefState(1)
    for n, frac in steps:
        b.update([n], [int(round(frac * n))])
        assert 0 < b.p_hat[0] < 1


def test_gap_zero_when_rate_matches():
    b = BeliefState(2)
    b.p_hat = np.array([0.25, 0.5])
    assert np.allclose(expected_vs_observed_gap(b, [4, 10], [1, 5]), 0)


def test_gap_arithmetic():
    b = BeliefState(1)
    b.p_hat = np.array([0.1])
    assert expected_vs_observed_gap(b, [100], [30])[0] == pytest.approx(0.2)


def test_stationary_consistency():
    # fixed p, fixed n_i = 30, 200 steps: the final estimate lands within 0.1
    p = np.linspace(0.05, 0.5, 10)
    n = np.full(p.size, 30)
    hits = np.zeros(p.size)
    runs = 100
    for seed in range(runs):
        rng = np.random.default_rng(seed)
        b = BeliefState(p.size)
        for _ in range(200):
            b.update(n, rng.binomial(n, p))
        hits += np.abs(b.p_hat - p) < 0.1
    assert np.all(hits / runs >= 0.95)
