import numpy as np
import pytest
from scipy import stats as sps

from alloc_arena import AllocationError, ConfigError, SequenceError
from alloc_arena.env import (
    EnvConfig,
    EnvState,
    RegimeShift,
    SignalStream,
    advance_env,
    default_shift_schedule,
    init_env,
    sample_signals,
    simulate_trajectory,
)
from oracles import binomial_pmf


def test_beta_init_mean():
    cfg = EnvConfig(n_types=10_000, n_units=10_000, shifts=[], seed=7)
    q = init_env(cfg).q
    assert abs(q.mean() - 6 / 7) < 0.01


def test_beta_one_one_is_uniform():
    cfg = EnvConfig(n_types=5000, n_units=5000, beta_a=1, beta_b=1, shifts=[], seed=3)
    q = init_env(cfg).q
    assert sps.kstest(q, "uniform").pvalue > 0.01


def test_init_deterministic():
    cfg = EnvConfig(seed=11)
    np.testing.assert_array_equal(init_env(cfg).q, init_env(cfg).q)
    assert init_env(cfg).t == 0


def test_config_validation():
    with pytest.raises(ConfigError):
        EnvConfig(n_types=0)
    with pytest.raises(ConfigError):
        EnvConfig(n_types=5, n_units=4)
    with pytest.raises(ConfigError):
        EnvConfig(drift_sigma=-1)
    with pytest.raises(ConfigError):
        EnvConfig(beta_a=0)
    with pytest.raises(ConfigError):
        EnvConfig(shifts=[RegimeShift(10, 5, 0.5)])
    with pytest.raises(ConfigError):
        EnvConfig(shifts=[RegimeShift(0, 100, 0.5)])
    with pytest.raises(ConfigError):
        EnvConfig(shifts=[RegimeShift(0, 5, 1.5)])


def test_zero_drift_keeps_q():
    cfg = EnvConfig(drift_sigma=0.0, shifts=[])
    rng = np.random.default_rng(0)
    s0 = init_env(cfg, rng)
    s = s0
    for _ in range(20):
        s = advance_env(s, cfg, rng)
    np.testing.assert_array_equal(s.q, s0.q)
    assert s.t == 20


def test_clip_at_one():
    class FixedNoise:
        def normal(self, loc, scale, size):
            return np.full(size, 0.05)

    cfg = EnvConfig(n_types=1, n_units=1, shifts=[])
    s = advance_env(EnvState(0, np.array([0.99])), cfg, FixedNoise())
    assert s.q[0] == 1.0


def test_shift_sets_exact_value():
    cfg = EnvConfig(shifts=[RegimeShift(0, 30, 0.7)], seed=1)
    traj = simulate_trajectory(cfg, np.random.default_rng(1))
    assert traj[30, 0] == 0.7
    assert traj[29, 0] != 0.7


def test_advance_past_horizon():
    cfg = EnvConfig(horizon=2, shifts=[])
    rng = np.random.default_rng(0)
    s = advance_env(init_env(cfg, rng), cfg, rng)
    with pytest.raises(SequenceError):
        advance_env(s, cfg, rng)


def test_default_shift_schedule():
    sched = default_shift_schedule()
    assert len(sched) == 3
    assert sched[0] == RegimeShift(0, 30, 0.7)
    assert sched[1] == RegimeShift(1, 40, 0.95)
    assert sched[2] == RegimeShift(2, 50, 0.95)


def test_q_stays_in_unit_interval():
    cfg = EnvConfig(drift_sigma=0.2, seed=5)
    traj = simulate_trajectory(cfg, np.random.default_rng(5))
    assert traj.min() >= 0.0 and traj.max() <= 1.0


def test_trajectory_reproducible():
    cfg = EnvConfig(seed=9)
    a = simulate_trajectory(cfg, np.random.default_rng(9))
    b = simulate_trajectory(cfg, np.random.default_rng(9))
    np.testing.assert_array_equal(a, b)


def test_sample_signals_extremes():
    rng = np.random.default_rng(0)
    alloc = np.array([4, 6])
    for _ in range(50):
        x = sample_signals(EnvState(0, np.array([1.0, 0.0])), alloc, rng)
        assert x.tolist() == [0, 6]


def test_sample_signals_mean():
    rng = np.random.default_rng(1)
    state = EnvState(0, np.array([0.9]))
    xs = [sample_signals(state, [300], rng)[0] for _ in range(10_000)]
    assert abs(np.mean(xs) - 30) < 0.5


def test_sample_signals_infeasible():
    with pytest.raises(AllocationError):
        sample_signals(EnvState(0, np.array([0.5, 0.5])), [0, 3], np.random.default_rng(0))
    with pytest.raises(AllocationError):
        sample_signals(EnvState(0, np.array([0.5, 0.5])), [2, 3], np.random.default_rng(0), n_units=4)


@pytest.mark.parametrize("source", ["rng", "stream"])
def test_binomial_pmf_total_variation(source):
    n, p, reps = 5, 0.3, 100_000
    if source == "rng":
        rng = np.random.default_rng(42)
        draws = sample_signals(EnvState(0, np.full(reps, 1 - p)), np.full(reps, n), rng)
    else:
        steps, width = 1000, reps // 1000
        stream = SignalStream(np.random.default_rng(42), steps, width, n * width)
        q = np.full(width, 1 - p)
        draws = np.concatenate([stream.draw(t, q, np.full(width, n)) for t in range(steps)])
    emp = np.bincount(draws, minlength=n + 1) / reps
    tv = 0.5 * np.abs(emp - binomial_pmf(n, p)).sum()
    assert tv < 0.01


def test_signal_stream_common_numbers():
    stream = SignalStream(np.random.default_rng(3), 4, 3, 30)
    q = np.array([0.8, 0.9, 0.5])
    a = stream.draw(2, q, [10, 10, 10])
    b = stream.draw(2, q, [10, 15, 5])
    assert a[0] == b[0]  # same units for type 0 -> same outcome
    assert b[1] >= a[1] and b[2] <= a[2]  # monotone in units
    np.testing.assert_array_equal(a, stream.draw(2, q, [10, 10, 10]))
