"""The four allocation strategies behind one decide/observe interface.

Every strategy owns a ``BeliefState`` fed by its own observations. Only the
oracle may receive true probabilities; handing them to anything else raises
``ContractViolation``.
"""

import numpy as np

from alloc_arena import ConfigError, ContractViolation
from alloc_arena.agent import AgentConfig, QLearningAgent
from alloc_arena.coverage import greedy_optimal_allocation, uniform_allocation
from alloc_arena.estimation import BeliefState, expected_vs_observed_gap
from alloc_arena.lagrangian import LagrangianConfig, solve_allocation

KINDS = ("static", "rolling_lagrangian", "rl", "oracle")
EPS_Q = 1e-6


class Policy:
    kind = None
    sees_truth = False

    def __init__(self, n_types, n_units, burn_in=10, tau=1):
        self.n_types = n_types
        self.n_units = n_units
        self.burn_in = burn_in
        self.tau = tau
        self.belief = BeliefState(n_types, window=burn_in)
        self.uniform = uniform_allocation(n_types, n_units)

    def decide(self, t, true_p=None):
        if true_p is not None and not self.sees_truth:
            raise ContractViolation(f"{self.kind} policy must not see true probabilities")
        if self.sees_truth and true_p is None:
            raise ContractViolation("oracle needs the true probabilities")
        if t < self.burn_in and not self.sees_truth:
            return self.uniform.copy()
        return self._decide(t, true_p)

    def _decide(self, t, true_p):
        raise NotImplementedError

    def observe(self, alloc, outcome):
        self.belief.update(alloc, outcome)


class StaticPolicy(Policy):
    kind = "static"

    def __init__(self, *args, lagrangian=None, **kw):
        super().__init__(*args, **kw)
        self.lagrangian = lagrangian or LagrangianConfig()
        self.fixed = None

    def _decide(self, t, true_p):
        if self.fixed is None:
            self.fixed = solve_allocation(1.0 - self.belief.p_hat, self.n_units, self.tau, self.lagrangian)
        return self.fixed.copy()


class RollingLagrangianPolicy(Policy):
    kind = "rolling_lagrangian"

    def __init__(self, *args, lagrangian=None, **kw):
        super().__init__(*args, **kw)
        self.lagrangian = lagrangian or LagrangianConfig()

    def _decide(self, t, true_p):
        return solve_allocation(1.0 - self.belief.p_hat, self.n_units, self.tau, self.lagrangian)


class RLPolicy(Policy):
    kind = "rl"

    def __init__(self, *args, agent_cfg=None, rng=None, **kw):
        super().__init__(*args, **kw)
        self.agent = QLearningAgent(self.n_types, self.n_units, agent_cfg or AgentConfig(tau=self.tau), rng)
        self._live = False

    def decide(self, t, true_p=None):
        self._live = t >= self.burn_in
        return super().decide(t, true_p)

    def _decide(self, t, true_p):
        if self.agent.alloc is None:
            self.agent.reset(self.uniform)
        return self.agent.act(self.belief.p_hat)

    def observe(self, alloc, outcome):
        if not self._live:
            return super().observe(alloc, outcome)
        gaps = expected_vs_observed_gap(self.belief, alloc, outcome)
        self.belief.update(alloc, outcome)
        self.agent.learn(outcome, gaps, self.belief.p_hat)


class OraclePolicy(Policy):
    kind = "oracle"
    sees_truth = True

    def __init__(self, *args, method="greedy", lagrangian=None, **kw):
        super().__init__(*args, **kw)
        if method not in ("greedy", "lagrangian"):
            raise ConfigError(f"oracle method must be greedy or lagrangian, got {method!r}")
        self.method = method
        self.lagrangian = lagrangian or LagrangianConfig()

    def _decide(self, t, true_p):
        p = np.asarray(true_p, dtype=float)
        if self.method == "greedy":
            return greedy_optimal_allocation(p, self.n_units, self.tau)
        q = np.clip(1.0 - p, EPS_Q, 1 - EPS_Q)
        return solve_allocation(q, self.n_units, self.tau, self.lagrangian)


def make_policy(kind, n_types, n_units, burn_in=10, tau=1, rng=None, agent_cfg=None, lagrangian=None,
                oracle_method="greedy"):
    common = dict(burn_in=burn_in, tau=tau)
    if kind == "static":
        return StaticPolicy(n_types, n_units, lagrangian=lagrangian, **common)
    if kind == "rolling_lagrangian":
        return RollingLagrangianPolicy(n_types, n_units, lagrangian=lagrangian, **common)
    if kind == "rl":
        return RLPolicy(n_types, n_units, agent_cfg=agent_cfg, rng=rng, **common)
    if kind == "oracle":
        return OraclePolicy(n_types, n_units, method=oracle_method, lagrangian=lagrangian, **common)
    raise ConfigError(f"unknown strategy {kind!r}; expected one of {KINDS}")
