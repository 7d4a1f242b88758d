"""Budgeted test-unit allocation across drifting configuration types.

Environment simulator, coverage math, a Lagrangian threshold solver, a tabular
Q-learning allocator and a replicated experiment harness.
"""

__version__ = "0.1.0"


class AllocArenaError(Exception):
    """Base class for package errors."""


class ConfigError(AllocArenaError, ValueError):
    pass


class AllocationError(AllocArenaError, ValueError):
    pass


class InputError(AllocArenaError, ValueError):
    pass


class SequenceError(AllocArenaError, RuntimeError):
    pass


class ContractViolation(AllocArenaError, RuntimeError):
    """A non-oracle strategy was handed ground-truth probabilities."""
