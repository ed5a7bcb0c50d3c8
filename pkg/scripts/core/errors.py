#!/usr/bin/env python3
"""
Planner Errors
Exception hierarchy shared by the planner, evaluation and experiment scripts.
"""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_BUDGET_EXHAUSTED = 3


class PlannerError(Exception):
    """Base class for all planner failures."""
    exit_code = 1


class ConfigError(PlannerError):
    """Scenario configuration is invalid or inconsistent."""
    exit_code = EXIT_CONFIG_ERROR


class SamplerExhausted(ConfigError):
    """Rejection sampling could not find a free state (free space effectively empty)."""


class BudgetExhausted(PlannerError):
    """Sample or time budget ran out before the run reached its goal."""
    exit_code = EXIT_BUDGET_EXHAUSTED


class NumericalError(PlannerError):
    """A numerical procedure failed to converge or an asserted property broke."""


class ContractViolation(ValueError):
    """A pure function was called outside its precondition."""
