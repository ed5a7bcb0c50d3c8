#!/usr/bin/env python3
"""
Value Iteration
Kruzhkov-transformed Bellman machinery over a sample graph: staleness-gated
asynchronous updates, depth-limited back-propagation, and synchronous sweeps
to the fixed point of a frozen graph.

Values live on the transformed scale Theta = 1 - exp(-T) in [0, 1]; 1 marks
states from which the goal is unreachable at the current resolution.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from numpy.typing import NDArray

from ..core.errors import ContractViolation, NumericalError
from .sample_graph import Adjacency, Resolutions

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 1_000_000


def kruzhkov(t: float) -> float:
    """Time to transformed value: 1 - exp(-t), +inf -> 1."""
    if math.isnan(t) or t < 0:
        raise ContractViolation(f"time must be non-negative, got {t}")
    if math.isinf(t):
        return 1.0
    return -math.expm1(-t)


def kruzhkov_inv(v: float) -> float:
    """Transformed value to time: -ln(1 - v), 1 -> +inf."""
    if math.isnan(v) or v < 0.0 or v > 1.0:
        raise ContractViolation(f"transformed value must lie in [0, 1], got {v}")
    if v == 1.0:
        return math.inf
    return -math.log1p(-v)


def kruzhkov_inv_many(values: NDArray) -> NDArray:
    """Vectorized kruzhkov_inv."""
    values = np.asarray(values, dtype=float)
    if np.any(~((values >= 0.0) & (values <= 1.0))):
        raise ContractViolation("transformed values must lie in [0, 1]")
    times = np.full(values.shape, math.inf)
    finite = values < 1.0
    times[finite] = -np.log1p(-values[finite])
    return times


@dataclass
class UpdateReport:
    """Outcome of one asynchronous value-iteration step."""
    k: int
    updated: NDArray
    residual: float
    # vertex -> Theta before the step, for instrumentation
    before: Dict[int, float] = field(default_factory=dict, repr=False)


def bellman_apply(graph, x: int, theta: Optional[NDArray] = None, res: Optional[Resolutions] = None) -> float:
    """
    Transformed Bellman operator at one vertex.

    Goal-inflated vertices and vertices without one-hop neighbors keep their
    value; otherwise Delta + beta * min over F(x) of Theta.
    """
    theta = graph.theta if theta is None else theta
    res = res or graph.current_resolutions()
    if graph.env.in_goal_inflated(graph.states[x], graph.goal_radius(res)):
        return float(theta[x])
    neighbors = graph.one_hop(x)
    if not len(neighbors):
        return float(theta[x])
    return res.delta + res.beta * float(theta[neighbors].min())


def backprop(
    graph,
    x: int,
    m: int,
    theta: Optional[NDArray] = None,
    res: Optional[Resolutions] = None,
    goal: Optional[NDArray] = None,
    adjacency: Optional[Adjacency] = None
) -> float:
    """
    Depth-limited value propagation from x, updating theta in place.

    A vertex on the goal-inflated boundary or reached with no allowance left
    keeps its current value. Every other vertex within m - 1 hops of x is
    refreshed exactly once, at the largest allowance it is reached with, and
    always after the vertices one hop further out. The hop layers are kept on
    an explicit stack and refreshed deepest first, each layer in one
    vectorized pass, so the work is bounded by the edges reachable from x.

    Args:
        graph: Sample graph
        x: Vertex to refresh
        m: Recursion allowance
        theta: Value table (defaults to the graph's own, updated in place)
        res: Resolutions (defaults to the current ones)
        goal: Precomputed goal-inflation mask over the vertices
        adjacency: Pruned neighbor sets (defaults to graph.adjacency())

    Returns:
        The value of x after the call
    """
    if m < 0:
        raise ContractViolation(f"recursion allowance must be >= 0, got {m}")
    theta = graph.theta if theta is None else theta
    res = res or graph.current_resolutions()
    goal = graph.goal_mask(res) if goal is None else goal

    if goal[x] or m == 0:
        return float(theta[x])
    adjacency = adjacency or graph.adjacency()
    lengths = adjacency.lengths

    seen = goal.copy()
    seen[x] = True
    frontier = np.array([x], dtype=np.intp)
    stack: List[NDArray] = [frontier]
    for _ in range(1, m):
        reached = adjacency.neighbors_of(frontier)
        reached = reached[~seen[reached]]
        if not len(reached):
            break
        fresh = np.zeros(len(seen), dtype=bool)
        fresh[reached] = True
        frontier = np.flatnonzero(fresh)
        seen[frontier] = True
        stack.append(frontier)

    while stack:
        layer = stack.pop()
        layer = layer[lengths[layer] > 0]
        if len(layer):
            theta[layer] = res.delta + res.beta * adjacency.row_min(theta, layer)
    return float(theta[x])


def value_iteration_step(graph, k: int, m: int, instrument: bool = False) -> UpdateReport:
    """
    Refresh the stale set S = {x : staleness(x) = P, x in X_free + d B} by
    back-propagation in vertex-id order, then reset their staleness and age
    every other vertex (capped at P).

    Args:
        graph: Sample graph at its current size
        k: Iteration counter recorded in the report
        m: Recursion allowance for this iteration
        instrument: Keep the pre-update values of S in the report

    Returns:
        UpdateReport with the updated ids and max |change| over S
    """
    if m < 1:
        raise ContractViolation(f"recursion allowance must be >= 1, got {m}")
    res = graph.current_resolutions()
    theta = graph.theta
    staleness = graph.staleness
    goal = graph.goal_mask(res)
    free = graph.free_mask(res)

    stale = np.flatnonzero((staleness == graph.P) & free)
    before = theta[stale].copy()
    adjacency = graph.adjacency()
    for x in stale:
        backprop(graph, int(x), m, theta, res, goal, adjacency)

    residual = float(np.max(np.abs(theta[stale] - before))) if len(stale) else 0.0

    updated = np.zeros(graph.size, dtype=bool)
    updated[stale] = True
    staleness[~updated] = np.minimum(staleness[~updated] + 1, graph.P)
    staleness[updated] = 0

    report = UpdateReport(k=k, updated=stale, residual=residual)
    if instrument:
        report.before = dict(zip(stale.tolist(), before.tolist()))
    return report


class FrozenOperator:
    """Transformed Bellman operator of a frozen graph in CSR form."""

    def __init__(self, graph, res: Optional[Resolutions] = None):
        self.res = res or graph.current_resolutions()
        self.adjacency = graph.adjacency()
        lengths = self.adjacency.lengths

        # goal-inflated, outside the inflated free set, or isolated: held fixed
        self.fixed = graph.goal_mask(self.res) | ~graph.free_mask(self.res) | (lengths == 0)
        self.active = np.flatnonzero(~self.fixed)

    def neighbor_min(self, theta: NDArray) -> NDArray:
        """min over F(x) of theta for each active vertex."""
        if not len(self.active):
            return np.empty(0)
        return self.adjacency.row_min(theta, self.active)

    def apply(self, theta: NDArray) -> NDArray:
        """One Jacobi application; returns a new table."""
        out = np.array(theta, dtype=float, copy=True)
        if len(self.active):
            out[self.active] = self.res.delta + self.res.beta * self.neighbor_min(theta)
        return out


def bellman_sweep(graph, theta: Optional[NDArray] = None, res: Optional[Resolutions] = None) -> NDArray:
    """One synchronous (Jacobi) application of the transformed Bellman operator over all vertices."""
    theta = graph.theta if theta is None else theta
    return FrozenOperator(graph, res).apply(theta)


def solve_frozen(
    graph,
    tol: float = DEFAULT_TOL,
    theta0: Optional[NDArray] = None,
    max_sweeps: int = MAX_SWEEPS,
    res: Optional[Resolutions] = None
) -> NDArray:
    """
    Fixed point of the transformed Bellman operator on a frozen graph.

    Args:
        graph: Sample graph (not mutated)
        tol: Stop once ||T(theta) - theta||_inf < tol
        theta0: Starting table (defaults to a copy of the graph's values)
        max_sweeps: Sweep limit
        res: Resolutions (defaults to the current ones)

    Returns:
        Fixed-point value table

    Raises:
        NumericalError: No convergence within max_sweeps
    """
    if tol <= 0:
        raise ContractViolation(f"tol must be positive, got {tol}")
    operator = FrozenOperator(graph, res)
    theta = np.array(graph.theta if theta0 is None else theta0, dtype=float, copy=True)
    for sweep in range(1, max_sweeps + 1):
        updated = operator.apply(theta)
        change = float(np.max(np.abs(updated - theta))) if len(theta) else 0.0
        theta = updated
        if change < tol:
            logger.debug(f"solve_frozen converged after {sweep} sweeps")
            return theta
    raise NumericalError(
        f"no convergence after {max_sweeps} sweeps (beta={operator.res.beta:.6g}); check eps > d"
    )
