#!/usr/bin/env python3
"""
Multigrid Baseline
Synchronous value iteration to the fixed point on successively finer uniform
lattices, each warm-started from the previous lattice by nearest-neighbor
value transfer.
"""
import math
import time
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from ..core.errors import ConfigError
from ..planner.dynamics import DynamicsModel
from ..planner.geometry import Environment
from ..planner.sample_graph import FixedResolutions, ResolutionSchedule, SampleGraph
from ..planner.value_iteration import solve_frozen
from .metrics import rmse

logger = logging.getLogger(__name__)


@dataclass
class MultigridLevel:
    """Result of solving one lattice."""
    resolution: float
    size: int
    wall_s: float
    rmse: float
    excluded: int

    def row(self, record_timing: bool = True) -> list:
        return [self.wall_s if record_timing else 0, self.size, self.rmse, self.excluded]


def lattice(env: Environment, h: float) -> NDArray:
    """Uniform lattice of spacing h (metric units) restricted to X_free + h B."""
    axes = []
    for lo, hi in zip(env.workspace_lo - h, env.workspace_hi + h):
        count = int(math.floor((hi - lo) / h + 1e-9)) + 1
        axes.append(lo + h * np.arange(count))
    if env.metric.angular:
        scale = env.metric.angle_scale
        count = int(math.floor(2.0 * scale / h + 1e-9))
        axes.append(-scale + h * np.arange(count))
    mesh = np.meshgrid(*axes, indexing='ij')
    points = np.column_stack([m.ravel() for m in mesh])
    if env.metric.angular:
        points = env.metric.from_metric_angle(points)
    return points[env.free_mask(points, h)]


def multigrid_baseline(
    env: Environment,
    model: DynamicsModel,
    resolutions: Sequence[float],
    schedule: ResolutionSchedule,
    oracle=None,
    tol: float = 1e-9,
    on_level: Optional[Callable[[MultigridLevel], None]] = None
) -> List[MultigridLevel]:
    """
    Solve each lattice coarse-to-fine and record cumulative wall time and RMSE.

    eps and rho per lattice follow the planner's rules with d equal to the
    lattice spacing.

    Args:
        env: Scene
        model: Dynamics model
        resolutions: Strictly decreasing lattice spacings
        schedule: Source of the eps and rho rules
        oracle: Ground truth for RMSE (nan RMSE when None)
        tol: Fixed-point tolerance per lattice
        on_level: Called after every solved lattice

    Returns:
        One MultigridLevel per resolution
    """
    if any(b >= a for a, b in zip(resolutions, resolutions[1:])) or any(r <= 0 for r in resolutions):
        raise ConfigError(f"multigrid resolutions must be positive and strictly decreasing, got {list(resolutions)}")

    levels: List[MultigridLevel] = []
    previous_points: Optional[NDArray] = None
    previous_theta: Optional[NDArray] = None
    compute_s = 0.0

    for h in resolutions:
        level_start = time.perf_counter()
        eps = schedule.epsilon(h)
        if eps <= h:
            raise ConfigError(f"lattice spacing {h} gives eps={eps:.4g} <= d; the discount would not contract")
        fixed = FixedResolutions(d=h, eps=eps, rho=schedule.rho(h, eps))
        graph = SampleGraph(env, model, fixed, P=0)

        states = lattice(env, h)
        goal = env.goal_mask(states, model.M * eps + h)
        values = np.ones(len(states))
        if previous_theta is not None:
            tree = cKDTree(env.metric.embed(previous_points))
            _, nearest = tree.query(env.metric.embed(states))
            values = previous_theta[nearest].copy()
        values[goal] = 0.0

        graph.bulk_load(states, values)
        theta = solve_frozen(graph, tol=tol)
        graph.theta[:] = theta
        compute_s += time.perf_counter() - level_start

        result = rmse(graph, oracle) if oracle is not None else None
        level = MultigridLevel(
            resolution=h,
            size=graph.size,
            wall_s=compute_s,
            rmse=result.value if result else math.nan,
            excluded=result.excluded if result else 0
        )
        levels.append(level)
        logger.info(f"lattice h={h}: {graph.size} nodes, eps={eps:.4g}, rmse={level.rmse:.4g}, t={compute_s:.2f}s")
        if on_level:
            on_level(level)

        previous_points, previous_theta = states, theta

    return levels
