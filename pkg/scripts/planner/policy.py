#!/usr/bin/env python3
"""
Policy Rollout
Greedy one-step lookahead control from the value estimate and closed-loop
simulation of the resulting feedback law.
"""
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray

from ..core.errors import ContractViolation
from .geometry import ArrayLike, State

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


class Outcome(str, Enum):
    REACHED_GOAL = 'reached_goal'
    COLLIDED = 'collided'
    TIMED_OUT = 'timed_out'
    STUCK = 'stuck'


@dataclass
class Trajectory:
    """Closed-loop trajectory sampled at integration sub-steps."""
    states: List[State]
    controls: List[NDArray] = field(default_factory=list)
    dt: float = 0.0
    hit_time: float = math.inf
    outcome: Outcome = Outcome.TIMED_OUT

    def header(self) -> List[str]:
        n = len(self.states[0])
        m = len(self.controls[0]) if self.controls else 2
        return ['t', *[f"x{j}" for j in range(n)], *[f"u{j}" for j in range(m)]]

    def rows(self) -> List[list]:
        """One row per state; the control is the one applied from that state (blank on the last row)."""
        m = len(self.controls[0]) if self.controls else 2
        rows = []
        for i, state in enumerate(self.states):
            control = self.controls[i].tolist() if i < len(self.controls) else [''] * m
            rows.append([i * self.dt, *state.tolist(), *control])
        return rows

    def summary(self) -> str:
        return f"outcome={self.outcome.value} hit_time={self.hit_time!r} steps={len(self.controls)}"


def control_scores(graph, x: ArrayLike, theta: Optional[NDArray] = None) -> NDArray:
    """
    Score Delta + beta * min Theta over range_query(x + eps f(x, u), rho) for
    every control of the model's menu; 1 when the endpoint leaves X_free + d B
    or no vertex lies within rho.
    """
    theta = graph.theta if theta is None else theta
    res = graph.current_resolutions()
    model = graph.model
    menu = model.control_set.discretization
    scores = np.ones(len(menu))
    for i, u in enumerate(menu):
        y = model.integrate(x, u, res.eps)
        if not graph.env.is_free_inflated(y, res.d):
            continue
        ids = graph.range_query(y, res.rho)
        if len(ids):
            scores[i] = res.delta + res.beta * float(theta[ids].min())
    return scores


def greedy_control(
    graph,
    x: ArrayLike,
    theta: Optional[NDArray] = None,
    goal_tiebreak: bool = False
) -> Optional[NDArray]:
    """
    Minimizing control of the one-step lookahead.

    Ties go to the lowest menu index; with goal_tiebreak the tied control whose
    endpoint is closest to the goal center wins first.

    Returns:
        The chosen control, or None when every control scores 1 (stuck)
    """
    scores = control_scores(graph, x, theta)
    best = float(scores.min())
    if best >= 1.0:
        return None
    menu = graph.model.control_set.discretization
    tied = np.flatnonzero(scores <= best + TIE_TOL)
    choice = int(tied[0])
    if goal_tiebreak and len(tied) > 1:
        eps = graph.current_resolutions().eps
        ends = np.array([graph.model.integrate(x, menu[i], eps) for i in tied])
        gaps = graph.env.metric.dist_many(graph.env.goal.center, ends)
        choice = int(tied[int(np.argmin(gaps))])
    return menu[choice].copy()


def rollout(
    graph,
    x0: ArrayLike,
    max_time: float,
    theta: Optional[NDArray] = None,
    substeps: int = 10,
    goal_tiebreak: bool = False
) -> Trajectory:
    """
    Simulate the greedy feedback law from x0.

    Each decision holds its control for eps, integrated in `substeps` Euler
    steps with a collision check per segment. Stops on goal entry, collision,
    stuck or max_time.

    Raises:
        ContractViolation: x0 not in X_free
    """
    env = graph.env
    model = graph.model
    x = env.metric.normalize(x0)
    if not env.is_free_inflated(x, 0.0):
        raise ContractViolation(f"rollout start {x.tolist()} is not collision-free")

    eps = graph.current_resolutions().eps
    dt = eps / substeps
    traj = Trajectory(states=[x], dt=dt)
    if env.in_goal_inflated(x, 0.0):
        traj.outcome = Outcome.REACHED_GOAL
        traj.hit_time = 0.0
        return traj

    max_steps = int(math.ceil(max_time / dt - 1e-9))
    while len(traj.controls) < max_steps:
        u = greedy_control(graph, x, theta, goal_tiebreak)
        if u is None:
            traj.outcome = Outcome.STUCK
            return traj
        for _ in range(substeps):
            y = model.integrate(x, u, dt)
            collided = not env.segment_collision_free(x, y)
            traj.states.append(y)
            traj.controls.append(u)
            x = y
            if collided:
                traj.outcome = Outcome.COLLIDED
                return traj
            if env.in_goal_inflated(x, 0.0):
                traj.outcome = Outcome.REACHED_GOAL
                traj.hit_time = len(traj.controls) * dt
                return traj
            if len(traj.controls) >= max_steps:
                break
    traj.outcome = Outcome.TIMED_OUT
    return traj


def hitting_time(traj: Trajectory) -> float:
    """Elapsed time of the first goal entry; +inf unless the goal was reached collision-free."""
    if traj.outcome != Outcome.REACHED_GOAL:
        return math.inf
    return traj.dt * (len(traj.states) - 1)
