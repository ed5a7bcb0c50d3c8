#!/usr/bin/env python3
"""
Scene Geometry
Workspace box, rectangle/circle obstacles, goal ball and the scenario metric.

States are numpy float arrays of length 2 (x, y) or 3 (x, y, theta). The
angle is stored in radians in [-pi, pi); the metric rescales it to
[-angle_scale, angle_scale] with the endpoints identified, so positional and
angular differences are weighed comparably.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ..core.config import ScenarioConfig
from ..core.errors import ConfigError, ContractViolation

State = NDArray[np.float64]
ArrayLike = Union[Sequence[float], NDArray[np.float64]]


def wrap_angle(theta):
    """Wrap radians into [-pi, pi). Works on scalars and arrays."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    # np.mod can round up to 2 pi just below -pi
    return wrapped - 2.0 * math.pi * (wrapped >= math.pi)


class Metric:
    """Euclidean metric on positions, optionally with one wrapped angular axis."""

    def __init__(self, n: int, angular: bool = False, angle_scale: float = 10.0):
        """
        Args:
            n: State dimension (2 or 3)
            angular: Whether coordinate 2 is an angle
            angle_scale: Half-period of the rescaled angle axis
        """
        if n not in (2, 3):
            raise ContractViolation(f"state dimension must be 2 or 3, got {n}")
        if angular and n != 3:
            raise ContractViolation("angular coordinate requires n = 3")
        self.n = n
        self.angular = angular
        self.angle_scale = float(angle_scale)
        # radians -> metric units
        self.angle_factor = self.angle_scale / math.pi if angular else 1.0

    def normalize(self, x: ArrayLike) -> State:
        """Copy of x as a float state with the angle wrapped."""
        state = np.array(x, dtype=float)
        if state.shape[-1] != self.n:
            raise ContractViolation(f"expected state of dimension {self.n}, got {state.shape[-1]}")
        if self.angular:
            state[..., 2] = wrap_angle(state[..., 2])
        return state

    def from_metric_angle(self, x: ArrayLike) -> State:
        """State from coordinates whose angle is given in rescaled metric units."""
        state = np.array(x, dtype=float)
        if self.angular:
            state[..., 2] = state[..., 2] / self.angle_factor
        return self.normalize(state)

    def embed(self, points: NDArray) -> NDArray:
        """Metric coordinates (angle rescaled, not wrapped) of states."""
        coords = np.array(points, dtype=float)
        if self.angular:
            coords[..., 2] = coords[..., 2] * self.angle_factor
        return coords

    def displacement(self, a: NDArray, b: NDArray) -> NDArray:
        """Shortest displacement b - a in metric coordinates (broadcasts)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape[-1] != self.n or b.shape[-1] != self.n:
            raise ContractViolation(
                f"dimension mismatch: metric n={self.n}, got {a.shape[-1]} and {b.shape[-1]}"
            )
        diff = b - a
        if self.angular:
            diff[..., 2] = wrap_angle(diff[..., 2]) * self.angle_factor
        return diff

    def dist(self, a: ArrayLike, b: ArrayLike) -> float:
        """Distance between two states."""
        return float(np.linalg.norm(self.displacement(a, b)))

    def dist_many(self, a: ArrayLike, points: NDArray) -> NDArray:
        """Distances from state a to each row of points."""
        points = np.asarray(points, dtype=float).reshape(-1, self.n)
        return np.linalg.norm(self.displacement(a, points), axis=-1)


@dataclass(frozen=True)
class RectObstacle:
    """Axis-aligned rectangle [lo, hi] in the plane."""
    lo: Tuple[float, float]
    hi: Tuple[float, float]

    def signed_distance(self, points: NDArray) -> NDArray:
        """Signed distance of planar points (negative inside)."""
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        q = np.abs(np.asarray(points)[..., :2] - center) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    @property
    def feature_size(self) -> float:
        return float(min(self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]))

    def intersects_box(self, lo: NDArray, hi: NDArray) -> bool:
        return bool(np.all(np.asarray(self.lo) <= hi) and np.all(np.asarray(self.hi) >= lo))


@dataclass(frozen=True)
class CircleObstacle:
    """Disc with given center and radius."""
    center: Tuple[float, float]
    radius: float

    def signed_distance(self, points: NDArray) -> NDArray:
        """Signed distance of planar points (negative inside)."""
        p = np.asarray(points)[..., :2]
        return np.linalg.norm(p - np.asarray(self.center), axis=-1) - self.radius

    @property
    def feature_size(self) -> float:
        return 2.0 * float(self.radius)

    def intersects_box(self, lo: NDArray, hi: NDArray) -> bool:
        closest = np.clip(np.asarray(self.center), lo, hi)
        return bool(np.linalg.norm(closest - np.asarray(self.center)) <= self.radius)


Obstacle = Union[RectObstacle, CircleObstacle]


@dataclass(frozen=True)
class GoalRegion:
    """Metric ball around a goal state."""
    center: State
    radius: float


def obstacle_from_config(spec: dict) -> Obstacle:
    """Build an obstacle from its config mapping ({kind: rect, lo, hi} or {kind: circle, center, radius})."""
    kind = spec.get('kind')
    if kind == 'rect':
        lo = tuple(float(v) for v in spec['lo'])
        hi = tuple(float(v) for v in spec['hi'])
        if hi[0] <= lo[0] or hi[1] <= lo[1]:
            raise ConfigError(f"rectangle obstacle has empty extent: lo={lo}, hi={hi}")
        return RectObstacle(lo=lo, hi=hi)
    if kind == 'circle':
        radius = float(spec['radius'])
        if radius <= 0:
            raise ConfigError(f"circle obstacle radius must be positive, got {radius}")
        return CircleObstacle(center=tuple(float(v) for v in spec['center']), radius=radius)
    raise ConfigError(f"unknown obstacle kind: {kind!r}")


class Environment:
    """Workspace, obstacles and goal region. Immutable after construction."""

    def __init__(
        self,
        workspace_lo: ArrayLike,
        workspace_hi: ArrayLike,
        obstacles: List[Obstacle],
        goal_center: ArrayLike,
        goal_radius: float,
        metric: Metric
    ):
        """
        Args:
            workspace_lo: Lower corner of the planar workspace box
            workspace_hi: Upper corner of the planar workspace box
            obstacles: Rectangles and circles
            goal_center: Goal state (dimension n)
            goal_radius: Goal ball radius in the scenario metric
            metric: Scenario metric

        Raises:
            ConfigError: If an obstacle misses the workspace or the goal has no free point
        """
        self.metric = metric
        self.workspace_lo = np.array(workspace_lo, dtype=float)
        self.workspace_hi = np.array(workspace_hi, dtype=float)
        self.obstacles = list(obstacles)
        self.goal = GoalRegion(center=metric.normalize(goal_center), radius=float(goal_radius))

        if np.any(self.workspace_hi <= self.workspace_lo):
            raise ConfigError("workspace box has empty extent")
        for obstacle in self.obstacles:
            if not obstacle.intersects_box(self.workspace_lo, self.workspace_hi):
                raise ConfigError(f"obstacle {obstacle} does not intersect the workspace")
        if self.goal.radius < 0:
            raise ConfigError("goal radius must be non-negative")
        if not self.is_free_inflated(self.goal.center, self.goal.radius):
            raise ConfigError("goal region does not intersect the obstacle-free set")

    @classmethod
    def from_config(cls, scenario: ScenarioConfig) -> 'Environment':
        """Build the environment described by a scenario config section."""
        n = len(scenario.goal_center)
        metric = Metric(n=n, angular=(n == 3), angle_scale=scenario.angle_scale)
        obstacles = [obstacle_from_config(spec) for spec in scenario.obstacles]
        return cls(
            workspace_lo=scenario.workspace_lo,
            workspace_hi=scenario.workspace_hi,
            obstacles=obstacles,
            goal_center=scenario.goal_center,
            goal_radius=scenario.goal_radius,
            metric=metric
        )

    @property
    def n(self) -> int:
        return self.metric.n

    def dist(self, a: ArrayLike, b: ArrayLike) -> float:
        """Scenario metric distance."""
        return self.metric.dist(a, b)

    def free_mask(self, points: NDArray, r: float) -> NDArray:
        """Vectorized is_free_inflated over the rows of points."""
        if r < 0:
            raise ContractViolation(f"inflation radius must be non-negative, got {r}")
        p = np.asarray(points, dtype=float).reshape(-1, self.n)[:, :2]
        gap = np.maximum(np.maximum(self.workspace_lo - p, p - self.workspace_hi), 0.0)
        mask = np.linalg.norm(gap, axis=-1) <= r
        for obstacle in self.obstacles:
            mask &= obstacle.signed_distance(p) >= -r
        return mask

    def is_free_inflated(self, x: ArrayLike, r: float) -> bool:
        """True iff the position of x lies in X_free + rB (obstacles deflated by r, workspace inflated by r)."""
        return bool(self.free_mask(np.asarray(x, dtype=float)[None, :], r)[0])

    def goal_distance(self, points: NDArray) -> NDArray:
        """Metric distance from each row of points to the goal ball (zero inside)."""
        d = self.metric.dist_many(self.goal.center, points)
        return np.maximum(d - self.goal.radius, 0.0)

    def goal_mask(self, points: NDArray, r: float) -> NDArray:
        """Vectorized in_goal_inflated."""
        if r < 0:
            raise ContractViolation(f"inflation radius must be non-negative, got {r}")
        return self.goal_distance(points) <= r

    def in_goal_inflated(self, x: ArrayLike, r: float) -> bool:
        """True iff dist(x, goal region) <= r."""
        return bool(self.goal_mask(np.asarray(x, dtype=float)[None, :], r)[0])

    @property
    def min_feature_size(self) -> float:
        """Smallest obstacle feature (rectangle side or circle diameter); workspace side if none."""
        sizes = [o.feature_size for o in self.obstacles]
        sizes.append(float(np.min(self.workspace_hi - self.workspace_lo)))
        return min(sizes)

    def segment_collision_free(self, a: ArrayLike, b: ArrayLike, refine: int = 1) -> bool:
        """
        True iff the straight position-space segment a -> b avoids every obstacle
        and stays in the workspace, checked at spacing <= min_feature_size / (10 * refine).
        """
        pa = np.asarray(a, dtype=float)[:2]
        pb = np.asarray(b, dtype=float)[:2]
        spacing = self.min_feature_size / (10.0 * refine)
        steps = max(1, int(math.ceil(np.linalg.norm(pb - pa) / spacing)))
        t = np.linspace(0.0, 1.0, steps + 1)[:, None]
        points = pa + t * (pb - pa)
        if self.n == 3:
            points = np.hstack([points, np.zeros((len(points), 1))])
        return bool(np.all(self.free_mask(points, 0.0)))

    def measure(self) -> float:
        """Lebesgue measure of the state space (angle axis in metric units)."""
        area = float(np.prod(self.workspace_hi - self.workspace_lo))
        if self.metric.angular:
            area *= 2.0 * self.metric.angle_scale
        return area

    def sampling_box(self, r: float) -> Tuple[NDArray, NDArray]:
        """Planar box enclosing X_free + rB."""
        return self.workspace_lo - r, self.workspace_hi + r
