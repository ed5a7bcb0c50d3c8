#!/usr/bin/env python3
"""
Dynamics Models
Point mass, simple car and Dubins car: velocity maps, control sets, model
constants and the one-step reachable-set membership test.

The angle is integrated in radians; the metric's angle rescaling only enters
the reachable-set residual, which is measured in the scenario metric.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..core.errors import ConfigError, ContractViolation
from .geometry import ArrayLike, Metric, State

CONTROL_TOL = 1e-9


@dataclass(frozen=True)
class ControlSet:
    """Compact control set descriptor plus a finite menu for policy extraction."""
    kind: str
    lo: NDArray
    hi: NDArray
    radius: float
    discretization: NDArray

    def contains(self, u: ArrayLike) -> bool:
        u = np.asarray(u, dtype=float)
        if u.shape != (2,):
            return False
        if self.kind == 'disc':
            return bool(np.linalg.norm(u) <= self.radius + CONTROL_TOL)
        return bool(np.all(u >= self.lo - CONTROL_TOL) and np.all(u <= self.hi + CONTROL_TOL))

    @classmethod
    def disc(cls, radius: float = 1.0, boundary: int = 16) -> 'ControlSet':
        angles = 2.0 * math.pi * np.arange(boundary) / boundary
        ring = radius * np.column_stack([np.cos(angles), np.sin(angles)])
        menu = np.vstack([ring, np.zeros((1, 2))])
        return cls('disc', np.full(2, -radius), np.full(2, radius), radius, menu)

    @classmethod
    def box(cls, lo=(-1.0, -1.0), hi=(1.0, 1.0), grid: int = 5) -> 'ControlSet':
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        g1 = np.linspace(lo[0], hi[0], grid)
        g2 = np.linspace(lo[1], hi[1], grid)
        menu = np.array([[a, b] for a in g1 for b in g2])
        return cls('box', lo, hi, float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))), menu)

    @classmethod
    def fixed_first_axis(cls, value: float = 1.0, interval=(-1.0, 1.0), count: int = 9) -> 'ControlSet':
        lo = np.array([value, interval[0]], dtype=float)
        hi = np.array([value, interval[1]], dtype=float)
        menu = np.column_stack([np.full(count, value), np.linspace(interval[0], interval[1], count)])
        return cls('fixed_first_axis', lo, hi, float(math.hypot(value, max(abs(interval[0]), abs(interval[1])))), menu)


class DynamicsModel:
    """Base class: x' = f(x, u) with constants M (speed bound) and l (Lipschitz constant in x)."""

    name = ''
    stoppable = True

    def __init__(self, metric: Metric, control_set: ControlSet, M: float, lipschitz: float):
        self.metric = metric
        self.control_set = control_set
        self.M = float(M)
        self.lipschitz = float(lipschitz)

    @property
    def dim(self) -> int:
        return self.metric.n

    def _velocity(self, x: NDArray, u: NDArray) -> NDArray:
        raise NotImplementedError

    def flow(self, x: ArrayLike, u: ArrayLike) -> NDArray:
        """Velocity f(x, u) in state units per time unit."""
        u = np.asarray(u, dtype=float)
        if not self.control_set.contains(u):
            raise ContractViolation(f"control {u.tolist()} outside the {self.control_set.kind} control set")
        return self._velocity(np.asarray(x, dtype=float), u)

    def integrate(self, x: ArrayLike, u: ArrayLike, dt: float) -> State:
        """One Euler step x + dt * f(x, u), angle normalized."""
        if dt <= 0:
            raise ContractViolation(f"dt must be positive, got {dt}")
        x = np.asarray(x, dtype=float)
        return self.metric.normalize(x + dt * self.flow(x, u))

    def reach_residual(self, sources: NDArray, targets: NDArray, eps: float) -> NDArray:
        """min over u in U of dist(x + eps * f(x, u), x') for paired rows (broadcasts)."""
        raise NotImplementedError

    def reach_radius(self, eps: float) -> float:
        """Largest metric length of eps * f(x, u); bounds the candidate search ball."""
        raise NotImplementedError

    def reach_membership(self, x: ArrayLike, x_prime: ArrayLike, eps: float, rho: float) -> bool:
        """True iff x' lies in x + eps * (union over u of f(x, u)) + rho B."""
        if eps <= 0:
            raise ContractViolation(f"eps must be positive, got {eps}")
        if rho < 0:
            raise ContractViolation(f"rho must be non-negative, got {rho}")
        residual = self.reach_residual(np.asarray(x, dtype=float)[None, :],
                                       np.asarray(x_prime, dtype=float)[None, :], eps)
        return bool(residual[0] <= rho)


class PointMass(DynamicsModel):
    """Single integrator with the unit disc as control set."""

    name = 'point_mass'
    stoppable = True

    def _velocity(self, x, u):
        return u.copy()

    def reach_residual(self, sources, targets, eps):
        # velocity image is a disc of radius eps
        gap = np.linalg.norm(self.metric.displacement(sources, targets), axis=-1)
        return np.maximum(gap - eps * self.control_set.radius, 0.0)

    def reach_radius(self, eps):
        return eps * self.control_set.radius


class UnicycleCar(DynamicsModel):
    """
    Driftless unicycle: (u1 cos theta, u1 sin theta, u2).

    The velocity image is a planar patch spanned by the heading direction and
    the angle axis, so the residual is a clamped orthogonal projection.
    """

    def __init__(self, metric: Metric, control_set: ControlSet, M: float, lipschitz: float, forward_only: bool):
        if not metric.angular:
            raise ContractViolation("car models need a metric with an angular coordinate")
        super().__init__(metric, control_set, M, lipschitz)
        self.forward_only = forward_only

    def _velocity(self, x, u):
        theta = x[2]
        return np.array([u[0] * math.cos(theta), u[0] * math.sin(theta), u[1]])

    def reach_residual(self, sources, targets, eps):
        sources = np.asarray(sources, dtype=float)
        disp = self.metric.displacement(sources, targets)
        theta = sources[..., 2]
        cos_t = np.cos(theta)
        sin_t = np.sin(theta)

        along = disp[..., 0] * cos_t + disp[..., 1] * sin_t
        across = -disp[..., 0] * sin_t + disp[..., 1] * cos_t

        lo, hi = self.control_set.lo, self.control_set.hi
        if self.forward_only:
            along_res = along - eps * lo[0]
        else:
            along_res = along - np.clip(along, eps * lo[0], eps * hi[0])

        # wrapped angle difference in radians; |delta| <= pi
        delta = np.abs(disp[..., 2]) / self.metric.angle_factor
        turn = eps * max(abs(lo[1]), abs(hi[1]))
        angle_res = np.maximum(delta - turn, 0.0) * self.metric.angle_factor

        return np.sqrt(across ** 2 + along_res ** 2 + angle_res ** 2)

    def reach_radius(self, eps):
        lo, hi = self.control_set.lo, self.control_set.hi
        speed = eps * max(abs(lo[0]), abs(hi[0]))
        turn = min(eps * max(abs(lo[1]), abs(hi[1])), math.pi) * self.metric.angle_factor
        return math.hypot(speed, turn)


class SimpleCar(UnicycleCar):
    """Unicycle with U = [-1, 1] x [-1, 1]; can stop and reverse."""

    name = 'simple_car'
    stoppable = True

    def __init__(self, metric, control_set, M, lipschitz):
        super().__init__(metric, control_set, M, lipschitz, forward_only=False)


class DubinsCar(UnicycleCar):
    """Unicycle with U = {1} x [-1, 1]; forward only at constant speed."""

    name = 'dubins_car'
    stoppable = False

    def __init__(self, metric, control_set, M, lipschitz):
        super().__init__(metric, control_set, M, lipschitz, forward_only=True)


def make_model(
    name: str,
    metric: Metric,
    M: Optional[float] = None,
    lipschitz: Optional[float] = None,
    disc_boundary: int = 16,
    box_grid: int = 5,
    interval_count: int = 9
) -> DynamicsModel:
    """
    Build a dynamics model by its scenario name.

    Args:
        name: 'point_mass', 'simple_car' or 'dubins_car'
        metric: Scenario metric
        M: Speed bound override (defaults: 1 for the point mass, sqrt(2) for the cars)
        lipschitz: Lipschitz constant override (defaults: 0 point mass, 1 cars)
        disc_boundary: Boundary controls in the point-mass menu
        box_grid: Grid size per axis of the simple-car menu
        interval_count: Turn-rate values in the Dubins menu

    Returns:
        DynamicsModel instance

    Raises:
        ConfigError: If the name is unknown
    """
    if name == 'point_mass':
        return PointMass(metric, ControlSet.disc(1.0, disc_boundary),
                         M if M is not None else 1.0,
                         lipschitz if lipschitz is not None else 0.0)
    if name == 'simple_car':
        return SimpleCar(metric, ControlSet.box((-1.0, -1.0), (1.0, 1.0), box_grid),
                         M if M is not None else math.sqrt(2.0),
                         lipschitz if lipschitz is not None else 1.0)
    if name == 'dubins_car':
        return DubinsCar(metric, ControlSet.fixed_first_axis(1.0, (-1.0, 1.0), interval_count),
                         M if M is not None else math.sqrt(2.0),
                         lipschitz if lipschitz is not None else 1.0)
    raise ConfigError(f"unknown dynamics model: {name!r}")
