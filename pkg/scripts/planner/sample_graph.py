#!/usr/bin/env python3
"""
Sample Graph
Incremental vertex set with the resolution schedule, a spatial index and the
shrinking one-hop neighbor cache.

Neighbor sets follow the one-hop definition
    F(x) = (x + eps * U f(x, u) + rho B) n (X_free + d B) n V
and are cached: computed once when a vertex is added, extended when later
vertices land in them, and lazily pruned against the current resolutions
whenever they are queried.
"""
import math
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from ..core.config import ScheduleConfig
from ..core.errors import ConfigError, ContractViolation, SamplerExhausted
from .dynamics import DynamicsModel
from .geometry import ArrayLike, Environment, Metric, State

logger = logging.getLogger(__name__)

RHO_RULES = ('2d', 'full')


def unit_ball_volume(n: int) -> float:
    """Volume C_n of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class Resolutions:
    """Spatial/temporal resolutions of one graph size, with the transformed cost and discount."""
    d: float
    eps: float
    rho: float
    delta: float
    beta: float


class ResolutionSchedule:
    """d = B (log|V| / |V|)^(1/n), eps = (c d)^p, rho = 2d or 2d + l eps (d + M eps)."""

    def __init__(
        self,
        B: float,
        n: int,
        eps_coefficient: float = 5.0,
        eps_exponent: float = 2.0 / 3.0,
        rho_rule: str = '2d',
        lipschitz: float = 0.0,
        M: float = 1.0
    ):
        if B <= 0:
            raise ConfigError(f"dispersion constant B must be positive, got {B}")
        if rho_rule not in RHO_RULES:
            raise ConfigError(f"rho_rule must be one of {RHO_RULES}, got {rho_rule!r}")
        self.B = float(B)
        self.n = int(n)
        self.eps_coefficient = float(eps_coefficient)
        self.eps_exponent = float(eps_exponent)
        self.rho_rule = rho_rule
        self.lipschitz = float(lipschitz)
        self.M = float(M)
        self._cache: Dict[int, Resolutions] = {}

    @classmethod
    def from_config(cls, cfg: ScheduleConfig, env: Environment, model: DynamicsModel) -> 'ResolutionSchedule':
        """Schedule for a scenario; B defaults to B_factor * (mu(X) / C_n)^(1/n)."""
        n = env.n
        B = cfg.B
        if B is None:
            B = cfg.B_factor * (env.measure() / unit_ball_volume(n)) ** (1.0 / n)
        return cls(
            B=float(B),
            n=n,
            eps_coefficient=cfg.epsilon_coefficient,
            eps_exponent=cfg.epsilon_exponent,
            rho_rule=cfg.rho_rule,
            lipschitz=model.lipschitz,
            M=model.M
        )

    def dispersion(self, size: int) -> float:
        if size < 3:
            raise ConfigError(f"resolutions need at least 3 vertices, got {size}")
        return self.B * (math.log(size) / size) ** (1.0 / self.n)

    def epsilon(self, d: float) -> float:
        return (self.eps_coefficient * d) ** self.eps_exponent

    def rho(self, d: float, eps: float) -> float:
        if self.rho_rule == 'full':
            return 2.0 * d + self.lipschitz * eps * (d + self.M * eps)
        return 2.0 * d

    def at(self, size: int) -> Resolutions:
        """Resolutions for a graph with `size` vertices."""
        if size not in self._cache:
            d = self.dispersion(size)
            eps = self.epsilon(d)
            delta = 1.0 - math.exp(-(eps - d))
            self._cache[size] = Resolutions(d=d, eps=eps, rho=self.rho(d, eps), delta=delta, beta=1.0 - delta)
        return self._cache[size]


class FixedResolutions:
    """Size-independent resolutions (uniform lattices of the multigrid baseline)."""

    def __init__(self, d: float, eps: float, rho: float):
        delta = 1.0 - math.exp(-(eps - d))
        self.resolutions = Resolutions(d=d, eps=eps, rho=rho, delta=delta, beta=1.0 - delta)

    def at(self, size: int) -> Resolutions:
        return self.resolutions


@dataclass
class Adjacency:
    """One-hop neighbor sets of every vertex in CSR form."""
    indptr: NDArray
    indices: NDArray

    @classmethod
    def from_lists(cls, lists: List[NDArray]) -> 'Adjacency':
        lengths = np.array([len(row) for row in lists], dtype=np.intp)
        indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.intp)
        indices = np.concatenate(lists).astype(np.intp) if lists else np.empty(0, dtype=np.intp)
        return cls(indptr=indptr, indices=indices)

    @property
    def lengths(self) -> NDArray:
        return np.diff(self.indptr)

    def positions(self, rows: NDArray) -> NDArray:
        """Positions in `indices` of all entries of the given rows, row after row."""
        starts = self.indptr[rows]
        counts = self.indptr[rows + 1] - starts
        total = int(counts.sum())
        if not total:
            return np.empty(0, dtype=np.intp)
        offsets = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
        return offsets + np.arange(total)

    def neighbors_of(self, rows: NDArray) -> NDArray:
        """Concatenated neighbor ids of the given rows (with repeats)."""
        return self.indices[self.positions(rows)]

    def row_min(self, values: NDArray, rows: NDArray) -> NDArray:
        """min over each row's neighbors of values; rows must be nonempty."""
        counts = self.indptr[rows + 1] - self.indptr[rows]
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        return np.minimum.reduceat(values[self.neighbors_of(rows)], starts)


class SpatialIndex:
    """
    Exact range queries in the scenario metric.

    A KD-tree over metric coordinates plus a linearly scanned tail of recent
    insertions; the tree is rebuilt once the tail grows past a fraction of the
    total. The wrapped angle axis is handled by querying shifted images.
    """

    def __init__(self, metric: Metric, capacity: int = 1024):
        self.metric = metric
        self._points = np.empty((capacity, metric.n))
        self._raw = np.empty((capacity, metric.n))
        self.size = 0
        self._tree: Optional[cKDTree] = None
        self._tree_size = 0

    def _ensure_capacity(self, needed: int):
        if needed <= len(self._points):
            return
        capacity = max(needed, 2 * len(self._points))
        for name in ('_points', '_raw'):
            grown = np.empty((capacity, self.metric.n))
            grown[:self.size] = getattr(self, name)[:self.size]
            setattr(self, name, grown)

    def extend(self, states: NDArray):
        states = np.asarray(states, dtype=float).reshape(-1, self.metric.n)
        self._ensure_capacity(self.size + len(states))
        self._raw[self.size:self.size + len(states)] = states
        self._points[self.size:self.size + len(states)] = self.metric.embed(states)
        self.size += len(states)
        if self.size - self._tree_size > max(64, self.size // 10):
            self.rebuild()

    def rebuild(self):
        self._tree = cKDTree(self._points[:self.size]) if self.size else None
        self._tree_size = self.size

    def _images(self, q: NDArray, r: float) -> List[NDArray]:
        if not self.metric.angular:
            return [q]
        period = 2.0 * self.metric.angle_scale
        images = [q]
        for shift in (-period, period):
            shifted = q.copy()
            shifted[2] += shift
            if abs(shifted[2]) - self.metric.angle_scale <= r:
                images.append(shifted)
        return images

    def query(self, x: ArrayLike, r: float) -> NDArray:
        """Sorted ids of points within metric distance r of x."""
        if r < 0:
            raise ContractViolation(f"query radius must be non-negative, got {r}")
        x = self.metric.normalize(x)
        found = []
        if self._tree is not None and self._tree_size:
            q = self.metric.embed(x)
            slack = r * (1.0 + 1e-9) + 1e-9
            for image in self._images(q, slack):
                found.extend(self._tree.query_ball_point(image, slack))
        candidates = np.unique(np.asarray(found, dtype=np.intp))
        tail = np.arange(self._tree_size, self.size, dtype=np.intp)
        candidates = np.concatenate([candidates, tail])
        if not len(candidates):
            return candidates
        keep = self.metric.dist_many(x, self._raw[candidates]) <= r
        return candidates[keep]


class SampleGraph:
    """Vertices with transformed values, staleness and cached one-hop neighbor sets."""

    def __init__(
        self,
        env: Environment,
        model: DynamicsModel,
        schedule,
        P: int = 0,
        capacity: int = 1024
    ):
        """
        Args:
            env: Scene geometry
            model: Dynamics model
            schedule: ResolutionSchedule or FixedResolutions
            P: Staleness threshold given to new vertices
            capacity: Initial storage capacity
        """
        if P < 0:
            raise ConfigError(f"staleness threshold P must be >= 0, got {P}")
        self.env = env
        self.model = model
        self.schedule = schedule
        self.P = int(P)
        self.k = 0
        self.size = 0
        self._states = np.empty((capacity, env.n))
        self._values = np.empty(capacity)
        self._staleness = np.empty(capacity, dtype=np.int64)
        self._neighbors: List[NDArray] = []
        self._pruned_at: List[int] = []
        self._adjacency: Optional[Adjacency] = None
        self._adjacency_size = -1
        self.index = SpatialIndex(env.metric, capacity)

    # ------------------------------------------------------------------
    # Storage
    # ------------------------------------------------------------------

    @property
    def states(self) -> NDArray:
        return self._states[:self.size]

    @property
    def theta(self) -> NDArray:
        """Transformed value table (a live view)."""
        return self._values[:self.size]

    @property
    def staleness(self) -> NDArray:
        """Staleness table (a live view)."""
        return self._staleness[:self.size]

    def _ensure_capacity(self, needed: int):
        if needed <= len(self._values):
            return
        capacity = max(needed, 2 * len(self._values))
        states = np.empty((capacity, self.env.n))
        states[:self.size] = self.states
        values = np.empty(capacity)
        values[:self.size] = self.theta
        staleness = np.empty(capacity, dtype=np.int64)
        staleness[:self.size] = self.staleness
        self._states, self._values, self._staleness = states, values, staleness

    def _append(self, states: NDArray, values: NDArray, staleness: NDArray) -> NDArray:
        count = len(states)
        self._ensure_capacity(self.size + count)
        ids = np.arange(self.size, self.size + count, dtype=np.intp)
        self._states[ids] = states
        self._values[ids] = values
        self._staleness[ids] = staleness
        self.size += count
        self._neighbors.extend(np.empty(0, dtype=np.intp) for _ in range(count))
        self._pruned_at.extend(-1 for _ in range(count))
        self.index.extend(states)
        return ids

    # ------------------------------------------------------------------
    # Resolutions and masks
    # ------------------------------------------------------------------

    def current_resolutions(self) -> Resolutions:
        """(d, eps, rho, Delta, beta) at the current |V|."""
        return self.schedule.at(self.size)

    def goal_radius(self, res: Optional[Resolutions] = None) -> float:
        """Inflation M eps + d of the goal region used for boundary vertices."""
        res = res or self.current_resolutions()
        return self.model.M * res.eps + res.d

    def goal_mask(self, res: Optional[Resolutions] = None) -> NDArray:
        """Vertices in X_goal + (M eps + d) B at the given (default: current) resolutions."""
        return self.env.goal_mask(self.states, self.goal_radius(res))

    def free_mask(self, res: Optional[Resolutions] = None) -> NDArray:
        """Vertices in X_free + d B."""
        res = res or self.current_resolutions()
        return self.env.free_mask(self.states, res.d)

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample_free(self, rng: np.random.Generator, r: Optional[float] = None, max_rejections: int = 1_000_000) -> State:
        """
        Uniform sample of X_free + rB by rejection from the inflated workspace box.

        Args:
            rng: Seeded generator of the run
            r: Inflation radius (default: d at |V| + 1, or 0 while |V| + 1 < 3)
            max_rejections: Consecutive rejections before giving up

        Raises:
            SamplerExhausted: Free space is effectively empty
        """
        if r is None:
            r = self.schedule.at(self.size + 1).d if self.size + 1 >= 3 else 0.0
        lo, hi = self.env.sampling_box(r)
        metric = self.env.metric
        for _ in range(max_rejections):
            position = rng.uniform(lo, hi)
            if metric.angular:
                x = np.array([position[0], position[1], rng.uniform(-math.pi, math.pi)])
            else:
                x = position
            if self.env.is_free_inflated(x, r):
                return metric.normalize(x)
        raise SamplerExhausted(f"no free sample after {max_rejections} consecutive rejections")

    def sample_goal(self, rng: np.random.Generator, max_rejections: int = 1_000_000) -> State:
        """Uniform free sample inside the (uninflated) goal ball."""
        metric = self.env.metric
        goal = self.env.goal
        center = metric.embed(goal.center)
        for _ in range(max_rejections):
            offset = rng.uniform(-goal.radius, goal.radius, size=metric.n)
            if np.linalg.norm(offset) > goal.radius:
                continue
            x = metric.from_metric_angle(center + offset)
            if self.env.is_free_inflated(x, 0.0):
                return x
        raise SamplerExhausted(f"no free goal sample after {max_rejections} consecutive rejections")

    # ------------------------------------------------------------------
    # Insertion and neighbor sets
    # ------------------------------------------------------------------

    def _direct_neighbors(self, i: int, candidates: NDArray, res: Resolutions) -> NDArray:
        if not len(candidates):
            return candidates
        cand_states = self.states[candidates]
        keep = self.model.reach_residual(self.states[i][None, :], cand_states, res.eps) <= res.rho
        keep &= self.env.free_mask(cand_states, res.d)
        return candidates[keep]

    def bulk_load(self, states: NDArray, values: Optional[NDArray] = None) -> NDArray:
        """
        Load an initial vertex set at once and compute every neighbor set directly.

        Values default to 0 inside X_goal + (M eps + d) B and 1 elsewhere;
        staleness starts at P so every vertex is refreshed in the first iteration.

        Returns:
            Ids of the loaded vertices
        """
        if self.size:
            raise ContractViolation("bulk_load requires an empty graph")
        states = self.env.metric.normalize(np.asarray(states, dtype=float).reshape(-1, self.env.n))
        res = self.schedule.at(len(states))
        if values is None:
            values = np.where(self.env.goal_mask(states, self.goal_radius(res)), 0.0, 1.0)
        ids = self._append(states, np.asarray(values, dtype=float), np.full(len(states), self.P))
        self.index.rebuild()

        reach = self.model.reach_radius(res.eps) + res.rho
        for i in ids:
            self._neighbors[i] = self._direct_neighbors(i, self.range_query(self.states[i], reach), res)
            self._pruned_at[i] = self.size
        return ids

    def add_sample(self, x_new: ArrayLike) -> int:
        """
        Append one vertex: value 0/1 by the inflated goal test, staleness P, its
        neighbor set computed directly and x_new appended to every F(x) it lands in.

        Raises:
            ContractViolation: x_new outside X_free + d B
        """
        x_new = self.env.metric.normalize(x_new)
        res = self.schedule.at(self.size + 1)
        if not self.env.is_free_inflated(x_new, res.d):
            raise ContractViolation("new sample lies outside the inflated free set")

        value = 0.0 if self.env.in_goal_inflated(x_new, self.goal_radius(res)) else 1.0
        i = int(self._append(x_new[None, :], np.array([value]), np.array([self.P]))[0])

        reach = self.model.reach_radius(res.eps) + res.rho
        candidates = self.range_query(x_new, reach)
        self._neighbors[i] = self._direct_neighbors(i, candidates, res)
        self._pruned_at[i] = self.size

        others = candidates[candidates != i]
        if len(others):
            back = self.model.reach_residual(self.states[others], x_new[None, :], res.eps) <= res.rho
            for j in others[back]:
                self._neighbors[j] = np.append(self._neighbors[j], i)
        return i

    def one_hop(self, i: int) -> NDArray:
        """Cached F(x_i), pruned against the current resolutions (pruning persists)."""
        if self._pruned_at[i] != self.size:
            neighbors = self._neighbors[i]
            if len(neighbors):
                res = self.current_resolutions()
                self._neighbors[i] = self._direct_neighbors(i, neighbors, res)
            self._pruned_at[i] = self.size
        return self._neighbors[i]

    def direct_one_hop(self, i: int) -> NDArray:
        """F(x_i) recomputed from scratch over all of V (reference for the cache)."""
        res = self.current_resolutions()
        return self._direct_neighbors(i, np.arange(self.size, dtype=np.intp), res)

    def adjacency(self) -> Adjacency:
        """
        All cached neighbor sets, pruned against the current resolutions, as CSR.

        Pruning runs in one vectorized pass over every set not yet pruned at the
        current |V|; the result is reused until the next insertion.
        """
        if self._adjacency is not None and self._adjacency_size == self.size:
            return self._adjacency

        stale = [i for i in range(self.size) if self._pruned_at[i] != self.size]
        if stale:
            res = self.current_resolutions()
            lists = [self._neighbors[i] for i in stale]
            lengths = np.array([len(row) for row in lists], dtype=np.intp)
            if lengths.sum():
                src = np.repeat(np.asarray(stale, dtype=np.intp), lengths)
                dst = np.concatenate(lists).astype(np.intp)
                keep = self.model.reach_residual(self.states[src], self.states[dst], res.eps) <= res.rho
                keep &= self.env.free_mask(self.states[dst], res.d)
                bounds = np.cumsum(lengths)[:-1]
                for i, row, mask in zip(stale, np.split(dst, bounds), np.split(keep, bounds)):
                    self._neighbors[i] = row[mask]
            for i in stale:
                self._pruned_at[i] = self.size

        self._adjacency = Adjacency.from_lists(self._neighbors)
        self._adjacency_size = self.size
        return self._adjacency

    def range_query(self, x: ArrayLike, r: float) -> NDArray:
        """Sorted ids of the vertices within metric distance r of x."""
        return self.index.query(x, r)

    def estimate_at(self, x: ArrayLike) -> float:
        """Perturbed minimum of the value table over (x + d B) n V; 1 when the ball is empty."""
        ids = self.range_query(x, self.current_resolutions().d)
        return float(self.theta[ids].min()) if len(ids) else 1.0

    def rows(self) -> Iterator[list]:
        """Checkpoint rows: id, coordinates, value, staleness."""
        for i in range(self.size):
            yield [i, *self.states[i].tolist(), float(self.theta[i]), int(self.staleness[i])]

    def header(self) -> List[str]:
        return ['id', *[f"x{j}" for j in range(self.env.n)], 'theta_value', 'staleness']
