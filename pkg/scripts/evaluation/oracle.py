#!/usr/bin/env python3
"""
Minimal-Time Oracles
Ground-truth travel times for the point mass: a dense-grid shortest-path
oracle for cluttered scenes and the closed form for obstacle-free ones.
"""
import math
import logging
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..core.config import EvaluationConfig
from ..core.errors import ConfigError
from ..planner.geometry import ArrayLike, Environment

logger = logging.getLogger(__name__)

# (di, dj) grid moves, one per undirected edge
MOVES_8 = ((1, 0), (0, 1), (1, 1), (1, -1))
MOVES_16 = MOVES_8 + ((2, 1), (1, 2), (2, -1), (1, -2))


class GridOracle:
    """
    Shortest-path times on a uniform grid over the workspace.

    Grid nodes inside the goal ball are sources at time 0; edges join free
    nodes whose connecting segment is free, weighted by length / speed.
    """

    def __init__(self, env: Environment, h: float = 0.02, connectivity: int = 8, speed: float = 1.0):
        """
        Args:
            env: Point-mass scene
            h: Grid spacing
            connectivity: 8 or 16 neighbors per node
            speed: Maximum speed of the robot
        """
        if env.n != 2:
            raise ConfigError("the grid oracle is only defined for planar (point-mass) scenes")
        if connectivity not in (8, 16):
            raise ConfigError(f"connectivity must be 8 or 16, got {connectivity}")
        if h <= 0 or speed <= 0:
            raise ConfigError("oracle spacing and speed must be positive")
        self.env = env
        self.h = float(h)
        self.speed = float(speed)
        self.connectivity = connectivity

        self.shape = tuple(int(round(s / h)) + 1 for s in env.workspace_hi - env.workspace_lo)
        self.xs = env.workspace_lo[0] + h * np.arange(self.shape[0])
        self.ys = env.workspace_lo[1] + h * np.arange(self.shape[1])
        self.grid_times = self._solve(MOVES_8 if connectivity == 8 else MOVES_16)

    def _solve(self, moves) -> NDArray:
        nx, ny = self.shape
        gx, gy = np.meshgrid(self.xs, self.ys, indexing='ij')
        points = np.column_stack([gx.ravel(), gy.ravel()])
        free = self.env.free_mask(points, 0.0).reshape(self.shape)
        ids = np.arange(nx * ny).reshape(self.shape)

        rows, cols, weights = [], [], []
        for di, dj in moves:
            i0, i1 = max(0, -di), nx - max(0, di)
            j0, j1 = max(0, -dj), ny - max(0, dj)
            a = (slice(i0, i1), slice(j0, j1))
            b = (slice(i0 + di, i1 + di), slice(j0 + dj, j1 + dj))
            ok = free[a] & free[b]
            # interior points of the move must be free too
            steps = max(abs(di), abs(dj)) * 2
            for s in range(1, steps):
                t = s / steps
                mid = np.column_stack([(gx[a] + t * di * self.h).ravel(), (gy[a] + t * dj * self.h).ravel()])
                ok &= self.env.free_mask(mid, 0.0).reshape(ok.shape)
            rows.append(ids[a][ok])
            cols.append(ids[b][ok])
            weights.append(np.full(int(ok.sum()), self.h * math.hypot(di, dj) / self.speed))

        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        weights = np.concatenate(weights)
        graph = coo_matrix((weights, (rows, cols)), shape=(nx * ny, nx * ny)).tocsr()

        in_goal = (self.env.goal_distance(points) <= 0.0) & free.ravel()
        sources = np.flatnonzero(in_goal)
        if not len(sources):
            raise ConfigError(f"no oracle grid node lies in the goal region; reduce evaluation.oracle_h (h={self.h})")
        logger.debug(f"grid oracle: {nx}x{ny} nodes, {len(rows)} edges, {len(sources)} goal nodes")

        times = dijkstra(graph, directed=False, indices=sources, min_only=True)
        times = np.asarray(times, dtype=float).reshape(self.shape)
        times[~free] = math.inf
        return times

    def times(self, points: NDArray) -> NDArray:
        """
        Bilinear interpolation of the grid times, ignoring infinite corners;
        +inf inside obstacles, outside the workspace, or with no finite corner.
        """
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.full(len(p), math.inf)
        inside = self.env.free_mask(p, 0.0)
        if not inside.any():
            return out
        q = p[inside]
        u = (q - self.env.workspace_lo) / self.h
        i = np.clip(np.floor(u[:, 0]).astype(int), 0, self.shape[0] - 2)
        j = np.clip(np.floor(u[:, 1]).astype(int), 0, self.shape[1] - 2)
        fx = np.clip(u[:, 0] - i, 0.0, 1.0)
        fy = np.clip(u[:, 1] - j, 0.0, 1.0)

        corners = [
            (self.grid_times[i, j], (1 - fx) * (1 - fy)),
            (self.grid_times[i + 1, j], fx * (1 - fy)),
            (self.grid_times[i, j + 1], (1 - fx) * fy),
            (self.grid_times[i + 1, j + 1], fx * fy),
        ]
        total = np.zeros(len(q))
        weight = np.zeros(len(q))
        for value, w in corners:
            finite = np.isfinite(value)
            total[finite] += w[finite] * value[finite]
            weight[finite] += w[finite]
        result = np.full(len(q), math.inf)
        # a free point whose finite corners all carry zero weight takes the nearest finite corner
        usable = weight > 1e-12
        result[usable] = total[usable] / weight[usable]
        stranded = ~usable
        if stranded.any():
            best = np.full(int(stranded.sum()), math.inf)
            for value, _ in corners:
                best = np.minimum(best, value[stranded])
            result[stranded] = best
        out[inside] = result
        return out

    def time_at(self, x: ArrayLike) -> float:
        """Oracle travel time from one state."""
        return float(self.times(np.asarray(x, dtype=float)[None, :])[0])


class AnalyticOracle:
    """Straight-line travel time max(0, |x - c| - r) / speed for obstacle-free point-mass scenes."""

    def __init__(self, env: Environment, speed: float = 1.0):
        if env.obstacles:
            raise ConfigError("the analytic oracle requires an obstacle-free scene")
        if env.n != 2:
            raise ConfigError("the analytic oracle is only defined for planar (point-mass) scenes")
        self.env = env
        self.speed = float(speed)

    def times(self, points: NDArray) -> NDArray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        out = self.env.goal_distance(p) / self.speed
        out[~self.env.free_mask(p, 0.0)] = math.inf
        return out

    def time_at(self, x: ArrayLike) -> float:
        return float(self.times(np.asarray(x, dtype=float)[None, :])[0])


def make_oracle(cfg: EvaluationConfig, env: Environment) -> Optional[object]:
    """Oracle selected by evaluation.oracle ('none' gives None)."""
    if cfg.oracle == 'grid':
        logger.info(f"Building grid oracle (h={cfg.oracle_h}, {cfg.connectivity}-connected)...")
        return GridOracle(env, cfg.oracle_h, cfg.connectivity, cfg.speed)
    if cfg.oracle == 'analytic':
        return AnalyticOracle(env, cfg.speed)
    if cfg.oracle == 'none':
        return None
    raise ConfigError(f"unknown oracle kind: {cfg.oracle!r}")
