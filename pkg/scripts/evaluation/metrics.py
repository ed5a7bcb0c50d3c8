#!/usr/bin/env python3
"""
Metrics
RMSE of the value estimate against an oracle, in untransformed time units.
"""
import math
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ..planner.value_iteration import kruzhkov_inv_many

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RmseResult:
    """RMSE over the vertices where both estimate and oracle are finite."""
    rmse: Optional[float]
    excluded: int
    count: int

    @property
    def value(self) -> float:
        """RMSE, or nan when every vertex was excluded."""
        return math.nan if self.rmse is None else self.rmse


def rmse_values(estimates: NDArray, truth: NDArray) -> RmseResult:
    """RMSE between two time arrays, skipping pairs with an infinite member."""
    estimates = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    finite = np.isfinite(estimates) & np.isfinite(truth)
    excluded = int(len(estimates) - finite.sum())
    if not finite.any():
        return RmseResult(rmse=None, excluded=excluded, count=0)
    err = estimates[finite] - truth[finite]
    return RmseResult(rmse=float(np.sqrt(np.mean(err ** 2))), excluded=excluded, count=int(finite.sum()))


def rmse(graph, oracle, theta: Optional[NDArray] = None) -> RmseResult:
    """
    RMSE of the graph's value estimate against oracle times at its vertices.

    Returns:
        RmseResult; rmse is None when no vertex has a finite estimate and oracle time
    """
    theta = graph.theta if theta is None else theta
    result = rmse_values(kruzhkov_inv_many(theta), oracle.times(graph.states))
    if result.rmse is None:
        logger.warning(f"No finite estimates among {graph.size} vertices")
    return result


def estimates_at(graph, states: Sequence) -> NDArray:
    """Perturbed-minimum value estimates at query states (1 where no vertex is within d)."""
    return np.array([graph.estimate_at(s) for s in states], dtype=float)
