#!/usr/bin/env python3
"""
iPolicy Main Loop
Incremental sampling fused with staleness-driven asynchronous value iteration:
each iteration draws one free sample, inserts it into the graph and refreshes
the stale vertices.
"""
import time
import logging
from dataclasses import dataclass, astuple, fields
from typing import List, Optional

import numpy as np

from ..core.config import Config
from ..core.safety import SafetyChecker
from .dynamics import make_model
from .geometry import Environment
from .sample_graph import Resolutions, ResolutionSchedule, SampleGraph
from .value_iteration import UpdateReport, value_iteration_step

logger = logging.getLogger(__name__)


@dataclass
class IterationRecord:
    """One row of the per-iteration log."""
    k: int
    size: int
    d: float
    eps: float
    rho: float
    stale: int
    residual: float
    wall_ms: float

    @classmethod
    def header(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def row(self, record_timing: bool = True) -> list:
        values = list(astuple(self))
        if not record_timing:
            values[-1] = 0
        return values


def build_scene(config: Config):
    """Environment, dynamics model and resolution schedule of a configuration."""
    env = Environment.from_config(config.scenario)
    sched = config.schedule
    ro = config.rollout
    model = make_model(config.scenario.model, env.metric, sched.M, sched.lipschitz,
                       ro.disc_boundary, ro.box_grid, ro.interval_count)
    schedule = ResolutionSchedule.from_config(sched, env, model)
    return env, model, schedule


class IPolicy:
    """Anytime planner state: the growing sample graph plus its value estimate."""

    def __init__(self, config: Config, safety: Optional[SafetyChecker] = None):
        """
        Args:
            config: Validated configuration
            safety: Runtime assumption checker (defaults to one logging through this module)
        """
        self.config = config
        self.env, self.model, self.schedule = build_scene(config)
        self.graph = SampleGraph(self.env, self.model, self.schedule, config.value_iteration.P)
        self.rng = np.random.default_rng(config.sampling.seed)
        self.safety = safety or SafetyChecker(logger)
        self.k = 0
        self.last_report: Optional[UpdateReport] = None
        self._previous: Optional[Resolutions] = None

    def initialize(self) -> Resolutions:
        """
        Draw V_0 (uniform free samples plus forced goal samples) and load it.

        Values follow the inflated goal test and every staleness starts at P,
        so the whole initial set is refreshed in the first iteration.
        """
        samp = self.config.sampling
        count = samp.initial_samples + samp.forced_goal_samples
        d0 = self.schedule.at(count).d
        states = [self.graph.sample_free(self.rng, r=d0, max_rejections=samp.max_rejections)
                  for _ in range(samp.initial_samples)]
        states += [self.graph.sample_goal(self.rng, max_rejections=samp.max_rejections)
                   for _ in range(samp.forced_goal_samples)]
        self.graph.bulk_load(np.array(states))
        self._previous = self.graph.current_resolutions()
        self.safety.check_resolutions(None, self._previous, 0)
        logger.debug(f"V_0 loaded: {self.graph.size} vertices, d={self._previous.d:.4g}, eps={self._previous.eps:.4g}")
        return self._previous

    def iterate(self, instrument: bool = False) -> IterationRecord:
        """Sample, insert and refresh once (k -> k + 1)."""
        started = time.perf_counter()
        x_new = self.graph.sample_free(self.rng, max_rejections=self.config.sampling.max_rejections)
        self.graph.add_sample(x_new)
        self.k += 1
        self.graph.k = self.k

        res = self.graph.current_resolutions()
        self.safety.check_resolutions(self._previous, res, self.k)
        self._previous = res

        report = value_iteration_step(self.graph, self.k, self.config.value_iteration.m_at(self.k), instrument)
        self.last_report = report
        wall_ms = (time.perf_counter() - started) * 1000.0
        return IterationRecord(
            k=self.k,
            size=self.graph.size,
            d=res.d,
            eps=res.eps,
            rho=res.rho,
            stale=len(report.updated),
            residual=report.residual,
            wall_ms=wall_ms
        )
