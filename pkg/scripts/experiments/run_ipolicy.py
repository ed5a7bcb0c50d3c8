#!/usr/bin/env python3
"""
Run iPolicy
Seeded planner run with checkpoint value dumps, RMSE series, rollouts and a
summary, all written under <out>/<preset>/seed_<n>/.
"""
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from ..core.artifacts import ArtifactWriter
from ..core.config import Config
from ..core.logger import ScriptLogger
from ..core.safety import SafetyChecker, discount_window
from ..evaluation.metrics import rmse
from ..evaluation.oracle import make_oracle
from ..planner.geometry import wrap_angle
from ..planner.ipolicy import IPolicy, IterationRecord
from ..planner.policy import Trajectory, rollout

RMSE_HEADER = ['wall_s', 'samples', 'rmse', 'excluded']


@dataclass
class RunArtifacts:
    """What one seeded run produced."""
    run_dir: Path
    seed: int
    iterations: int = 0
    samples: int = 0
    compute_s: float = 0.0
    checkpoints: List[int] = field(default_factory=list)
    rmse_rows: List[list] = field(default_factory=list)
    trajectories: List[Trajectory] = field(default_factory=list)
    stopped_early: bool = False


def run_dir_for(config: Config) -> Path:
    """Artifact directory of a (config, seed) pair."""
    return Path(config.output.out_dir) / config.scenario.name / f"seed_{config.sampling.seed}"


class PlannerRun:
    """One planner execution with its artifact bookkeeping."""

    def __init__(self, config: Config, logger: ScriptLogger, oracle=None):
        """
        Args:
            config: Validated configuration
            logger: Script logger
            oracle: Shared oracle (built from the config when None)
        """
        self.config = config
        self.logger = logger
        self.record_timing = config.output.record_timing
        self.writer = ArtifactWriter(run_dir_for(config))
        self.planner = IPolicy(config, SafetyChecker(logger))
        self.oracle = oracle if oracle is not None else make_oracle(config.evaluation, self.planner.env)
        self.artifacts = RunArtifacts(run_dir=self.writer.run_dir, seed=config.sampling.seed)
        self._betas: List[float] = []
        self._ms: List[int] = []
        self._wall_marks = sorted(config.checkpoints.wall_marks)

    @property
    def graph(self):
        return self.planner.graph

    def timed(self, seconds: float) -> float:
        return seconds if self.record_timing else 0

    def checkpoint(self, k: int):
        """Dump the value table (and slice, RMSE row) at iteration k."""
        graph = self.graph
        self.writer.write_csv(f"checkpoints/checkpoint_{k}.csv", graph.header(), graph.rows())

        if graph.env.metric.angular:
            goal_theta = graph.env.goal.center[2]
            gap = np.abs(wrap_angle(graph.states[:, 2] - goal_theta))
            keep = set(np.flatnonzero(gap <= math.radians(self.config.checkpoints.slice_degrees)).tolist())
            rows = (row for row in graph.rows() if row[0] in keep)
            self.writer.write_csv(f"checkpoints/slice_{k}.csv", graph.header(), rows)

        if self.oracle is not None:
            result = rmse(graph, self.oracle)
            row = [self.timed(self.artifacts.compute_s), graph.size, result.value, result.excluded]
            self.artifacts.rmse_rows.append(row)
            self.logger.info(f"  k={k} |V|={graph.size} rmse={result.value:.4g} (excluded {result.excluded})")

        self.artifacts.checkpoints.append(k)

    def _due(self, k: int) -> bool:
        cp = self.config.checkpoints
        if k % cp.every == 0 or self.graph.size in cp.at_samples:
            return True
        if self._wall_marks and self.artifacts.compute_s >= self._wall_marks[0]:
            while self._wall_marks and self.artifacts.compute_s >= self._wall_marks[0]:
                self._wall_marks.pop(0)
            return True
        return False

    def execute(self, on_checkpoint: Optional[Callable[['PlannerRun', int], bool]] = None) -> RunArtifacts:
        """
        Initialize, iterate until K / max_samples / time budget, and write artifacts.

        Args:
            on_checkpoint: Called after each checkpoint; returning True stops the run

        Returns:
            RunArtifacts of the run
        """
        cfg = self.config
        vi = cfg.value_iteration
        self.writer.write_yaml('resolved_config.yaml', cfg.resolved())

        started = time.perf_counter()
        self.planner.initialize()
        self.artifacts.compute_s += time.perf_counter() - started

        records: List[IterationRecord] = []
        self.checkpoint(0)
        stop = bool(on_checkpoint and on_checkpoint(self, 0))

        for _ in self.logger.progress(range(vi.K), total=vi.K, desc=cfg.scenario.name):
            if stop:
                self.artifacts.stopped_early = True
                break
            if cfg.sampling.max_samples is not None and self.graph.size >= cfg.sampling.max_samples:
                self.logger.info(f"Sample cap {cfg.sampling.max_samples} reached")
                break
            if vi.time_budget is not None and self.artifacts.compute_s >= vi.time_budget:
                self.logger.info(f"Time budget {vi.time_budget}s reached")
                break

            record = self.planner.iterate()
            self.artifacts.compute_s += record.wall_ms / 1000.0
            records.append(record)
            res = self.graph.current_resolutions()
            self._betas.append(res.beta)
            self._ms.append(vi.m_at(record.k))

            if self._due(record.k):
                self.checkpoint(record.k)
                stop = bool(on_checkpoint and on_checkpoint(self, record.k))

        k_final = self.planner.k
        if not self.artifacts.checkpoints or self.artifacts.checkpoints[-1] != k_final:
            self.checkpoint(k_final)
            if on_checkpoint and not stop:
                on_checkpoint(self, k_final)

        self.artifacts.iterations = k_final
        self.artifacts.samples = self.graph.size
        self.writer.write_csv('iterations.csv', IterationRecord.header(),
                              (r.row(self.record_timing) for r in records))
        if self.oracle is not None:
            self.writer.write_csv('rmse_ipolicy.csv', RMSE_HEADER, self.artifacts.rmse_rows)

        window = discount_window(self._betas, self._ms, vi.P)
        self.logger.debug(f"accumulated discount over complete windows: {window:.6g}")
        return self.artifacts

    def write_rollouts(self):
        """Roll out from every configured start and write trajectories/traj_<i>.csv."""
        ro = self.config.rollout
        for i, start in enumerate(ro.starts):
            traj = rollout(self.graph, start, ro.max_time, substeps=ro.substeps, goal_tiebreak=ro.goal_tiebreak)
            self.writer.write_csv(f"trajectories/traj_{i}.csv", traj.header(), traj.rows(), trailer=[traj.summary()])
            self.artifacts.trajectories.append(traj)
            self.logger.info(f"  rollout {i} from {start}: {traj.summary()}")

    def summary(self) -> dict:
        res = self.graph.current_resolutions()
        return {
            'preset': self.config.scenario.name,
            'seed': self.config.sampling.seed,
            'iterations': self.artifacts.iterations,
            'samples': self.artifacts.samples,
            'd': float(res.d),
            'eps': float(res.eps),
            'rho': float(res.rho),
            'checkpoints': list(self.artifacts.checkpoints),
            'compute_s': float(self.timed(self.artifacts.compute_s)),
            'rho_warnings': self.planner.safety.rho_warnings,
            'rollouts': [
                {'outcome': t.outcome.value, 'hit_time': float(t.hit_time), 'steps': len(t.controls)}
                for t in self.artifacts.trajectories
            ],
        }


def run_ipolicy(config: Config, logger: ScriptLogger, oracle=None) -> RunArtifacts:
    """
    Full seeded run: planner loop, checkpoints, rollouts from the configured starts, summary.

    Args:
        config: Validated configuration
        logger: Script logger
        oracle: Shared oracle (built from the config when None)

    Returns:
        RunArtifacts
    """
    logger.section(f"IPOLICY RUN - {config.scenario.name} (seed {config.sampling.seed})")
    run = PlannerRun(config, logger, oracle)
    artifacts = run.execute()
    run.write_rollouts()
    run.writer.write_yaml('summary.yaml', run.summary())

    logger.section("RUN SUMMARY")
    logger.info(f"Iterations: {artifacts.iterations}")
    logger.info(f"Samples: {artifacts.samples}")
    logger.info(f"Checkpoints: {len(artifacts.checkpoints)}")
    logger.info(f"Artifacts: {artifacts.run_dir}")
    return artifacts
