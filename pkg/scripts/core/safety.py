#!/usr/bin/env python3
"""
Safety Utilities
Configuration validation and runtime checks of the resolution assumptions.
"""
import math
from typing import List, Optional, Sequence

from .config import Config
from .errors import ConfigError, NumericalError
from .logger import ScriptLogger

ORACLE_KINDS = ('none', 'grid', 'analytic')
METHODS = ('ipolicy', 'multigrid')


class SafetyChecker:
    """Validates scenarios before a run and watches the resolution schedule during it."""

    def __init__(self, logger: ScriptLogger):
        """
        Initialize safety checker.

        Args:
            logger: Logger instance
        """
        self.logger = logger
        self.rho_warnings = 0

    def validate_config(self, config: Config):
        """
        Check a configuration before running.

        Every problem found is collected and reported together.

        Args:
            config: Loaded configuration

        Raises:
            ConfigError: Listing all problems found
        """
        # deferred: the planner package imports core
        from ..planner.dynamics import make_model
        from ..planner.geometry import Environment
        from ..planner.sample_graph import ResolutionSchedule, unit_ball_volume

        problems: List[str] = []
        vi = config.value_iteration
        samp = config.sampling
        sc = config.scenario

        if vi.P < 0:
            problems.append(f"value_iteration.P must be >= 0 (got {vi.P})")
        if vi.m_schedule not in ('constant', 'linear'):
            problems.append(f"value_iteration.m_schedule.kind must be constant or linear (got {vi.m_schedule!r})")
        if vi.m0 < 1:
            problems.append(f"value_iteration.m_schedule.m0 must be >= 1 (got {vi.m0})")
        if vi.K < 0:
            problems.append(f"value_iteration.K must be >= 0 (got {vi.K})")
        if vi.time_budget is not None and vi.time_budget <= 0:
            problems.append(f"value_iteration.time_budget must be positive (got {vi.time_budget})")

        initial = samp.initial_samples + samp.forced_goal_samples
        if samp.initial_samples < 0 or samp.forced_goal_samples < 0:
            problems.append("sampling counts must be non-negative")
        if initial < 3:
            problems.append(f"initial vertex set needs at least 3 samples (got {initial})")
        if samp.max_samples is not None and samp.max_samples < initial:
            problems.append(f"sampling.max_samples ({samp.max_samples}) is below the initial vertex count ({initial})")

        if config.checkpoints.every < 1:
            problems.append(f"checkpoints.every must be >= 1 (got {config.checkpoints.every})")
        if config.rollout.substeps < 1:
            problems.append(f"rollout.substeps must be >= 1 (got {config.rollout.substeps})")
        if config.rollout.max_time <= 0:
            problems.append(f"rollout.max_time must be positive (got {config.rollout.max_time})")

        sched = config.schedule
        if sched.epsilon_coefficient <= 0:
            problems.append("schedule.epsilon_rule.coefficient must be positive")
        if not 0 < sched.epsilon_exponent < 1:
            problems.append("schedule.epsilon_rule.exponent must lie in (0, 1)")

        ev = config.evaluation
        if ev.oracle not in ORACLE_KINDS:
            problems.append(f"evaluation.oracle must be one of {', '.join(ORACLE_KINDS)} (got {ev.oracle!r})")
        elif ev.oracle != 'none' and sc.model != 'point_mass':
            problems.append(f"evaluation.oracle '{ev.oracle}' is only available for the point mass")
        elif ev.oracle == 'analytic' and sc.obstacles:
            problems.append("evaluation.oracle 'analytic' requires an obstacle-free scene")
        if ev.connectivity not in (8, 16):
            problems.append(f"evaluation.connectivity must be 8 or 16 (got {ev.connectivity})")
        if ev.oracle_h <= 0:
            problems.append("evaluation.oracle_h must be positive")
        res_list = ev.multigrid_resolutions
        if any(r <= 0 for r in res_list) or any(b >= a for a, b in zip(res_list, res_list[1:])):
            problems.append(f"evaluation.multigrid_resolutions must be positive and strictly decreasing (got {res_list})")
        unknown = [m for m in ev.methods if m not in METHODS]
        if unknown:
            problems.append(f"evaluation.methods has unknown entries: {unknown}")

        try:
            env = Environment.from_config(sc)
        except ConfigError as e:
            problems.append(str(e))
            env = None

        if env is not None:
            try:
                model = make_model(sc.model, env.metric, sched.M, sched.lipschitz,
                                   config.rollout.disc_boundary, config.rollout.box_grid,
                                   config.rollout.interval_count)
                schedule = ResolutionSchedule.from_config(sched, env, model)
                bound = (env.measure() / unit_ball_volume(env.n)) ** (1.0 / env.n)
                if schedule.B <= bound:
                    message = (
                        f"schedule.B = {schedule.B:.4g} is not above the dispersion lower bound "
                        f"(mu(X) / C_n)^(1/n) = {bound:.4g}"
                    )
                    if sched.allow_small_B:
                        self.logger.warning(f"⚠️  {message}; accepted by schedule.allow_small_B")
                    else:
                        problems.append(message + "; raise schedule.B or set schedule.allow_small_B")
                if initial >= 3:
                    res = schedule.at(initial)
                    if res.eps <= res.d:
                        problems.append(
                            f"eps must exceed d at |V_0| = {initial} (eps={res.eps:.4g}, d={res.d:.4g}); "
                            f"raise schedule.epsilon_rule.coefficient or lower schedule.B"
                        )
            except ConfigError as e:
                problems.append(str(e))

            for start in config.rollout.starts:
                if len(start) != env.n:
                    problems.append(f"rollout start {start} has dimension {len(start)}, expected {env.n}")
                elif not env.is_free_inflated(start, 0.0):
                    problems.append(f"rollout start {start} is not collision-free")

        if problems:
            for problem in problems:
                self.logger.error(f"❌ {problem}")
            raise ConfigError("Invalid configuration:\n  - " + "\n  - ".join(problems))

        self.logger.info("✅ Configuration valid")

    def check_resolutions(self, previous, current, k: int):
        """
        Assert the schedule assumptions between two consecutive iterations.

        eps > d and non-increasing d, eps, d/eps are enforced; rho >= previous d
        can fail under the 2d override and is only reported.

        Args:
            previous: Resolutions of iteration k - 1 (None at k = 0)
            current: Resolutions of iteration k
            k: Iteration counter

        Raises:
            NumericalError: If an enforced assumption breaks
        """
        if current.eps <= current.d:
            raise NumericalError(f"k={k}: eps={current.eps:.6g} does not exceed d={current.d:.6g}")
        if previous is None:
            return
        tol = 1e-12
        if current.d > previous.d + tol or current.eps > previous.eps + tol:
            raise NumericalError(f"k={k}: resolutions increased (d {previous.d:.6g}->{current.d:.6g}, "
                                 f"eps {previous.eps:.6g}->{current.eps:.6g})")
        if current.d / current.eps > previous.d / previous.eps + tol:
            raise NumericalError(f"k={k}: d/eps increased")
        if current.rho < previous.d:
            self.rho_warnings += 1
            if self.rho_warnings == 1:
                self.logger.warning(
                    f"⚠️  k={k}: rho={current.rho:.6g} below previous d={previous.d:.6g}; "
                    f"further occurrences are counted, not logged"
                )


def discount_window(betas: Sequence[float], ms: Sequence[int], P: int, start: int = 0,
                    windows: Optional[int] = None) -> float:
    """
    Accumulated worst-case discount over consecutive (P + 1)-iteration windows:
    the product over windows of max over the window of beta_k ** m_k.

    Args:
        betas: beta_k per iteration
        ms: m_k per iteration
        P: Staleness threshold
        start: First iteration of the first window
        windows: Number of windows (default: as many complete ones as available)

    Returns:
        The product; values below 1 mean the windows contract
    """
    width = P + 1
    available = (min(len(betas), len(ms)) - start) // width
    count = available if windows is None else min(windows, available)
    total = 1.0
    for t in range(count):
        lo = start + t * width
        total *= max(math.pow(betas[k], ms[k]) for k in range(lo, lo + width))
    return total
