#!/usr/bin/env python3
"""
Run Parking
Plan until the first collision-free rollout from the configured start reaches
the parking spot, trying a rollout at every checkpoint.
"""
from typing import Dict

from ..core.config import Config
from ..core.errors import BudgetExhausted, ConfigError
from ..core.logger import ScriptLogger
from ..planner.policy import Outcome, rollout
from .run_ipolicy import PlannerRun


def run_parking(config: Config, logger: ScriptLogger) -> Dict[str, object]:
    """
    Plan and try the parking maneuver at each checkpoint.

    Args:
        config: Validated car configuration with one rollout start
        logger: Script logger

    Returns:
        Success record (samples and compute time at first success)

    Raises:
        BudgetExhausted: No successful rollout within the sample/time budget
    """
    if config.scenario.model == 'point_mass':
        raise ConfigError("park needs a car model")
    if not config.rollout.starts:
        raise ConfigError("park needs rollout.starts")
    start = config.rollout.starts[0]
    ro = config.rollout

    logger.section(f"PARKING - {config.scenario.name} from {start} (seed {config.sampling.seed})")
    run = PlannerRun(config, logger)
    attempts = []
    success: Dict[str, object] = {}

    def try_park(current: PlannerRun, k: int) -> bool:
        traj = rollout(current.graph, start, ro.max_time, substeps=ro.substeps, goal_tiebreak=ro.goal_tiebreak)
        attempts.append({'k': k, 'samples': current.graph.size, 'outcome': traj.outcome.value})
        if traj.outcome != Outcome.REACHED_GOAL:
            return False
        success.update({
            'k': k,
            'samples': current.graph.size,
            'compute_s': float(current.timed(current.artifacts.compute_s)),
            'hit_time': float(traj.hit_time),
        })
        current.writer.write_csv('trajectories/traj_0.csv', traj.header(), traj.rows(), trailer=[traj.summary()])
        current.artifacts.trajectories.append(traj)
        logger.info(f"✅ Parked after {current.graph.size} samples (hit time {traj.hit_time:.3f})")
        return True

    run.execute(on_checkpoint=try_park)
    summary = run.summary()
    summary['attempts'] = attempts

    if not success:
        summary['success'] = False
        run.writer.write_yaml('parking_failure.yaml', summary)
        logger.error(f"❌ No successful rollout within {run.graph.size} samples")
        raise BudgetExhausted(
            f"{config.scenario.name}: no successful parking rollout after {len(attempts)} attempts "
            f"({run.graph.size} samples); last outcome {attempts[-1]['outcome'] if attempts else 'none'}"
        )

    summary['success'] = True
    summary.update({f"first_success_{key}": value for key, value in success.items()})
    run.writer.write_yaml('summary.yaml', summary)
    return summary
