#!/usr/bin/env python3
"""
Validate Config
Check a scenario without running it and report its resolution schedule.
"""
from typing import Dict

from ..core.config import Config
from ..core.logger import ScriptLogger
from ..core.safety import SafetyChecker
from ..planner.ipolicy import build_scene


def validate_config(config: Config, logger: ScriptLogger) -> Dict[str, object]:
    """
    Validate the configuration and describe the schedule at |V_0| and at the
    largest graph the run can reach.

    Raises:
        ConfigError: Listing every problem found
    """
    logger.section(f"VALIDATE - {config.scenario.name}")
    SafetyChecker(logger).validate_config(config)

    env, model, schedule = build_scene(config)
    samp = config.sampling
    initial = samp.initial_samples + samp.forced_goal_samples
    final = initial + config.value_iteration.K
    if samp.max_samples is not None:
        final = min(final, samp.max_samples)

    report: Dict[str, object] = {
        'preset': config.scenario.name,
        'model': model.name,
        'M': model.M,
        'lipschitz': model.lipschitz,
        'B': schedule.B,
        'stoppable': model.stoppable,
    }
    for label, size in (('initial', initial), ('final', final)):
        res = schedule.at(size)
        report[label] = {'size': size, 'd': res.d, 'eps': res.eps, 'rho': res.rho, 'beta': res.beta}
        logger.resolutions(label, size, res)

    if not model.stoppable:
        logger.info("Model cannot stop; cached neighbor sets may exceed the direct definition between prunes")
    return report
