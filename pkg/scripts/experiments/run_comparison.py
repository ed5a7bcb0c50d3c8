#!/usr/bin/env python3
"""
Run Comparison
iPolicy against the multigrid baseline on one scene and one shared oracle,
across the configured seeds.
"""
import copy
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from ..core.artifacts import ArtifactWriter
from ..core.config import Config
from ..core.errors import ConfigError
from ..core.logger import ScriptLogger
from ..evaluation.multigrid import multigrid_baseline
from ..evaluation.oracle import make_oracle
from ..planner.ipolicy import build_scene
from .run_ipolicy import RMSE_HEADER, run_dir_for, run_ipolicy

AGGREGATE_HEADER = ['method', 'seed', *RMSE_HEADER]


def value_at_time(rows: Sequence[list], wall_s: float) -> Optional[float]:
    """RMSE of the latest finite row taken at or before wall_s."""
    best = None
    for row in rows:
        if row[0] <= wall_s and not math.isnan(row[2]):
            best = row[2]
    return best


def claim_holds(ipolicy_rows: Sequence[list], multigrid_rows: Sequence[list]) -> Optional[bool]:
    """
    Whether iPolicy's RMSE is at most the multigrid RMSE at the last common
    wall time of the two series; None when either series has no finite value there.
    """
    if not ipolicy_rows or not multigrid_rows:
        return None
    common = min(ipolicy_rows[-1][0], multigrid_rows[-1][0])
    ours = value_at_time(ipolicy_rows, common)
    theirs = value_at_time(multigrid_rows, common)
    if ours is None or theirs is None:
        return None
    return ours <= theirs


def run_comparison(
    config: Config,
    logger: ScriptLogger,
    seeds: Optional[List[int]] = None,
    methods: Optional[List[str]] = None
) -> Dict[str, object]:
    """
    Run the selected methods per seed and write per-seed and aggregate RMSE series.

    Args:
        config: Validated point-mass configuration with an oracle
        logger: Script logger
        seeds: Seeds (defaults to evaluation.seeds)
        methods: Subset of {'ipolicy', 'multigrid'} (defaults to evaluation.methods)

    Returns:
        Comparison report (also written as comparison_summary.yaml)
    """
    seeds = list(seeds if seeds is not None else config.evaluation.seeds)
    methods = list(methods if methods is not None else config.evaluation.methods)
    record_timing = config.output.record_timing

    env, model, schedule = build_scene(config)
    oracle = make_oracle(config.evaluation, env)
    if oracle is None:
        raise ConfigError("compare needs evaluation.oracle set to 'grid' or 'analytic'")

    logger.section(f"COMPARISON - {config.scenario.name}: {', '.join(methods)} over seeds {seeds}")

    multigrid_rows: List[list] = []
    if 'multigrid' in methods:
        logger.subsection("Multigrid baseline")
        levels = multigrid_baseline(env, model, config.evaluation.multigrid_resolutions, schedule,
                                    oracle, config.evaluation.multigrid_tol)
        multigrid_rows = [level.row(record_timing) for level in levels]

    series: Dict[str, Dict[int, List[list]]] = {m: {} for m in methods}
    for seed in seeds:
        seed_config = copy.deepcopy(config)
        seed_config.apply_overrides(seed=seed)
        writer = ArtifactWriter(run_dir_for(seed_config))

        if 'ipolicy' in methods:
            artifacts = run_ipolicy(seed_config, logger, oracle)
            series['ipolicy'][seed] = artifacts.rmse_rows
        if 'multigrid' in methods:
            writer.write_csv('rmse_multigrid.csv', RMSE_HEADER, multigrid_rows)
            series['multigrid'][seed] = multigrid_rows

    aggregate = []
    for method in methods:
        for seed in seeds:
            rows = series[method].get(seed, [])
            if not any(not math.isnan(row[2]) for row in rows):
                logger.warning(f"⚠️  {method} seed {seed}: RMSE series is empty")
            aggregate.extend([method, seed, *row] for row in rows)

    root = ArtifactWriter(Path(config.output.out_dir) / config.scenario.name)
    root.write_csv('comparison.csv', AGGREGATE_HEADER, aggregate)

    report: Dict[str, object] = {
        'preset': config.scenario.name,
        'seeds': seeds,
        'methods': methods,
    }
    if set(methods) == {'ipolicy', 'multigrid'}:
        if not record_timing:
            logger.warning("⚠️  Timing disabled; equal-time claim check skipped")
        else:
            verdicts = [claim_holds(series['ipolicy'][s], multigrid_rows) for s in seeds]
            wins = sum(1 for v in verdicts if v)
            needed = math.ceil(0.6 * len(seeds))
            report['ipolicy_wins'] = wins
            report['claim_holds'] = wins >= needed
            logger.info(f"iPolicy at or below multigrid RMSE at equal time on {wins}/{len(seeds)} seeds")
            if wins < needed:
                logger.warning(f"⚠️  Faster-convergence claim not met ({wins}/{len(seeds)} < {needed})")

    root.write_yaml('comparison_summary.yaml', report)
    return report
