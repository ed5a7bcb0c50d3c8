"""Longer preset runs; select with `pytest -m slow`."""
import csv
import math

import numpy as np
import pytest

from scripts.core.config import Config
from scripts.core.errors import BudgetExhausted
from scripts.core.logger import ScriptLogger
from scripts.evaluation.oracle import AnalyticOracle
from scripts.experiments.run_comparison import run_comparison
from scripts.experiments.run_ipolicy import PlannerRun, run_dir_for, run_ipolicy
from scripts.experiments.run_parking import run_parking
from scripts.planner.policy import Outcome
from scripts.planner.value_iteration import kruzhkov_inv, kruzhkov_inv_many

pytestmark = pytest.mark.slow

# share of the RMS oracle time the empty-world RMSE must stay under at 2000 samples
EMPTY_WORLD_RMSE_RATIO = 0.9


@pytest.fixture
def logger():
    return ScriptLogger('test_acceptance', console_output=False)


def preset(name, tmp_path, K, seed=None):
    config = Config.load_from_file(name)
    config.apply_overrides(seed=seed, out_dir=str(tmp_path))
    config.value_iteration.K = K
    config.output.record_timing = False
    return config


def rmse_by_samples(path):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    return {int(row['samples']): float(row['rmse']) for row in rows}


def test_empty_world_run(tmp_path, logger):
    artifacts = run_ipolicy(preset('pointmass_empty', tmp_path, K=800), logger)
    final = artifacts.rmse_rows[-1]
    assert math.isfinite(final[2])
    assert artifacts.trajectories[0].outcome == Outcome.REACHED_GOAL


def test_rollout_time_is_bounded_below_by_the_estimate(tmp_path, logger):
    run = PlannerRun(preset('pointmass_empty', tmp_path, K=800), logger)
    run.execute()
    run.write_rollouts()
    traj = run.artifacts.trajectories[0]
    assert traj.outcome == Outcome.REACHED_GOAL
    res = run.graph.current_resolutions()
    estimate = kruzhkov_inv(run.graph.estimate_at(run.config.rollout.starts[0]))
    assert math.isfinite(estimate)
    assert traj.hit_time >= estimate - (res.eps + res.d)


def test_empty_world_beats_zero_estimate(tmp_path, logger):
    run = PlannerRun(preset('pointmass_empty', tmp_path, K=500), logger)
    run.execute()
    graph = run.graph
    truth = AnalyticOracle(graph.env).times(graph.states)
    estimate = kruzhkov_inv_many(graph.theta)
    finite = np.isfinite(truth) & np.isfinite(estimate)
    assert finite.mean() > 0.95
    err = np.sqrt(np.mean((estimate[finite] - truth[finite]) ** 2))
    assert err < np.sqrt(np.mean(truth[finite] ** 2))


def test_goal_values_hold_at_every_checkpoint(tmp_path, logger):
    violations = []

    def check(run, k):
        graph = run.graph
        inflated = graph.goal_mask()
        inside = graph.env.goal_mask(graph.states, 0.0)
        if np.any(graph.theta[inflated | inside] != 0.0):
            violations.append((run.config.sampling.seed, k))
        return False

    for seed in range(50):
        config = preset('pointmass_empty', tmp_path, K=479, seed=seed)
        config.checkpoints.every = 10
        run = PlannerRun(config, logger)
        run.execute(on_checkpoint=check)
        assert run.graph.size == 500
    assert violations == []


def test_empty_world_rmse_at_2000_samples(tmp_path, logger):
    run = PlannerRun(preset('pointmass_empty', tmp_path, K=1979), logger)
    artifacts = run.execute()
    graph = run.graph
    assert graph.size == 2000

    truth = AnalyticOracle(graph.env).times(graph.states)
    finite = np.isfinite(truth) & np.isfinite(kruzhkov_inv_many(graph.theta))
    scale = float(np.sqrt(np.mean(truth[finite] ** 2)))
    assert artifacts.rmse_rows[-1][1] == 2000
    assert artifacts.rmse_rows[-1][2] <= EMPTY_WORLD_RMSE_RATIO * scale


def test_cluttered_comparison(tmp_path, logger):
    config = Config.load_from_file('pointmass_cluttered')
    config.apply_overrides(out_dir=str(tmp_path))
    config.output.record_timing = True
    seeds = [0, 1, 2, 3, 4]
    report = run_comparison(config, logger, seeds=seeds)

    # both series over the same oracle, for every seed
    with open(tmp_path / 'pointmass_cluttered' / 'comparison.csv') as f:
        rows = list(csv.DictReader(f))
    for method in ('ipolicy', 'multigrid'):
        assert {int(r['seed']) for r in rows if r['method'] == method} == set(seeds)
    levels = len(config.evaluation.multigrid_resolutions)
    assert sum(1 for r in rows if r['method'] == 'multigrid') == levels * len(seeds)
    assert isinstance(report['claim_holds'], bool)
    assert 0 <= report['ipolicy_wins'] <= len(seeds)

    improved = 0
    for seed in seeds:
        seed_config = Config.load_from_file('pointmass_cluttered')
        seed_config.apply_overrides(seed=seed, out_dir=str(tmp_path))
        series = rmse_by_samples(run_dir_for(seed_config) / 'rmse_ipolicy.csv')
        if series[1934] < series[761]:
            improved += 1
    assert improved >= 4


@pytest.mark.parametrize('name', ['parking_headin', 'parking_parallel'])
def test_parking_success_rate(tmp_path, logger, name):
    parked = 0
    for seed in range(5):
        config = preset(name, tmp_path, K=2000, seed=seed)
        config.apply_overrides(max_samples=2000, time_budget=600.0)
        try:
            summary = run_parking(config, logger)
        except BudgetExhausted:
            continue
        assert summary['first_success_samples'] <= 2000
        parked += 1
    assert parked >= 4


def test_dubins_value_asymmetry(tmp_path, logger):
    run = PlannerRun(preset('dubins_value', tmp_path, K=5000), logger)
    run.execute()
    graph = run.graph
    assert graph.size >= 5000

    def mean_finite(point):
        ids = graph.range_query(point, 2.0)
        values = graph.theta[ids]
        values = values[values < 1.0]
        assert len(values)
        return float(values.mean())

    # both face +x, the goal heading: behind drives straight in, ahead has to turn around
    behind = mean_finite([-5.0, 0.0, 0.0])
    ahead = mean_finite([5.0, 0.0, 0.0])
    assert behind < ahead


@pytest.mark.parametrize('name', ['pointmass_cluttered', 'parking_headin'])
def test_preset_runs_are_byte_identical(tmp_path, logger, name):
    first = run_ipolicy(preset(name, tmp_path / 'a', K=150, seed=3), logger).run_dir
    second = run_ipolicy(preset(name, tmp_path / 'b', K=150, seed=3), logger).run_dir
    files = sorted(p.relative_to(first) for p in first.rglob('*') if p.is_file())
    assert files == sorted(p.relative_to(second) for p in second.rglob('*') if p.is_file())
    for rel in files:
        if rel.name == 'resolved_config.yaml':
            continue
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), rel
