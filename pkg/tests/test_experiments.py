import csv
import math

import pytest
import yaml

from scripts.core.config import Config
from scripts.core.errors import BudgetExhausted, ConfigError
from scripts.core.logger import ScriptLogger
from scripts.experiments.run_comparison import AGGREGATE_HEADER, claim_holds, run_comparison, value_at_time
from scripts.experiments.run_ipolicy import RMSE_HEADER, PlannerRun, run_dir_for, run_ipolicy
from scripts.experiments.run_parking import run_parking
from scripts.experiments.validate_config import validate_config
from scripts.planner.ipolicy import IPolicy
from tests.conftest import point_mass_data


@pytest.fixture
def logger():
    return ScriptLogger('test_experiments', console_output=False)


def car_data(tmp_path, **sections):
    data = point_mass_data(tmp_path, **sections)
    data['scenario'].update(name='tiny_car', model='simple_car', goal={'center': [0.0, 0.0, 0.0], 'radius': 1.0})
    data['evaluation'] = {'oracle': 'none'}
    data['rollout'] = {'starts': [[4.0, 4.0, 0.0]], 'max_time': 0.1}
    return data


def read_rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def test_run_writes_every_artifact(tiny_config, logger):
    artifacts = run_ipolicy(tiny_config, logger)
    run_dir = run_dir_for(tiny_config)
    assert artifacts.run_dir == run_dir
    assert artifacts.checkpoints == [0, 10, 20, 30]
    assert artifacts.samples == 21 + 30
    for k in artifacts.checkpoints:
        rows = read_rows(run_dir / 'checkpoints' / f"checkpoint_{k}.csv")
        assert rows[0] == ['id', 'x0', 'x1', 'theta_value', 'staleness']
        assert len(rows) == 1 + 21 + k
    rmse_rows = read_rows(run_dir / 'rmse_ipolicy.csv')
    assert rmse_rows[0] == RMSE_HEADER
    assert len(rmse_rows) == 1 + 4
    assert len(read_rows(run_dir / 'iterations.csv')) == 1 + 30
    assert (run_dir / 'trajectories' / 'traj_0.csv').exists()
    summary = yaml.safe_load((run_dir / 'summary.yaml').read_text())
    assert summary['iterations'] == 30
    assert summary['compute_s'] == 0
    resolved = yaml.safe_load((run_dir / 'resolved_config.yaml').read_text())
    assert resolved['value_iteration']['P'] == 2


def test_zero_iterations_checkpoint_once(tmp_path, logger):
    config = Config(data=point_mass_data(tmp_path, value_iteration={'P': 2, 'K': 0}))
    artifacts = run_ipolicy(config, logger)
    assert artifacts.checkpoints == [0]
    assert sorted(p.name for p in (artifacts.run_dir / 'checkpoints').iterdir()) == ['checkpoint_0.csv']


def test_same_seed_same_bytes(tmp_path, logger):
    runs = []
    for name in ('a', 'b'):
        data = point_mass_data(tmp_path)
        data['output'] = {'out_dir': str(tmp_path / name), 'record_timing': False}
        runs.append(run_ipolicy(Config(data=data), logger).run_dir)
    files = sorted(p.relative_to(runs[0]) for p in runs[0].rglob('*') if p.is_file())
    files = [f for f in files if f.name != 'resolved_config.yaml']
    assert files
    for rel in files:
        assert (runs[0] / rel).read_bytes() == (runs[1] / rel).read_bytes(), rel


def test_sample_cap_stops_the_run(tmp_path, logger):
    data = point_mass_data(tmp_path, sampling={'seed': 3, 'initial_samples': 20, 'max_samples': 26})
    artifacts = run_ipolicy(Config(data=data), logger)
    assert artifacts.samples == 26
    assert artifacts.iterations == 5
    assert artifacts.checkpoints[-1] == 5


def test_on_checkpoint_can_stop(tiny_config, logger):
    run = PlannerRun(tiny_config, logger)
    artifacts = run.execute(on_checkpoint=lambda current, k: k >= 10)
    assert artifacts.stopped_early
    assert artifacts.iterations == 10


def test_planner_values_stay_in_range(tiny_config):
    planner = IPolicy(tiny_config)
    planner.initialize()
    for _ in range(15):
        record = planner.iterate()
        theta = planner.graph.theta
        assert ((theta >= 0.0) & (theta <= 1.0)).all()
    assert record.k == 15
    assert record.size == 36


def test_compare_ipolicy_only(tiny_config, logger):
    report = run_comparison(tiny_config, logger, methods=['ipolicy'])
    assert report['methods'] == ['ipolicy']
    assert 'claim_holds' not in report
    root = run_dir_for(tiny_config).parent
    rows = read_rows(root / 'comparison.csv')
    assert rows[0] == AGGREGATE_HEADER
    assert {row[1] for row in rows[1:]} == {'0', '1'}
    assert (root / 'seed_0' / 'rmse_ipolicy.csv').exists()
    assert (root / 'comparison_summary.yaml').exists()


def test_compare_with_multigrid(tiny_config, logger):
    report = run_comparison(tiny_config, logger, seeds=[0])
    assert report['seeds'] == [0]
    mg = read_rows(run_dir_for(tiny_config).parent / 'seed_0' / 'rmse_multigrid.csv')
    assert len(mg) == 1 + 2


def test_compare_needs_an_oracle(tmp_path, logger):
    config = Config(data=point_mass_data(tmp_path, evaluation={'oracle': 'none'}))
    with pytest.raises(ConfigError, match='oracle'):
        run_comparison(config, logger)


def test_claim_helpers():
    ours = [[1.0, 100, 3.0, 0], [2.0, 200, 2.0, 0]]
    theirs = [[1.5, 50, 2.5, 0], [4.0, 90, 1.0, 0]]
    assert value_at_time(ours, 1.9) == 3.0
    assert value_at_time(theirs, 1.0) is None
    assert claim_holds(ours, theirs) is True
    assert claim_holds(ours, [[2.0, 90, 1.0, 0]]) is False
    assert claim_holds([], theirs) is None
    assert claim_holds([[1.0, 10, math.nan, 3]], theirs) is None


def test_parking_fails_within_budget(tmp_path, logger):
    config = Config(data=car_data(tmp_path, value_iteration={'P': 2, 'K': 3}))
    with pytest.raises(BudgetExhausted):
        run_parking(config, logger)
    failure = yaml.safe_load((run_dir_for(config) / 'parking_failure.yaml').read_text())
    assert failure['success'] is False
    assert [a['k'] for a in failure['attempts']] == [0, 3]


def test_parking_rejects_point_mass(tiny_config, logger):
    with pytest.raises(ConfigError):
        run_parking(tiny_config, logger)


def test_validate_report(tiny_config, logger):
    report = validate_config(tiny_config, logger)
    assert report['model'] == 'point_mass'
    assert report['initial']['size'] == 21
    assert report['final']['size'] == 51
    assert report['final']['d'] < report['initial']['d']
    assert report['stoppable'] is True
