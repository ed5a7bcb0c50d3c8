import pytest
import yaml

from scripts.core.config import Config, list_presets, resolve_config_path, save_results
from scripts.core.errors import ConfigError
from tests.conftest import point_mass_data


def test_defaults_fill_missing_sections(tmp_path):
    config = Config(data={'scenario': {'model': 'point_mass', 'goal': {'center': [0, 0]}}})
    assert config.value_iteration.P == 50
    assert config.value_iteration.K == 2000
    assert config.schedule.epsilon_coefficient == 5.0
    assert config.schedule.epsilon_exponent == pytest.approx(2.0 / 3.0)
    assert config.sampling.initial_samples == 20
    assert config.evaluation.oracle == 'none'
    assert config.scenario.workspace_lo == [-10.0, -10.0]


def test_yaml_file_round_trip(tmp_path):
    path = tmp_path / 'scene.yaml'
    path.write_text(yaml.safe_dump(point_mass_data(tmp_path)))
    config = Config.load_from_file(str(path))
    assert config.scenario.name == 'tiny'
    assert config.value_iteration.m_at(0) == 20
    assert config.checkpoints.every == 10
    assert config.rollout.starts == [[3.0, 3.0]]


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv('IPOLICY_SEED', '11')
    monkeypatch.setenv('IPOLICY_OUT_DIR', str(tmp_path / 'elsewhere'))
    monkeypatch.setenv('IPOLICY_TIME_BUDGET', '2.5')
    config = Config(data=point_mass_data(tmp_path))
    assert config.sampling.seed == 11
    assert config.output.out_dir == str(tmp_path / 'elsewhere')
    assert config.value_iteration.time_budget == 2.5


def test_command_line_overrides_win(tmp_path, monkeypatch):
    monkeypatch.setenv('IPOLICY_SEED', '11')
    config = Config(data=point_mass_data(tmp_path))
    config.apply_overrides(seed=4, out_dir='out', time_budget=9.0, max_samples=100)
    assert config.sampling.seed == 4
    assert config.output.out_dir == 'out'
    assert config.value_iteration.time_budget == 9.0
    assert config.sampling.max_samples == 100
    config.apply_overrides()
    assert config.sampling.seed == 4


def test_linear_m_schedule():
    config = Config(data={
        'scenario': {'model': 'point_mass', 'goal': {'center': [0, 0]}},
        'value_iteration': {'m_schedule': {'kind': 'linear', 'm0': 10, 'slope': 0.5}},
    })
    assert [config.value_iteration.m_at(k) for k in (0, 1, 2, 10)] == [10, 10, 11, 15]


def test_resolved_and_get(tmp_path):
    config = Config(data=point_mass_data(tmp_path))
    resolved = config.resolved()
    assert set(resolved) == {'scenario', 'schedule', 'value_iteration', 'sampling',
                             'checkpoints', 'rollout', 'evaluation', 'output'}
    assert config.get('value_iteration.P') == 2
    assert config.get('schedule.B') is None
    assert config.get('schedule.B', 3.0) == 3.0
    assert config.get('value_iteration.P.deeper', 'x') == 'x'


def test_bad_model_and_missing_goal():
    with pytest.raises(ConfigError, match='scenario.model'):
        Config(data={'scenario': {'model': 'hovercraft', 'goal': {'center': [0, 0]}}})
    with pytest.raises(ConfigError, match='goal.center'):
        Config(data={'scenario': {'model': 'point_mass'}})


def test_malformed_values_become_config_errors(tmp_path):
    data = point_mass_data(tmp_path, value_iteration={'P': 'many'})
    with pytest.raises(ConfigError, match='Malformed'):
        Config(data=data)


def test_presets_load():
    names = list_presets()
    assert 'pointmass_cluttered' in names
    assert 'parking_headin' in names
    for name in names:
        config = Config.load_from_file(name)
        assert config.scenario.model in ('point_mass', 'simple_car', 'dubins_car')
    cluttered = Config.load_from_file('pointmass_cluttered')
    assert cluttered.value_iteration.P == 50
    assert cluttered.value_iteration.m0 == 500
    assert cluttered.evaluation.oracle == 'grid'


def test_unknown_config():
    with pytest.raises(ConfigError, match='not found'):
        resolve_config_path('no_such_preset')


def test_save_results(tmp_path):
    target = tmp_path / 'nested' / 'report.json'
    save_results({'b': 1, 'a': [1.5, 2]}, str(target))
    assert target.read_text().startswith('{\n  "a"')
