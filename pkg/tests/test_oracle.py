import math

import numpy as np
import pytest

from scripts.core.config import EvaluationConfig
from scripts.core.errors import ConfigError
from scripts.evaluation.oracle import AnalyticOracle, GridOracle, make_oracle
from scripts.planner.geometry import CircleObstacle, Environment, Metric, RectObstacle

H = 0.1


def open_scene():
    return Environment([-10.0, -10.0], [10.0, 10.0], [], [0.0, 0.0], 1.0, Metric(2))


def walled_scene():
    obstacles = [RectObstacle(lo=(2.0, -7.0), hi=(5.0, 3.0)), CircleObstacle(center=(-4.0, 5.0), radius=2.5)]
    return Environment([-10.0, -10.0], [10.0, 10.0], obstacles, [0.0, 0.0], 1.0, Metric(2))


@pytest.fixture(scope='module')
def open_grid():
    return GridOracle(open_scene(), h=H, connectivity=16)


@pytest.fixture(scope='module')
def walled_grid():
    return GridOracle(walled_scene(), h=H, connectivity=16)


def test_empty_world_axis(open_grid):
    assert open_grid.time_at([10.0, 0.0]) == pytest.approx(9.0, abs=H * 1.08)
    assert open_grid.time_at([0.0, 0.0]) == 0.0
    assert open_grid.time_at([0.5, 0.5]) == 0.0


def test_grid_matches_straight_line(open_grid):
    analytic = AnalyticOracle(open_scene())
    rng = np.random.default_rng(2)
    points = rng.uniform(-9.5, 9.5, size=(200, 2))
    grid = open_grid.times(points)
    exact = analytic.times(points)
    assert np.all(grid >= exact - H)
    # 16-connected paths overestimate by under 3%
    assert np.all(grid <= 1.03 * exact + 2 * H)


def test_grid_is_lipschitz(open_grid):
    rng = np.random.default_rng(4)
    a = rng.uniform(-9.0, 9.0, size=(300, 2))
    b = a + rng.uniform(-0.5, 0.5, size=a.shape)
    gap = np.abs(open_grid.times(a) - open_grid.times(b))
    assert np.all(gap <= 1.03 * np.linalg.norm(a - b, axis=1) + 2 * H)


def test_obstacle_interior_is_infinite(walled_grid):
    assert walled_grid.time_at([3.0, 0.0]) == math.inf
    assert walled_grid.time_at([-4.0, 5.0]) == math.inf
    assert walled_grid.time_at([12.0, 0.0]) == math.inf


def test_detour_around_the_rectangle(walled_grid):
    # (9, 0) -> corner (5, 3) -> corner (2, 3) -> goal boundary
    detour = 5.0 + 3.0 + math.sqrt(13.0) - 1.0
    assert walled_grid.time_at([9.0, 0.0]) == pytest.approx(detour, abs=0.3)
    assert walled_grid.time_at([9.0, 0.0]) > 8.0 + 1.0


def test_near_obstacle_points_are_finite(walled_grid):
    # free points next to the wall interpolate from the finite corners only
    t = walled_grid.time_at([1.97, 0.0])
    assert math.isfinite(t)
    assert t == pytest.approx(0.97, abs=2 * H)


def test_speed_scales_times():
    slow = GridOracle(open_scene(), h=0.25, connectivity=8, speed=2.0)
    fast = GridOracle(open_scene(), h=0.25, connectivity=8, speed=1.0)
    assert slow.time_at([6.0, 0.0]) == pytest.approx(fast.time_at([6.0, 0.0]) / 2.0)


def test_grid_rejects_bad_settings(car_env):
    with pytest.raises(ConfigError):
        GridOracle(open_scene(), h=0.5, connectivity=4)
    with pytest.raises(ConfigError):
        GridOracle(open_scene(), h=0.0)
    with pytest.raises(ConfigError):
        GridOracle(car_env, h=0.5)


def test_goal_smaller_than_spacing_is_reported():
    env = Environment([-10.0, -10.0], [10.0, 10.0], [], [0.05, 0.05], 0.01, Metric(2))
    with pytest.raises(ConfigError, match='goal region'):
        GridOracle(env, h=0.5)


def test_analytic_oracle():
    oracle = AnalyticOracle(open_scene())
    np.testing.assert_allclose(oracle.times(np.array([[10.0, 0.0], [3.0, 4.0], [0.1, 0.0]])), [9.0, 4.0, 0.0])
    assert oracle.time_at([11.0, 0.0]) == math.inf
    with pytest.raises(ConfigError):
        AnalyticOracle(walled_scene())


def test_make_oracle():
    assert make_oracle(EvaluationConfig(oracle='none'), open_scene()) is None
    assert isinstance(make_oracle(EvaluationConfig(oracle='analytic'), open_scene()), AnalyticOracle)
    assert isinstance(make_oracle(EvaluationConfig(oracle='grid', oracle_h=0.5), open_scene()), GridOracle)
    with pytest.raises(ConfigError):
        make_oracle(EvaluationConfig(oracle='fmm'), open_scene())
