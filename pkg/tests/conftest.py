"""Shared fixtures: small scenes, graphs and configurations."""
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from scripts.core.config import Config
from scripts.planner.dynamics import make_model
from scripts.planner.geometry import CircleObstacle, Environment, Metric, RectObstacle
from scripts.planner.sample_graph import Adjacency, Resolutions, ResolutionSchedule, SampleGraph


def point_mass_data(tmp_path: Path, **sections) -> dict:
    """Small point-mass scenario dict; keyword arguments replace whole sections."""
    data = {
        'scenario': {
            'name': 'tiny',
            'model': 'point_mass',
            'workspace': {'lo': [-5.0, -5.0], 'hi': [5.0, 5.0]},
            'goal': {'center': [0.0, 0.0], 'radius': 1.0},
            'obstacles': [],
        },
        'value_iteration': {'P': 2, 'm_schedule': {'kind': 'constant', 'm0': 20}, 'K': 30},
        'sampling': {'seed': 3, 'initial_samples': 20, 'forced_goal_samples': 1},
        'checkpoints': {'every': 10},
        'rollout': {'starts': [[3.0, 3.0]], 'max_time': 30.0},
        'evaluation': {'oracle': 'analytic', 'multigrid_resolutions': [2.0, 1.0], 'seeds': [0, 1]},
        'output': {'out_dir': str(tmp_path / 'results'), 'record_timing': False},
    }
    data.update(sections)
    return data


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ('IPOLICY_SEED', 'IPOLICY_OUT_DIR', 'IPOLICY_TIME_BUDGET', 'LOG_LEVEL'):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def empty_env() -> Environment:
    return Environment([-10.0, -10.0], [10.0, 10.0], [], [0.0, 0.0], 1.0, Metric(2))


@pytest.fixture
def cluttered_env() -> Environment:
    obstacles = [RectObstacle(lo=(2.0, -7.0), hi=(5.0, 3.0)), CircleObstacle(center=(-4.0, 5.0), radius=2.5)]
    return Environment([-10.0, -10.0], [10.0, 10.0], obstacles, [0.0, 0.0], 1.0, Metric(2))


@pytest.fixture
def car_env() -> Environment:
    return Environment([-5.0, -5.0], [5.0, 5.0], [], [0.0, 0.0, 0.0], 1.0, Metric(3, angular=True))


@pytest.fixture
def point_mass(empty_env):
    return make_model('point_mass', empty_env.metric)


def make_graph(env: Environment, model_name: str = 'point_mass', P: int = 0,
               B: float = 6.0, coefficient: float = 5.0) -> SampleGraph:
    model = make_model(model_name, env.metric)
    schedule = ResolutionSchedule(B=B, n=env.n, eps_coefficient=coefficient, lipschitz=model.lipschitz, M=model.M)
    return SampleGraph(env, model, schedule, P=P)


def grow(graph: SampleGraph, count: int, seed: int = 0) -> SampleGraph:
    """Bulk-load 21 vertices, then insert `count` more one at a time."""
    rng = np.random.default_rng(seed)
    d0 = graph.schedule.at(21).d
    states = [graph.sample_free(rng, r=d0) for _ in range(20)] + [graph.sample_goal(rng)]
    graph.bulk_load(np.array(states))
    for _ in range(count):
        graph.add_sample(graph.sample_free(rng))
    return graph


@pytest.fixture
def tiny_config(tmp_path) -> Config:
    return Config(data=point_mass_data(tmp_path))


class StubGraph:
    """Hand-wired neighbor sets with fixed resolutions, for exact value checks."""

    def __init__(self, neighbors: List[List[int]], goal: List[int], delta: float = 0.1,
                 values: Optional[List[float]] = None, P: int = 0):
        self.size = len(neighbors)
        self.P = P
        self._adjacency = Adjacency.from_lists([np.asarray(row, dtype=np.intp) for row in neighbors])
        self._goal = np.zeros(self.size, dtype=bool)
        self._goal[goal] = True
        self.theta = np.ones(self.size) if values is None else np.asarray(values, dtype=float)
        self.theta[self._goal] = 0.0
        self.staleness = np.full(self.size, P, dtype=np.int64)
        self.res = Resolutions(d=0.1, eps=0.2, rho=0.2, delta=delta, beta=1.0 - delta)

    def current_resolutions(self) -> Resolutions:
        return self.res

    def goal_mask(self, res=None) -> np.ndarray:
        return self._goal.copy()

    def free_mask(self, res=None) -> np.ndarray:
        return np.ones(self.size, dtype=bool)

    def adjacency(self) -> Adjacency:
        return self._adjacency


@pytest.fixture
def chain_graph() -> StubGraph:
    """g <- v1 <- v2 <- v3: each vertex's only neighbor is the previous one."""
    return StubGraph([[0], [0], [1], [2]], goal=[0])
