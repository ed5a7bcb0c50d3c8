#!/usr/bin/env python3
"""
Configuration Management
Load scenario configuration from YAML presets/files and environment variables.
"""
import os
import json
import math
import yaml
from pathlib import Path
from typing import Dict, Any, List, Optional
from dataclasses import dataclass, field, asdict

from dotenv import load_dotenv

from .errors import ConfigError

REPO_ROOT = Path(__file__).resolve().parents[2]
PRESET_DIR = REPO_ROOT / 'config' / 'presets'

MODEL_NAMES = ('point_mass', 'simple_car', 'dubins_car')


@dataclass
class ScenarioConfig:
    """Robot model and scene geometry."""
    name: str
    model: str
    workspace_lo: List[float]
    workspace_hi: List[float]
    goal_center: List[float]
    goal_radius: float
    obstacles: List[Dict[str, Any]] = field(default_factory=list)
    angle_scale: float = 10.0


@dataclass
class ScheduleConfig:
    """Resolution schedule (d_k, eps_k, rho_k) parameters."""
    B: Optional[float] = None
    B_factor: float = 1.1
    # accept an explicit B at or below the dispersion lower bound (warning only)
    allow_small_B: bool = False
    epsilon_coefficient: float = 5.0
    epsilon_exponent: float = 2.0 / 3.0
    rho_rule: str = '2d'
    lipschitz: Optional[float] = None
    M: Optional[float] = None


@dataclass
class VIConfig:
    """Asynchronous value iteration settings."""
    P: int = 50
    m_schedule: str = 'constant'
    m0: int = 500
    m_slope: float = 0.0
    K: int = 2000
    time_budget: Optional[float] = None

    def m_at(self, k: int) -> int:
        """Recursion allowance m_k for iteration k."""
        if self.m_schedule == 'linear':
            return max(1, int(self.m0 + math.floor(self.m_slope * k)))
        return max(1, int(self.m0))


@dataclass
class SamplingConfig:
    """Seed and initial vertex set settings."""
    seed: int = 0
    initial_samples: int = 20
    forced_goal_samples: int = 1
    max_rejections: int = 1_000_000
    max_samples: Optional[int] = None


@dataclass
class CheckpointConfig:
    """When value dumps (and RMSE rows) are taken."""
    every: int = 250
    at_samples: List[int] = field(default_factory=list)
    wall_marks: List[float] = field(default_factory=list)
    slice_degrees: float = 10.0


@dataclass
class RolloutConfig:
    """Closed-loop rollout settings."""
    starts: List[List[float]] = field(default_factory=list)
    max_time: float = 60.0
    substeps: int = 10
    goal_tiebreak: bool = False
    disc_boundary: int = 16
    box_grid: int = 5
    interval_count: int = 9


@dataclass
class EvaluationConfig:
    """Oracle and multigrid baseline settings."""
    oracle: str = 'none'
    oracle_h: float = 0.02
    connectivity: int = 8
    speed: float = 1.0
    multigrid_resolutions: List[float] = field(default_factory=lambda: [0.8, 0.4, 0.2, 0.1])
    multigrid_tol: float = 1e-9
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    methods: List[str] = field(default_factory=lambda: ['ipolicy', 'multigrid'])


@dataclass
class OutputConfig:
    """Artifact output settings."""
    out_dir: str = 'results'
    record_timing: bool = True


def resolve_config_path(name_or_path: str) -> Path:
    """
    Resolve a preset name or a file path to a YAML file.

    Args:
        name_or_path: Preset name (e.g. 'pointmass_cluttered') or path to a YAML file

    Returns:
        Path to the config file

    Raises:
        ConfigError: If neither a file nor a preset of that name exists
    """
    path = Path(name_or_path)
    if path.is_file():
        return path

    preset = PRESET_DIR / f"{name_or_path}.yaml"
    if preset.is_file():
        return preset

    raise ConfigError(f"Config not found: '{name_or_path}' (no such file or preset)")


def list_presets() -> List[str]:
    """Names of the bundled preset scenarios."""
    return sorted(p.stem for p in PRESET_DIR.glob('*.yaml'))


class Config:
    """Main configuration manager."""

    def __init__(self, config_file: Optional[str] = None, data: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Preset name or path to YAML config file (optional)
            data: Already-parsed config dict, used instead of a file (optional)
        """
        load_dotenv()
        self.config_data: Dict[str, Any] = {}

        if data is not None:
            self.config_data = data
        elif config_file:
            path = resolve_config_path(config_file)
            with open(path, 'r') as f:
                self.config_data = yaml.safe_load(f) or {}

        try:
            self.scenario = self._load_scenario_config()
            self.schedule = self._load_schedule_config()
            self.value_iteration = self._load_vi_config()
            self.sampling = self._load_sampling_config()
            self.checkpoints = self._load_checkpoint_config()
            self.rollout = self._load_rollout_config()
            self.evaluation = self._load_evaluation_config()
            self.output = self._load_output_config()
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Malformed config: {e}") from e

    def _load_scenario_config(self) -> ScenarioConfig:
        """Load model and geometry."""
        sc = self.config_data.get('scenario', {})

        model = sc.get('model')
        if model not in MODEL_NAMES:
            raise ConfigError(f"scenario.model must be one of {', '.join(MODEL_NAMES)}, got {model!r}")

        workspace = sc.get('workspace', {})
        goal = sc.get('goal', {})
        if 'center' not in goal:
            raise ConfigError("scenario.goal.center not configured")

        return ScenarioConfig(
            name=sc.get('name', 'scenario'),
            model=model,
            workspace_lo=[float(v) for v in workspace.get('lo', [-10.0, -10.0])],
            workspace_hi=[float(v) for v in workspace.get('hi', [10.0, 10.0])],
            goal_center=[float(v) for v in goal['center']],
            goal_radius=float(goal.get('radius', 1.0)),
            obstacles=list(sc.get('obstacles', []) or []),
            angle_scale=float(sc.get('angle_scale', 10.0))
        )

    def _load_schedule_config(self) -> ScheduleConfig:
        """Load resolution schedule."""
        sched = self.config_data.get('schedule', {})
        eps_rule = sched.get('epsilon_rule', {})

        return ScheduleConfig(
            B=sched.get('B'),
            B_factor=float(sched.get('B_factor', 1.1)),
            allow_small_B=bool(sched.get('allow_small_B', False)),
            epsilon_coefficient=float(eps_rule.get('coefficient', 5.0)),
            epsilon_exponent=float(eps_rule.get('exponent', 2.0 / 3.0)),
            rho_rule=sched.get('rho_rule', '2d'),
            lipschitz=sched.get('lipschitz'),
            M=sched.get('M')
        )

    def _load_vi_config(self) -> VIConfig:
        """Load value iteration settings."""
        vi = self.config_data.get('value_iteration', {})
        m_sched = vi.get('m_schedule', {})

        # IPOLICY_TIME_BUDGET takes precedence
        time_budget = os.getenv('IPOLICY_TIME_BUDGET') or vi.get('time_budget')

        return VIConfig(
            P=int(vi.get('P', 50)),
            m_schedule=m_sched.get('kind', 'constant'),
            m0=int(m_sched.get('m0', 500)),
            m_slope=float(m_sched.get('slope', 0.0)),
            K=int(vi.get('K', 2000)),
            time_budget=float(time_budget) if time_budget is not None else None
        )

    def _load_sampling_config(self) -> SamplingConfig:
        """Load sampling settings."""
        samp = self.config_data.get('sampling', {})

        seed = os.getenv('IPOLICY_SEED') or samp.get('seed', 0)
        max_samples = samp.get('max_samples')

        return SamplingConfig(
            seed=int(seed),
            initial_samples=int(samp.get('initial_samples', 20)),
            forced_goal_samples=int(samp.get('forced_goal_samples', 1)),
            max_rejections=int(samp.get('max_rejections', 1_000_000)),
            max_samples=int(max_samples) if max_samples is not None else None
        )

    def _load_checkpoint_config(self) -> CheckpointConfig:
        """Load checkpoint policy."""
        cp = self.config_data.get('checkpoints', {})

        return CheckpointConfig(
            every=int(cp.get('every', 250)),
            at_samples=[int(v) for v in cp.get('at_samples', [])],
            wall_marks=[float(v) for v in cp.get('wall_marks', [])],
            slice_degrees=float(cp.get('slice_degrees', 10.0))
        )

    def _load_rollout_config(self) -> RolloutConfig:
        """Load rollout settings."""
        ro = self.config_data.get('rollout', {})
        disc = ro.get('discretization', {})

        return RolloutConfig(
            starts=[[float(v) for v in s] for s in ro.get('starts', [])],
            max_time=float(ro.get('max_time', 60.0)),
            substeps=int(ro.get('substeps', 10)),
            goal_tiebreak=bool(ro.get('goal_tiebreak', False)),
            disc_boundary=int(disc.get('disc_boundary', 16)),
            box_grid=int(disc.get('box_grid', 5)),
            interval_count=int(disc.get('interval_count', 9))
        )

    def _load_evaluation_config(self) -> EvaluationConfig:
        """Load oracle and baseline settings."""
        ev = self.config_data.get('evaluation', {})
        defaults = EvaluationConfig()

        return EvaluationConfig(
            oracle=ev.get('oracle', 'none'),
            oracle_h=float(ev.get('oracle_h', 0.02)),
            connectivity=int(ev.get('connectivity', 8)),
            speed=float(ev.get('speed', 1.0)),
            multigrid_resolutions=[float(v) for v in ev.get('multigrid_resolutions', defaults.multigrid_resolutions)],
            multigrid_tol=float(ev.get('multigrid_tol', 1e-9)),
            seeds=[int(v) for v in ev.get('seeds', defaults.seeds)],
            methods=list(ev.get('methods', defaults.methods))
        )

    def _load_output_config(self) -> OutputConfig:
        """Load output settings."""
        out = self.config_data.get('output', {})

        # IPOLICY_OUT_DIR takes precedence
        out_dir = os.getenv('IPOLICY_OUT_DIR') or out.get('out_dir', 'results')

        return OutputConfig(
            out_dir=out_dir,
            record_timing=bool(out.get('record_timing', True))
        )

    def apply_overrides(
        self,
        seed: Optional[int] = None,
        out_dir: Optional[str] = None,
        time_budget: Optional[float] = None,
        max_samples: Optional[int] = None
    ):
        """
        Apply command-line overrides (highest precedence).

        Args:
            seed: Sampling seed
            out_dir: Artifact root directory
            time_budget: Wall-clock budget in seconds
            max_samples: Cap on |V|
        """
        if seed is not None:
            self.sampling.seed = int(seed)
        if out_dir is not None:
            self.output.out_dir = out_dir
        if time_budget is not None:
            self.value_iteration.time_budget = float(time_budget)
        if max_samples is not None:
            self.sampling.max_samples = int(max_samples)

    def resolved(self) -> Dict[str, Any]:
        """Fully defaulted configuration, as embedded in every artifact directory."""
        return {
            'scenario': asdict(self.scenario),
            'schedule': asdict(self.schedule),
            'value_iteration': asdict(self.value_iteration),
            'sampling': asdict(self.sampling),
            'checkpoints': asdict(self.checkpoints),
            'rollout': asdict(self.rollout),
            'evaluation': asdict(self.evaluation),
            'output': asdict(self.output)
        }

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get resolved configuration value by dot-notation key.

        Args:
            key: Dot-notation key (e.g., 'value_iteration.P')
            default: Default value if key not found

        Returns:
            Configuration value
        """
        keys = key.split('.')
        value: Any = self.resolved()

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default

        return value if value is not None else default

    @staticmethod
    def load_from_file(config_file: str) -> 'Config':
        """
        Load configuration from a preset name or YAML file.

        Args:
            config_file: Preset name or path to YAML config file

        Returns:
            Config instance
        """
        return Config(config_file=config_file)


def save_results(results: Dict[str, Any], output_file: str):
    """
    Save run results to JSON file.

    Args:
        results: Results dictionary
        output_file: Output file path
    """
    output_path = Path(output_file)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    with open(output_file, 'w', newline='\n') as f:
        json.dump(results, f, indent=2, sort_keys=True)
        f.write('\n')
