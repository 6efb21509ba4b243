"""
Scenario Service - Built-in Helmholtz scenarios and experiment configuration parsing.
Config files are flat KEY=VALUE documents read with python-dotenv.
"""
import math
from pathlib import Path

from dotenv import dotenv_values

from config import HarnessConfig, SamplerConfig, SpectralConfig
from datamanager import FileDataManager
from datamanager.data_models import (
    AnsatzKind, HelmholtzProblem, ScenarioConfig, TrigPolynomial
)
from exceptions import ScenarioNotFoundError, ValidationError

SAMPLERS = ('sa', 'brute')

_BUILTIN = (
    HelmholtzProblem(tau=1.0, alpha=0.5, beta=0.0, name='exp1'),
    HelmholtzProblem(tau=1.0, alpha=0.0, beta=0.0,
                     driving=TrigPolynomial(((2, 1.5, 0.0),)), name='exp2'),
    HelmholtzProblem(tau=2.0, alpha=0.5, beta=1.0,
                     driving=TrigPolynomial(((4, -6.0, 0.0),)), name='exp3'),
    HelmholtzProblem(tau=1.0, alpha=-0.25, beta=0.0,
                     driving=TrigPolynomial(((2, 0.0, -0.75), (3, 2.0, 2.0), (4, -3.75, 0.0))),
                     name='exp4'),
    HelmholtzProblem(tau=1.0, alpha=math.sqrt(2.0) / 2.0, beta=0.0, name='exp5'),
)

_DESCRIPTIONS = {
    'exp1': 'Homogeneous equation, u(0)=1/2',
    'exp2': 'Monochromatic driving 3/2 cos 2x',
    'exp3': 'Higher-frequency driving -6 cos 4x with tau=2',
    'exp4': 'Polychromatic driving',
    'exp5': 'Irrational boundary value sqrt(2)/2',
}

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


class ScenarioService:
    """Service class for scenarios and experiment configurations"""

    def __init__(self):
        self.data_manager = FileDataManager()

    # ==================== REGISTRY ====================

    def builtin_scenarios(self):
        """
        The five built-in problems.

        :return: List of HelmholtzProblem
        """
        return list(_BUILTIN)

    def get_scenario(self, scenario_id):
        """
        Look up a built-in problem.

        :param scenario_id: Scenario id such as 'exp2'
        :return: HelmholtzProblem
        """
        for problem in _BUILTIN:
            if problem.name == str(scenario_id).strip().lower():
                return problem
        raise ScenarioNotFoundError(scenario_id)

    def describe(self, problem):
        """
        Short human description of a scenario.

        :param problem: HelmholtzProblem
        :return: String
        """
        return _DESCRIPTIONS.get(problem.name, 'Custom problem')

    # ==================== CONFIGURATION ====================

    def load_config(self, path):
        """
        Read a KEY=VALUE configuration file.

        :param path: Config file path
        :return: ScenarioConfig
        """
        if not Path(path).is_file():
            raise ValidationError('config', f"Config file {path} does not exist")
        values = dotenv_values(path)
        return self.build_config(values, base_dir=Path(path).parent)

    def build_config(self, values, base_dir=None):
        """
        Validate and convert raw configuration values.

        :param values: Mapping of documented keys to raw values
        :param base_dir: Directory that relative aa_params paths refer to
        :return: ScenarioConfig
        """
        values = {str(key).strip().lower(): value for key, value in values.items()
                  if value is not None and value != ''}
        unknown = sorted(set(values) - HarnessConfig.CONFIG_KEYS)
        if unknown:
            raise ValidationError('config', f"Unknown keys: {', '.join(unknown)}")

        scenario = str(values.get('scenario', 'custom' if 'tau' in values else '')).strip().lower()
        if not scenario:
            raise ValidationError('scenario', "A scenario id (or tau/alpha/beta for a custom problem) is required")
        problem = self._resolve_problem(scenario, values)

        ansatz = AnsatzKind.parse(values.get('ansatz', 'tfa'))
        N = self._int(values, 'n', None)
        if N is None:
            raise ValidationError('n', "Basis size N is required")
        if N < 2 or N % 2:
            raise ValidationError('n', f"Basis size must be even and >= 2, got {N}")
        n_spin = self._int(values, 'n_spin', 2)
        if n_spin < 2:
            raise ValidationError('n_spin', f"Bit depth must be at least 2, got {n_spin}")

        sampler = str(values.get('sampler', 'sa')).strip().lower()
        if sampler not in SAMPLERS:
            raise ValidationError('sampler', f"Unknown sampler '{sampler}' (expected sa or brute)")

        aa_params, aa_row_norm = None, 1.0
        if 'aa_params' in values:
            aa_params, aa_row_norm = self._resolve_aa_params(values['aa_params'], base_dir)
        if ansatz == AnsatzKind.AA and aa_params is None:
            raise ValidationError('aa_params', "The adiabatic ansatz needs aa_params")

        runs = self._int(values, 'runs', SamplerConfig.DEFAULT_RUNS)
        if runs < 1:
            raise ValidationError('runs', "Number of runs must be positive")
        mse_points = self._int(values, 'mse_points', HarnessConfig.MSE_POINTS)
        if mse_points < 2:
            raise ValidationError('mse_points', "Need at least 2 MSE points")

        return ScenarioConfig(
            scenario=scenario,
            ansatz=ansatz,
            N=N,
            n_spin=n_spin,
            sampler=sampler,
            runs=runs,
            seed=self._int(values, 'seed', SamplerConfig.DEFAULT_SEED),
            sweeps=self._int(values, 'sweeps', None),
            beta_start=self._float(values, 'beta_start', None),
            beta_end=self._float(values, 'beta_end', None),
            gap=self._bool(values, 'gap', True),
            gap_grid=self._int(values, 'gap_grid', SpectralConfig.GRID_POINTS),
            gap_refine=self._bool(values, 'gap_refine', True),
            mse_points=mse_points,
            aa_params=aa_params,
            aa_row_norm=aa_row_norm,
            problem=problem
        )

    def _resolve_problem(self, scenario, values):
        """
        Built-in problem, or a custom one from tau/alpha/beta/driving.

        :param scenario: Scenario id
        :param values: Raw values
        :return: HelmholtzProblem
        """
        custom_keys = {'tau', 'alpha', 'beta', 'driving'} & set(values)
        if scenario != 'custom':
            if custom_keys:
                raise ValidationError('config', f"Keys {', '.join(sorted(custom_keys))} only apply to scenario=custom")
            return self.get_scenario(scenario)

        for key in ('tau', 'alpha', 'beta'):
            if key not in values:
                raise ValidationError(key, "Required for a custom scenario")
        driving = values.get('driving', '')
        if not isinstance(driving, TrigPolynomial):
            driving = TrigPolynomial.parse(str(driving))
        return HelmholtzProblem(tau=self._float(values, 'tau', None),
                                alpha=self._float(values, 'alpha', None),
                                beta=self._float(values, 'beta', None),
                                driving=driving, name='custom')

    def _resolve_aa_params(self, value, base_dir):
        """
        AA parameters given inline (list) or as a JSON file path.

        :param value: List of numbers or path string
        :param base_dir: Directory for relative paths
        :return: Tuple (params, row_norm)
        """
        if isinstance(value, (list, tuple)):
            try:
                return tuple(float(v) for v in value), 1.0
            except (TypeError, ValueError):
                raise ValidationError('aa_params', "Parameters must be numbers")
        path = Path(str(value))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        document = self.data_manager.load_aa_params(path)
        return document['params'], document['row_norm']

    def _int(self, values, key, default):
        if key not in values:
            return default
        value = values[key]
        try:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(str(value).strip()) if not isinstance(value, (int, float)) else int(value)
        except (ValueError, OverflowError):
            raise ValidationError(key, f"Expected an integer, got '{value}'")

    def _float(self, values, key, default):
        if key not in values:
            return default
        try:
            return float(values[key])
        except (TypeError, ValueError):
            raise ValidationError(key, f"Expected a number, got '{values[key]}'")

    def _bool(self, values, key, default):
        if key not in values:
            return default
        value = values[key]
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ValidationError(key, f"Expected true or false, got '{value}'")
