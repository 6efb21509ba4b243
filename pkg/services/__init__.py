from .ansatz_service import AnsatzService
from .encoder_service import EncoderService
from .experiment_service import ExperimentService
from .problem_service import ProblemService
from .sampler_service import SamplerService
from .scenario_service import ScenarioService
from .spectral_service import SpectralService

__all__ = [
    'AnsatzService',
    'EncoderService',
    'ExperimentService',
    'ProblemService',
    'SamplerService',
    'ScenarioService',
    'SpectralService'
]
