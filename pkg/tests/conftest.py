import pytest
import os
import sys

from click.testing import CliRunner

# Add project root to path
current_dir = os.path.dirname(os.path.abspath(__file__))
project_dir = os.path.dirname(current_dir)
sys.path.insert(0, project_dir)

from app import create_app
from datamanager import FileDataManager, HelmholtzProblem, QuboProblem, TrigPolynomial
from services.ansatz_service import AnsatzService
from services.encoder_service import EncoderService
from services.experiment_service import ExperimentService
from services.problem_service import ProblemService
from services.sampler_service import SamplerService
from services.scenario_service import ScenarioService
from services.spectral_service import SpectralService


@pytest.fixture
def app():
    """Create and configure a test Flask application"""
    test_app = create_app()
    test_app.config['TESTING'] = True
    yield test_app


@pytest.fixture
def client(app):
    """Test client for the Flask app"""
    return app.test_client()


@pytest.fixture
def runner():
    """Click runner for command-line tests"""
    return CliRunner()


@pytest.fixture
def problem_service():
    """Problem service instance for testing"""
    return ProblemService()


@pytest.fixture
def ansatz_service():
    """Ansatz service instance for testing"""
    return AnsatzService()


@pytest.fixture
def encoder_service():
    """Encoder service instance for testing"""
    return EncoderService()


@pytest.fixture
def sampler_service():
    """Sampler service instance for testing"""
    return SamplerService()


@pytest.fixture
def spectral_service():
    """Spectral service instance for testing"""
    return SpectralService()


@pytest.fixture
def scenario_service():
    """Scenario service instance for testing"""
    return ScenarioService()


@pytest.fixture
def experiment_service():
    """Experiment service instance for testing"""
    return ExperimentService()


@pytest.fixture
def data_manager():
    """File data manager instance for testing"""
    return FileDataManager()


@pytest.fixture
def encode(scenario_service, ansatz_service, encoder_service):
    """Encode a built-in scenario; returns (system, binarized, qubo)"""
    def _encode(scenario_id, kind, N, n_spin):
        problem = scenario_service.get_scenario(scenario_id)
        basis = ansatz_service.build_basis(kind, N)
        return encoder_service.encode(problem, basis, n_spin)
    return _encode


@pytest.fixture
def exp1_qubo(encode):
    """QUBO of exp1 with the truncated Fourier basis, N=2 and n_spin=2"""
    return encode('exp1', 'tfa', 2, 2)[2]


@pytest.fixture
def single_qubit_qubo():
    """One-variable QUBO w - 2w + 1 (Q=[[1]], L=[-2], C0=1)"""
    return QuboProblem(Q=[[1.0]], L=[-2.0], C0=1.0)


@pytest.fixture
def resonant_problem():
    """u'' + u = cos x with zero boundary data"""
    return HelmholtzProblem(tau=1.0, alpha=0.0, beta=0.0,
                            driving=TrigPolynomial(((1, 1.0, 0.0),)))
