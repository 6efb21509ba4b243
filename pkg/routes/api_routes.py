"""
API Routes - JSON endpoints for the Helmholtz QUBO toolkit.
Exposes the scenario registry, single experiment runs and QUBO encodings.
"""
from functools import wraps

from flask import Blueprint, jsonify, request

from exceptions import HelmholtzQuboError, ValidationError
from services.encoder_service import EncoderService
from services.experiment_service import ExperimentService
from services.problem_service import ProblemService
from services.scenario_service import ScenarioService
from services.ansatz_service import AnsatzService
from datamanager import FileDataManager

api_bp = Blueprint('api', __name__, url_prefix='/api')

ansatz_service = AnsatzService()
encoder_service = EncoderService()
experiment_service = ExperimentService()
problem_service = ProblemService()
scenario_service = ScenarioService()
data_manager = FileDataManager()


def error_response(message, status_code=400):
    """
    Create standardized error response.

    :param message: Error message to return
    :param status_code: HTTP status code
    :return: Flask JSON response tuple
    """
    return jsonify({'error': message, 'success': False}), status_code


def success_response(data=None, message=None):
    """
    Create standardized success response.

    :param data: Data to include in response
    :param message: Success message
    :return: Flask JSON response
    """
    response = {'success': True}
    if data is not None:
        response['data'] = data
    if message:
        response['message'] = message
    return jsonify(response)


def handle_service_exceptions(func):
    """
    Decorator to handle toolkit exceptions in API routes.

    :param func: Function to wrap
    :return: Wrapped function with exception handling
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except HelmholtzQuboError as e:
            return error_response(e.message, e.status_code)

    return wrapper


def get_json_body():
    """
    Request body as a dictionary.

    :return: Dictionary of request values
    """
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ValidationError('body', 'Request body must be a JSON object')
    return data


def scenario_summary(problem):
    """
    Scenario entry with its exact solution.

    :param problem: HelmholtzProblem
    :return: Dictionary
    """
    return {
        'id': problem.name,
        'description': scenario_service.describe(problem),
        'problem': problem.to_dict(),
        'exact_solution': problem_service.exact_solution(problem).to_dict()
    }


# ==================== SCENARIOS ====================

@api_bp.route('/scenarios', methods=['GET'])
@handle_service_exceptions
def list_scenarios():
    """Get all built-in scenarios"""
    scenarios = [scenario_summary(problem)
                 for problem in scenario_service.builtin_scenarios()]
    return success_response(scenarios)


@api_bp.route('/scenarios/<scenario_id>', methods=['GET'])
@handle_service_exceptions
def get_scenario(scenario_id):
    """Get one scenario with its exact solution"""
    problem = scenario_service.get_scenario(scenario_id)
    return success_response(scenario_summary(problem))


# ==================== EXPERIMENTS ====================

@api_bp.route('/experiments', methods=['POST'])
@handle_service_exceptions
def run_experiment():
    """Run one configuration and return its report"""
    config = scenario_service.build_config(get_json_body())
    report = experiment_service.run_scenario(config)
    return success_response(report.to_dict(include_timing=True))


@api_bp.route('/qubo', methods=['POST'])
@handle_service_exceptions
def encode_qubo():
    """Encode a configuration and return its QUBO with diagnostics"""
    body = get_json_body()
    values = {key: body[key] for key in ('scenario', 'ansatz', 'n', 'n_spin', 'aa_params',
                                         'tau', 'alpha', 'beta', 'driving') if key in body}
    config = scenario_service.build_config(values)
    basis = ansatz_service.build_basis(config.ansatz, config.N, params=config.aa_params,
                                       row_norm=config.aa_row_norm)
    system, _, qubo = encoder_service.encode(config.problem, basis, config.n_spin)
    compact = encoder_service.compact_qubo(qubo)
    return success_response({
        'r': qubo.r,
        'C0': qubo.C0,
        'compact': compact.tolist(),
        'rank': encoder_service.matrix_rank(system.a),
        'DR': encoder_service.dynamic_range(compact),
        'text': data_manager.render_qubo(qubo)
    })
