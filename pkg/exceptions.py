"""
Custom exception classes for the Helmholtz QUBO toolkit.
Each error carries an HTTP status code for the JSON API and an exit code for the CLI.
"""

PRECONDITION_EXIT_CODE = 2
NUMERICAL_EXIT_CODE = 3


class HelmholtzQuboError(Exception):
    """Base exception class for all toolkit errors"""
    def __init__(self, message, status_code=500, exit_code=NUMERICAL_EXIT_CODE):
        super().__init__(message)
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code

class ValidationError(HelmholtzQuboError):
    """Raised when an input violates a precondition"""
    def __init__(self, field, message):
        full_message = f"Validation error for {field}: {message}"
        super().__init__(full_message, status_code=400,
                         exit_code=PRECONDITION_EXIT_CODE)
        self.field = field

class ScenarioNotFoundError(HelmholtzQuboError):
    """Raised when a scenario id is not registered"""
    def __init__(self, scenario_id):
        message = f"Scenario '{scenario_id}' not found"
        super().__init__(message, status_code=404,
                         exit_code=PRECONDITION_EXIT_CODE)
        self.scenario_id = scenario_id

class CapacityError(HelmholtzQuboError):
    """Raised when an instance is too large for an exact method"""
    def __init__(self, what, size, cap, hint=None):
        message = f"{what} needs {size} qubits, above the cap of {cap}"
        if hint:
            message = f"{message}; {hint}"
        super().__init__(message, status_code=422,
                         exit_code=PRECONDITION_EXIT_CODE)
        self.size = size
        self.cap = cap

class ReferenceEnergyError(HelmholtzQuboError):
    """Raised when a success rate is requested without a reference energy"""
    def __init__(self):
        message = ("No reference ground energy available; run brute force "
                   "or pass the analytic ground energy explicitly")
        super().__init__(message, status_code=422,
                         exit_code=PRECONDITION_EXIT_CODE)

class NumericalError(HelmholtzQuboError):
    """Raised when a numerical routine fails"""
    def __init__(self, message):
        super().__init__(message, status_code=500,
                         exit_code=NUMERICAL_EXIT_CODE)

class EigenSolverError(NumericalError):
    """Raised when the iterative eigensolver does not converge"""
    def __init__(self, residual, iterations):
        message = (f"Eigensolver did not converge after {iterations} "
                   f"iterations (residual {residual:.3e})")
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations

class OptimizationError(NumericalError):
    """Raised when the adiabatic ansatz search finds no usable candidate"""
    def __init__(self, budget):
        message = (f"Evaluation budget of {budget} exhausted without a "
                   f"full-rank candidate")
        super().__init__(message)
        self.budget = budget

class ReportWriteError(HelmholtzQuboError):
    """Raised when an output file cannot be written"""
    def __init__(self, path, original_error):
        message = f"Cannot write {path}: {str(original_error)}"
        super().__init__(message, status_code=500,
                         exit_code=NUMERICAL_EXIT_CODE)
        self.path = path
        self.original_error = original_error

class PipelineError(HelmholtzQuboError):
    """Raised when a stage of an experiment run fails"""
    def __init__(self, stage, original_error):
        message = f"Pipeline stage '{stage}' failed: {getattr(original_error, 'message', str(original_error))}"
        status_code = getattr(original_error, 'status_code', 500)
        exit_code = getattr(original_error, 'exit_code', NUMERICAL_EXIT_CODE)
        super().__init__(message, status_code=status_code, exit_code=exit_code)
        self.stage = stage
        self.original_error = original_error
