"""
Application Helper Functions.
Provides utility functions for Flask application setup and error handling.
"""
from flask import jsonify

from config import AppConfig
from exceptions import HelmholtzQuboError


def register_error_handlers(app):
    """
    Register JSON error handlers for toolkit errors and common HTTP errors.

    :param app: Flask application instance
    """
    error_configs = {
        400: "Bad request - invalid input provided",
        404: "Resource not found",
        405: "Method not allowed for this endpoint",
        500: "Internal server error - something went wrong"
    }

    for error_code, message in error_configs.items():
        _register_single_error_handler(app, error_code, message)

    @app.errorhandler(HelmholtzQuboError)
    def toolkit_error_handler(error):
        return jsonify({'error': error.message, 'success': False}), error.status_code


def _register_single_error_handler(app, error_code, error_message):
    """
    Register a single error handler for the given error code.

    :param app: Flask application instance
    :param error_code: HTTP error code
    :param error_message: Error message to return
    """
    @app.errorhandler(error_code)
    def error_handler(error):
        return jsonify({'error': error_message, 'success': False}), error_code

    # Set function name to avoid conflicts
    error_handler.__name__ = f'error_handler_{error_code}'


def startup_lines(host=AppConfig.HOST, port=AppConfig.PORT):
    """
    Startup banner lines.

    :param host: Bound host
    :param port: Bound port
    :return: List of strings
    """
    return [
        "🚀 Starting Helmholtz QUBO toolkit API...",
        f"📡 Server running on: http://{host}:{port}",
        "🔧 API endpoints available at /api/",
        "📐 Scenarios: /api/scenarios",
        "🧮 Experiments: POST /api/experiments, QUBOs: POST /api/qubo"
    ]


def print_startup_info(host=AppConfig.HOST, port=AppConfig.PORT):
    """
    Print startup information and available endpoints.

    :return: None
    """
    for line in startup_lines(host, port):
        print(line)
