from config import AppConfig
from flask import Flask, jsonify
from routes import api_bp
from utils.app_helpers import register_error_handlers, print_startup_info


def create_app():
    """
    Application factory function to create and configure the Flask app.

    :return: Configured Flask application instance
    """
    app = Flask(__name__)

    _configure_app_settings(app)

    _register_blueprints(app)
    register_error_handlers(app)
    _register_routes(app)

    return app


def _configure_app_settings(app):
    """
    Configure general Flask application settings.

    :param app: Flask application instance
    """
    app.json.sort_keys = False


def _register_blueprints(app):
    """
    Register all application blueprints.

    :param app: Flask application instance
    """
    app.register_blueprint(api_bp)


def _register_routes(app):
    """
    Register application routes.

    :param app: Flask application instance
    """
    @app.route('/')
    def index():
        """List the API endpoints"""
        return jsonify({
            'success': True,
            'endpoints': ['GET /api/scenarios', 'GET /api/scenarios/<id>',
                          'POST /api/experiments', 'POST /api/qubo']
        })


def main(host=AppConfig.HOST, port=AppConfig.PORT, debug=AppConfig.DEBUG):
    """
    Main function to run the application.

    :return: None
    """
    app = create_app()

    print_startup_info(host, port)

    app.run(
        host=host,
        port=port,
        debug=debug
    )


if __name__ == "__main__":
    main()
