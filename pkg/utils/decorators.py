"""
Reusable decorators for the experiment pipeline and the command-line surface.
"""
import logging
import time
from functools import wraps

import click

from exceptions import HelmholtzQuboError, PipelineError

logger = logging.getLogger(__name__)


def pipeline_stage(stage):
    """
    Decorator that names a pipeline stage, times it and tags its failures.

    The wrapped method receives a run context as its first argument after
    self; the elapsed time is stored in run.timing[stage]. Any exception is
    re-raised as PipelineError naming the stage.

    :param stage: Stage name used in timing and error messages
    :return: Decorator
    """
    def decorator(f):
        @wraps(f)
        def decorated_function(self, run, *args, **kwargs):
            started = time.perf_counter()
            try:
                return f(self, run, *args, **kwargs)
            except PipelineError:
                raise
            except Exception as e:
                logger.debug("Stage %s failed: %s", stage, e)
                raise PipelineError(stage, e) from e
            finally:
                run.timing[stage] = time.perf_counter() - started

        return decorated_function
    return decorator


def handle_cli_errors(f):
    """
    Decorator that turns toolkit errors into a message and an exit code.

    Precondition errors exit with 2 and numerical failures with 3.

    :param f: Click command callback
    :return: Wrapped callback
    """
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except HelmholtzQuboError as e:
            click.echo(f"❌ {e.message}", err=True)
            raise SystemExit(e.exit_code)

    return decorated_function
