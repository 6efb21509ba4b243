from .app_helpers import (
    print_startup_info, register_error_handlers, startup_lines
)
from .decorators import handle_cli_errors, pipeline_stage
from .formatting import format_cell, format_exact, format_metric
from .validation import as_integer

__all__ = [
    'print_startup_info', 'register_error_handlers', 'startup_lines',
    'handle_cli_errors', 'pipeline_stage',
    'format_cell', 'format_exact', 'format_metric',
    'as_integer'
]
