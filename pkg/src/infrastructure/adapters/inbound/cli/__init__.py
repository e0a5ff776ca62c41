"""
Command-line inbound adapter.
Parses pipeline verbs and maps domain errors to exit codes.
"""

from .app import build_parser, run
from .exception_handlers import EXIT_CODES, exit_code_for, handle_cli_exception

__all__ = [
    'EXIT_CODES',
    'build_parser',
    'exit_code_for',
    'handle_cli_exception',
    'run',
]
