"""
Exception handling for the command-line driver.
Maps domain errors to process exit codes and writes machine-readable error files.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from src.domain.exceptions import DomainException, ErrorCode

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_REGISTRATION_FAILURE = 2
EXIT_GRAPH_FAILURE = 3
# register only: the report is written but ICP hit the iteration cap
EXIT_NOT_CONVERGED = 4

ERROR_FILE_NAME = "error.json"

EXIT_CODES: Dict[ErrorCode, int] = {
    ErrorCode.PARSE_ERROR: EXIT_INPUT_ERROR,
    ErrorCode.UNSUPPORTED_FORMAT: EXIT_INPUT_ERROR,
    ErrorCode.RASTER_IO_ERROR: EXIT_INPUT_ERROR,
    ErrorCode.INVALID_CONFIGURATION: EXIT_INPUT_ERROR,
    ErrorCode.INVALID_INPUT: EXIT_INPUT_ERROR,
    ErrorCode.SINGULAR_TRANSFORM: EXIT_INPUT_ERROR,
    ErrorCode.OUT_OF_BOUNDS: EXIT_INPUT_ERROR,

    ErrorCode.NO_OVERLAP: EXIT_REGISTRATION_FAILURE,
    ErrorCode.ALL_NODATA: EXIT_REGISTRATION_FAILURE,
    ErrorCode.NO_VALID_PIXELS: EXIT_REGISTRATION_FAILURE,
    ErrorCode.DEGENERATE_GEOMETRY: EXIT_REGISTRATION_FAILURE,
    ErrorCode.TOO_FEW_CORRESPONDENCES: EXIT_REGISTRATION_FAILURE,
    ErrorCode.DEGENERATE_MATRIX: EXIT_REGISTRATION_FAILURE,
    ErrorCode.EMPTY_RESULT: EXIT_REGISTRATION_FAILURE,
    ErrorCode.NO_INLIERS: EXIT_REGISTRATION_FAILURE,
    ErrorCode.NO_OVERLAPPING_PAIRS: EXIT_REGISTRATION_FAILURE,

    ErrorCode.DISCONNECTED_GRAPH: EXIT_GRAPH_FAILURE,
    ErrorCode.NOT_ENOUGH_DSMS: EXIT_GRAPH_FAILURE,
    ErrorCode.NUMERICAL_FAILURE: EXIT_GRAPH_FAILURE,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, DomainException):
        return EXIT_CODES.get(exc.error_code, EXIT_INPUT_ERROR)
    return EXIT_INPUT_ERROR


def error_payload(exc: BaseException) -> Dict[str, Any]:
    if isinstance(exc, DomainException):
        return exc.to_dict()
    return {
        "error": {
            "code": "UNEXPECTED_ERROR",
            "message": str(exc),
            "context": {"exception_type": type(exc).__name__},
        }
    }


def write_error_file(exc: BaseException, out_dir: Optional[Path]) -> Optional[Path]:
    """Write ``error.json`` into ``out_dir``; None when it cannot be written."""
    if out_dir is None:
        return None
    path = Path(out_dir) / ERROR_FILE_NAME
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(error_payload(exc), indent=2, default=str), encoding="utf-8")
    except OSError:
        logger.warning("Could not write error file %s", path, exc_info=True)
        return None
    return path


def handle_cli_exception(exc: BaseException, out_dir: Optional[Path]) -> int:
    """
    Report ``exc`` and return the process exit code.

    Domain errors are expected outcomes and logged as warnings; anything else
    is logged with its traceback.
    """
    code = exit_code_for(exc)
    if isinstance(exc, DomainException):
        logger.warning(
            "Command failed: %s", exc,
            extra={"operation": "cli", "error_code": exc.error_code.value},
        )
    else:
        logger.error("Unexpected error: %s", exc, exc_info=True, extra={"operation": "cli"})
    write_error_file(exc, out_dir)
    print(f"error: {exc}", file=sys.stderr)
    return code
