"""Logging infrastructure for the DSM registration toolkit."""

from .config import (
    ColoredFormatter,
    LoggingConfig,
    LoggerAdapter,
    StructuredFormatter,
    get_logger,
    log_operation_start,
    log_operation_success,
    log_operation_error,
)

__all__ = [
    'ColoredFormatter',
    'LoggingConfig',
    'LoggerAdapter',
    'StructuredFormatter',
    'get_logger',
    'log_operation_start',
    'log_operation_success',
    'log_operation_error',
]
