"""
Base classes for application use cases.
Provides the common result type and execution template for pipeline stages.
"""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Generic, Optional, TypeVar

from src.domain.exceptions import DomainException, InvalidInputError, NumericalFailureError
from src.infrastructure.logging.config import (
    get_logger,
    log_operation_error,
    log_operation_start,
    log_operation_success,
)

# Input and output types of use cases
TRequest = TypeVar('TRequest')
TResponse = TypeVar('TResponse')


@dataclass
class UseCaseResult(Generic[TResponse]):
    """
    Result of a use case run with metadata.
    A failed result carries the domain exception that stopped the run.
    """
    data: Optional[TResponse]
    success: bool = True
    message: Optional[str] = None
    metadata: Optional[Dict[str, Any]] = None
    error: Optional[DomainException] = None

    @classmethod
    def success_result(
        cls,
        data: TResponse,
        message: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None
    ) -> 'UseCaseResult[TResponse]':
        """Build a successful result."""
        return cls(data=data, success=True, message=message, metadata=metadata)

    @classmethod
    def failure_result(
        cls,
        error: DomainException,
        message: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None
    ) -> 'UseCaseResult[TResponse]':
        """Build a failed result around ``error``."""
        return cls(
            data=None,
            success=False,
            message=message or error.message,
            metadata=metadata,
            error=error,
        )


class SyncBaseUseCase(ABC, Generic[TRequest, TResponse]):
    """
    Abstract base class for pipeline use cases.

    ``execute`` runs the template: validation, ``before_execute``, the
    concrete ``_execute``, ``after_execute``. Domain exceptions become failed
    results; anything else goes through ``handle_exception``.

    Generic parameters:
        TRequest: input type of the use case
        TResponse: output type of the use case
    """

    operation: str = "use_case"

    def __init__(self) -> None:
        self._logger = get_logger(type(self).__module__, operation=self.operation)

    def execute(self, request: TRequest) -> UseCaseResult[TResponse]:
        """
        Run the use case.

        Returns:
            UseCaseResult; failures are returned, never raised
        """
        started = time.perf_counter()
        try:
            validation_error = self.validate_request(request)
            if validation_error:
                return UseCaseResult.failure_result(InvalidInputError(validation_error))

            self.before_execute(request)
            result = self._execute(request)
            self.after_execute(request, result, time.perf_counter() - started)
            return result

        except DomainException as error:
            log_operation_error(self._logger, self.operation, error)
            result = UseCaseResult.failure_result(error)
            self.after_execute(request, result, time.perf_counter() - started)
            return result

        except Exception as error:
            return self.handle_exception(request, error)

    @abstractmethod
    def _execute(self, request: TRequest) -> UseCaseResult[TResponse]:
        """Concrete use case logic; may raise domain exceptions."""

    def validate_request(self, request: TRequest) -> Optional[str]:
        """
        Validate the input.

        Returns:
            None when the input is valid, otherwise an error message
        """
        return None

    def before_execute(self, request: TRequest) -> None:
        """Hook run before the use case logic."""
        log_operation_start(self._logger, self.operation)

    def after_execute(self, request: TRequest, result: UseCaseResult[TResponse], elapsed: float = 0.0) -> None:
        """Hook run after the use case logic, on success and on domain failure."""
        if result.success:
            log_operation_success(
                self._logger, self.operation, elapsed_seconds=round(elapsed, 6), **(result.metadata or {})
            )

    def handle_exception(self, request: TRequest, exception: Exception) -> UseCaseResult[TResponse]:
        """Wrap an unexpected exception into a failed result."""
        log_operation_error(self._logger, self.operation, exception)
        error = NumericalFailureError(self.operation, exception)
        return UseCaseResult.failure_result(error, metadata={"exception_type": type(exception).__name__})
