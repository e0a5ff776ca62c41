"""Domain-specific exceptions for DSM registration and fusion."""

from typing import Dict, Any, List, Optional, Sequence
from enum import Enum


class ErrorCode(Enum):
    """Enumeration of error codes for consistent error handling."""

    # Raster errors
    SINGULAR_TRANSFORM = "SINGULAR_TRANSFORM"
    OUT_OF_BOUNDS = "OUT_OF_BOUNDS"
    PARSE_ERROR = "PARSE_ERROR"
    UNSUPPORTED_FORMAT = "UNSUPPORTED_FORMAT"
    RASTER_IO_ERROR = "RASTER_IO_ERROR"

    # Search and registration errors
    NO_OVERLAP = "NO_OVERLAP"
    ALL_NODATA = "ALL_NODATA"
    NO_VALID_PIXELS = "NO_VALID_PIXELS"
    DEGENERATE_GEOMETRY = "DEGENERATE_GEOMETRY"
    TOO_FEW_CORRESPONDENCES = "TOO_FEW_CORRESPONDENCES"

    # Graph and solver errors
    DISCONNECTED_GRAPH = "DISCONNECTED_GRAPH"
    NOT_ENOUGH_DSMS = "NOT_ENOUGH_DSMS"
    NUMERICAL_FAILURE = "NUMERICAL_FAILURE"
    DEGENERATE_MATRIX = "DEGENERATE_MATRIX"

    # Fusion and metric errors
    EMPTY_RESULT = "EMPTY_RESULT"
    NO_INLIERS = "NO_INLIERS"
    NO_OVERLAPPING_PAIRS = "NO_OVERLAPPING_PAIRS"

    # Input errors
    INVALID_CONFIGURATION = "INVALID_CONFIGURATION"
    INVALID_INPUT = "INVALID_INPUT"


class DomainException(Exception):
    """Base class for all domain exceptions with structured error information."""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode,
        context: Optional[Dict[str, Any]] = None,
        cause: Optional[Exception] = None
    ):
        self.message = message
        self.error_code = error_code
        self.context = context or {}
        self.cause = cause
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a machine-readable dictionary."""
        result = {
            "error": {
                "code": self.error_code.value,
                "message": self.message,
                "context": self.context
            }
        }

        if self.cause:
            result["error"]["caused_by"] = str(self.cause)

        return result

    def __str__(self) -> str:
        return f"[{self.error_code.value}] {self.message}"


class SingularTransformError(DomainException):
    """Raised when a geotransform cannot be inverted."""

    def __init__(self, determinant: float):
        self.determinant = determinant
        super().__init__(
            message=f"Geotransform is not invertible (determinant={determinant})",
            error_code=ErrorCode.SINGULAR_TRANSFORM,
            context={"determinant": determinant}
        )


class OutOfBoundsError(DomainException):
    """Raised when a requested window is disjoint from the raster extent."""

    def __init__(self, rect: Sequence[int], width: int, height: int):
        self.rect = tuple(int(v) for v in rect)
        super().__init__(
            message=f"Window {self.rect} does not intersect a {width}x{height} raster",
            error_code=ErrorCode.OUT_OF_BOUNDS,
            context={"rect": list(self.rect), "width": width, "height": height}
        )


class ParseError(DomainException):
    """Raised when a raster or pipeline file cannot be parsed."""

    def __init__(
        self,
        path: str,
        reason: str,
        line: Optional[int] = None,
        byte_offset: Optional[int] = None
    ):
        self.path = path
        self.line = line
        self.byte_offset = byte_offset

        location = ""
        if line is not None:
            location = f" at line {line}"
        elif byte_offset is not None:
            location = f" at byte {byte_offset}"

        context: Dict[str, Any] = {"path": path, "reason": reason}
        if line is not None:
            context["line"] = line
        if byte_offset is not None:
            context["byte_offset"] = byte_offset

        super().__init__(
            message=f"Failed to parse '{path}'{location}: {reason}",
            error_code=ErrorCode.PARSE_ERROR,
            context=context
        )


class UnsupportedFormatError(DomainException):
    """Raised for raster formats without an adapter."""

    def __init__(self, fmt: str, supported: Sequence[str]):
        self.fmt = fmt
        super().__init__(
            message=f"Unsupported raster format '{fmt}'",
            error_code=ErrorCode.UNSUPPORTED_FORMAT,
            context={"format": fmt, "supported": list(supported)}
        )


class RasterIOError(DomainException):
    """Raised when a raster file cannot be read or written."""

    def __init__(self, path: str, operation: str, cause: Optional[Exception] = None):
        self.path = path
        super().__init__(
            message=f"Raster {operation} failed for '{path}'",
            error_code=ErrorCode.RASTER_IO_ERROR,
            context={"path": path, "operation": operation},
            cause=cause
        )


class NoOverlapError(DomainException):
    """Raised when two rasters (or a query and a raster) do not overlap."""

    def __init__(self, message: str = "Inputs do not overlap", context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code=ErrorCode.NO_OVERLAP,
            context=context
        )


class AllNodataError(DomainException):
    """Raised when a search region contains no valid pixel."""

    def __init__(self, message: str = "Search region contains only nodata", context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code=ErrorCode.ALL_NODATA,
            context=context
        )


class NoValidPixelsError(DomainException):
    """Raised when a raster has no valid pixel at all."""

    def __init__(self, grid_id: Optional[int] = None):
        super().__init__(
            message=f"Raster {grid_id} has no valid pixels",
            error_code=ErrorCode.NO_VALID_PIXELS,
            context={"grid_id": grid_id}
        )


class DegenerateGeometryError(DomainException):
    """Raised when correspondences cannot determine a rigid transform."""

    def __init__(self, reason: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Degenerate correspondence geometry: {reason}",
            error_code=ErrorCode.DEGENERATE_GEOMETRY,
            context=context
        )


class TooFewCorrespondencesError(DomainException):
    """Raised when ICP keeps fewer than three correspondences."""

    def __init__(self, count: int, iteration: int):
        self.count = count
        self.iteration = iteration
        super().__init__(
            message=f"Only {count} correspondences survived at iteration {iteration}",
            error_code=ErrorCode.TOO_FEW_CORRESPONDENCES,
            context={"count": count, "iteration": iteration}
        )


class DisconnectedGraphError(DomainException):
    """Raised when the scene graph has more than one connected component."""

    def __init__(self, components: List[List[int]]):
        self.components = components
        super().__init__(
            message=f"Scene graph is disconnected into {len(components)} components",
            error_code=ErrorCode.DISCONNECTED_GRAPH,
            context={"components": components}
        )


class NotEnoughDsmsError(DomainException):
    """Raised when fewer than two rasters are given to graph construction."""

    def __init__(self, count: int):
        super().__init__(
            message=f"At least 2 DSMs are required, got {count}",
            error_code=ErrorCode.NOT_ENOUGH_DSMS,
            context={"count": count}
        )


class NumericalFailureError(DomainException):
    """Raised when a linear algebra routine fails to converge."""

    def __init__(self, operation: str, cause: Optional[Exception] = None):
        super().__init__(
            message=f"Numerical failure during {operation}",
            error_code=ErrorCode.NUMERICAL_FAILURE,
            context={"operation": operation},
            cause=cause
        )


class DegenerateMatrixError(DomainException):
    """Raised when a matrix cannot be projected onto SO(3)."""

    def __init__(self, singular_values: Sequence[float]):
        super().__init__(
            message="Matrix rank is below 2",
            error_code=ErrorCode.DEGENERATE_MATRIX,
            context={"singular_values": [float(s) for s in singular_values]}
        )


class EmptyResultError(DomainException):
    """Raised when a resampling or fusion produces no valid pixel."""

    def __init__(self, operation: str):
        super().__init__(
            message=f"{operation} produced no valid pixel",
            error_code=ErrorCode.EMPTY_RESULT,
            context={"operation": operation}
        )


class NoInliersError(DomainException):
    """Raised when every co-located difference exceeds the inlier threshold."""

    def __init__(self, tau: float, n_pairs: int):
        super().__init__(
            message=f"No co-located difference below tau={tau} among {n_pairs} pairs",
            error_code=ErrorCode.NO_INLIERS,
            context={"tau": tau, "n_pairs": n_pairs}
        )


class NoOverlappingPairsError(DomainException):
    """Raised when no pair of posed rasters overlaps."""

    def __init__(self, n_dsms: int):
        super().__init__(
            message=f"None of the {n_dsms} posed DSMs overlap",
            error_code=ErrorCode.NO_OVERLAPPING_PAIRS,
            context={"n_dsms": n_dsms}
        )


class InvalidInputError(DomainException):
    """Raised when domain input data violates an invariant."""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        value: Any = None,
        context: Optional[Dict[str, Any]] = None
    ):
        self.field = field
        self.value = value

        error_context: Dict[str, Any] = {}
        if field:
            error_context["field"] = field
        if value is not None:
            error_context["invalid_value"] = value
        if context:
            error_context.update(context)

        super().__init__(
            message=message,
            error_code=ErrorCode.INVALID_INPUT,
            context=error_context
        )


class InvalidConfigurationError(DomainException):
    """Raised when a pipeline configuration is rejected."""

    def __init__(self, message: str, errors: Optional[List[Dict[str, Any]]] = None):
        super().__init__(
            message=message,
            error_code=ErrorCode.INVALID_CONFIGURATION,
            context={"validation_errors": errors or []}
        )
