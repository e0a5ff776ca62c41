"""
Outbound repository port for DSM rasters.
Defines the persistence contract the registration use cases depend on.
"""

from typing import Optional, Protocol, Sequence, runtime_checkable

from src.domain.entities.dsm_grid import DsmGrid


@runtime_checkable
class RasterRepository(Protocol):
    """
    Repository protocol for DSM rasters.

    Loading is lazy: only the header and georeference are read, heights are
    served through the returned grid's storage on window requests.
    """

    supported_formats: Sequence[str]

    def load(self, path: str, fmt: Optional[str] = None, grid_id: int = 0) -> DsmGrid:
        """
        Open a raster.

        Args:
            path: raster file
            fmt: format name; inferred from the extension when omitted
            grid_id: vertex id assigned to the grid

        Raises:
            ParseError: malformed header or data, with line or byte offset
            UnsupportedFormatError: unknown format or extension
            RasterIOError: the file cannot be opened
        """
        ...

    def write(self, grid: DsmGrid, path: str, fmt: Optional[str] = None) -> None:
        """
        Write a raster, streaming it in row bands.

        Raises:
            UnsupportedFormatError: unknown format or extension
            RasterIOError: the file cannot be written
        """
        ...

    def extension(self, fmt: Optional[str] = None) -> str:
        """Canonical file extension of ``fmt`` (the default format when omitted)."""
        ...
