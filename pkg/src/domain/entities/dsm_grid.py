"""
DSM raster entity with lazy window access.

Each valid pixel (u, v) is the 3D point ``(x, y, h)`` where ``(x, y)`` comes
from the geotransform and ``h = dsm[v, u]``.
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple

import numpy as np

from src.domain.entities.geotransform import GeoTransform
from src.domain.exceptions import InvalidInputError, OutOfBoundsError
from src.domain.ports.outbound.storage.raster_storage_port import (
    InMemoryRasterStorage,
    RasterStoragePort,
)

# (u_min, u_max, v_min, v_max), inclusive pixel indices
PixelRect = Tuple[int, int, int, int]

DEFAULT_NODATA: float = -9999.0


def valid_mask(values: np.ndarray, nodata: float) -> np.ndarray:
    """Cells that are finite and differ from the nodata sentinel."""
    mask = np.isfinite(values)
    if np.isfinite(nodata):
        mask &= values != nodata
    return mask


@dataclass(frozen=True)
class Window:
    """
    Clipped rectangular block of a raster.

    Attributes:
        u_min, u_max, v_min, v_max: inclusive pixel bounds after clipping
        heights: array of shape (v_max - v_min + 1, u_max - u_min + 1)
        mask: validity mask with the same shape as ``heights``
    """

    u_min: int
    u_max: int
    v_min: int
    v_max: int
    heights: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.heights.shape != self.mask.shape:
            raise InvalidInputError("Window mask shape differs from heights shape")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.heights.shape

    @property
    def area(self) -> int:
        return int(self.heights.size)

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.mask))

    def pixel_grid(self) -> Tuple[np.ndarray, np.ndarray]:
        """Integer (u, v) index arrays matching ``heights``."""
        us = np.arange(self.u_min, self.u_max + 1)
        vs = np.arange(self.v_min, self.v_max + 1)
        uu, vv = np.meshgrid(us, vs)
        return uu, vv


@dataclass(frozen=True, eq=False)
class DsmGrid:
    """
    Lazily windowed height raster.

    Immutable after load and safe to share between concurrent readers; only
    header information lives in memory, heights are fetched per window.

    Attributes:
        id: vertex index of this DSM in a scene graph
        width, height: raster size in pixels
        geotransform: pixel-center georeference
        nodata: height sentinel for invalid cells
        storage: backend serving rectangular block reads
        path: source file, when loaded from disk
    """

    id: int
    width: int
    height: int
    geotransform: GeoTransform
    nodata: float
    storage: RasterStoragePort = field(repr=False)
    path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidInputError(
                f"Raster size must be at least 1x1, got {self.width}x{self.height}",
                field="shape",
                value=[self.width, self.height],
            )
        if self.storage.width != self.width or self.storage.height != self.height:
            raise InvalidInputError(
                "Storage size does not match raster header",
                context={
                    "header": [self.width, self.height],
                    "storage": [self.storage.width, self.storage.height],
                },
            )

    @classmethod
    def from_array(
        cls,
        heights: np.ndarray,
        geotransform: GeoTransform,
        nodata: float = DEFAULT_NODATA,
        id: int = 0,
        path: Optional[str] = None,
    ) -> "DsmGrid":
        """Wrap an in-memory height array; NaN cells become the nodata sentinel."""
        array = np.array(heights, dtype=np.float64)
        array[~valid_mask(array, nodata)] = nodata
        storage = InMemoryRasterStorage(array)
        return cls(
            id=id,
            width=storage.width,
            height=storage.height,
            geotransform=geotransform,
            nodata=float(nodata),
            storage=storage,
            path=path,
        )

    def with_id(self, new_id: int) -> "DsmGrid":
        return DsmGrid(
            id=new_id,
            width=self.width,
            height=self.height,
            geotransform=self.geotransform,
            nodata=self.nodata,
            storage=self.storage,
            path=self.path,
        )

    def read_window(self, rect: PixelRect) -> Window:
        return read_window(self, rect)

    def contains_pixel(self, u: int, v: int) -> bool:
        return 0 <= u < self.width and 0 <= v < self.height

    def iter_row_bands(self, band_rows: int = 256) -> Iterator[Window]:
        """Stream the raster as full-width row bands."""
        for v0 in range(0, self.height, band_rows):
            v1 = min(v0 + band_rows, self.height) - 1
            yield read_window(self, (0, self.width - 1, v0, v1))

    def valid_count(self, band_rows: int = 256) -> int:
        return sum(band.n_valid for band in self.iter_row_bands(band_rows))

    def height_range(self, band_rows: int = 256) -> Optional[Tuple[float, float]]:
        """Minimum and maximum valid height, or None for an all-nodata raster."""
        low, high = np.inf, -np.inf
        for band in self.iter_row_bands(band_rows):
            if band.n_valid:
                values = band.heights[band.mask]
                low = min(low, float(values.min()))
                high = max(high, float(values.max()))
        if low > high:
            return None
        return low, high

    def footprint(self) -> Tuple[float, float, float, float]:
        """World bounding box ``(x_min, x_max, y_min, y_max)`` of pixel centers."""
        us = np.array([0, self.width - 1, 0, self.width - 1], dtype=np.float64)
        vs = np.array([0, 0, self.height - 1, self.height - 1], dtype=np.float64)
        xs, ys = self.geotransform.uv_to_world(us, vs)
        return float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max())

    def to_array(self) -> np.ndarray:
        """Materialize every height; intended for small rasters and tests."""
        return read_window(self, (0, self.width - 1, 0, self.height - 1)).heights


def read_window(grid: DsmGrid, rect: PixelRect) -> Window:
    """
    Read an inclusive pixel rectangle clipped to the raster extent.

    Raises:
        InvalidInputError: if the rectangle is empty before clipping
        OutOfBoundsError: if the rectangle is disjoint from the raster
    """
    u_min, u_max, v_min, v_max = (int(value) for value in rect)
    if u_min > u_max or v_min > v_max:
        raise InvalidInputError("Requested window is empty", field="rect", value=list(rect))

    cu_min, cu_max = max(u_min, 0), min(u_max, grid.width - 1)
    cv_min, cv_max = max(v_min, 0), min(v_max, grid.height - 1)
    if cu_min > cu_max or cv_min > cv_max:
        raise OutOfBoundsError(rect, grid.width, grid.height)

    heights = grid.storage.read_block(cv_min, cv_max + 1, cu_min, cu_max + 1)
    mask = valid_mask(heights, grid.nodata)
    return Window(
        u_min=cu_min,
        u_max=cu_max,
        v_min=cv_min,
        v_max=cv_max,
        heights=heights,
        mask=mask,
    )
