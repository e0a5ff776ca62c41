"""Rasters whose heights are computed on demand from pixel indices."""

from typing import Callable

import numpy as np

from src.domain.entities.dsm_grid import DEFAULT_NODATA, DsmGrid
from src.domain.entities.geotransform import GeoTransform
from src.domain.ports.outbound.storage.raster_storage_port import RasterStoragePort

# (u, v) integer index arrays -> heights of the same shape
HeightFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


class ProceduralRasterStorage(RasterStoragePort):
    """
    Storage backed by a height function instead of data.

    Lets arbitrarily large rasters exist without any pixel buffer; only the
    requested window is ever materialized.
    """

    def __init__(self, width: int, height: int, heights: HeightFunction):
        super().__init__()
        self._width = int(width)
        self._height = int(height)
        self._heights = heights

    @property
    def width(self) -> int:
        return self._width

    @property
    def height(self) -> int:
        return self._height

    def _read(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> np.ndarray:
        uu, vv = np.meshgrid(np.arange(col_start, col_stop), np.arange(row_start, row_stop))
        return np.array(np.broadcast_to(self._heights(uu, vv), uu.shape), dtype=np.float64)


def procedural_grid(
    width: int,
    height: int,
    heights: HeightFunction,
    geotransform: GeoTransform,
    nodata: float = DEFAULT_NODATA,
    grid_id: int = 0
) -> DsmGrid:
    return DsmGrid(
        id=grid_id,
        width=width,
        height=height,
        geotransform=geotransform,
        nodata=nodata,
        storage=ProceduralRasterStorage(width, height, heights),
    )


def wave_surface(amplitude: float = 5.0, wavelength: float = 37.0) -> HeightFunction:
    """Smooth periodic test surface h = A sin(2 pi u / L) cos(2 pi v / L)."""
    k = 2.0 * np.pi / wavelength

    def heights(uu: np.ndarray, vv: np.ndarray) -> np.ndarray:
        return amplitude * np.sin(k * uu) * np.cos(k * vv)

    return heights
