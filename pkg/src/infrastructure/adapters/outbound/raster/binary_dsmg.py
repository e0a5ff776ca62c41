"""
Native little-endian binary raster ("DSMG").

Layout (70-byte header, no padding):

    offset  size  field
    0       4     magic b"DSMG"
    4       2     version (u16, currently 1)
    6       4     width (u32)
    10      4     height (u32)
    14      48    x_origin, y_origin, x_scale, y_scale, x_skew, y_skew (f64)
    62      8     nodata (f64)
    70      ...   row-major f64 heights

Heights are served through a read-only memory map, so opening a file costs
only the header.
"""

import struct
from pathlib import Path

import numpy as np

from src.domain.entities.dsm_grid import DsmGrid
from src.domain.entities.geotransform import GeoTransform
from src.domain.exceptions import ParseError, RasterIOError
from src.domain.ports.outbound.storage.raster_storage_port import RasterStoragePort

MAGIC = b"DSMG"
VERSION = 1
HEADER = struct.Struct("<4sHII6dd")
PIXEL_DTYPE = np.dtype("<f8")


class BinaryGridStorage(RasterStoragePort):
    """Memory-mapped window reads; the OS pages in only the touched rows."""

    def __init__(self, path: Path, width: int, height: int):
        super().__init__()
        self._width = width
        self._height = height
        self._data = np.memmap(path, dtype=PIXEL_DTYPE, mode="r", offset=HEADER.size, shape=(height, width))

    @property
    def width(self) -> int:
        return self._width

    @property
    def height(self) -> int:
        return self._height

    def _read(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> np.ndarray:
        return np.array(self._data[row_start:row_stop, col_start:col_stop], dtype=np.float64)


def load_binary(path: Path, grid_id: int = 0) -> DsmGrid:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            raw = handle.read(HEADER.size)
        file_size = path.stat().st_size
    except OSError as error:
        raise RasterIOError(str(path), "read", error) from error

    if len(raw) < HEADER.size:
        raise ParseError(str(path), "truncated header", byte_offset=len(raw))
    magic, version, width, height, *rest = HEADER.unpack(raw)
    if magic != MAGIC:
        raise ParseError(str(path), f"bad magic {magic!r}", byte_offset=0)
    if version != VERSION:
        raise ParseError(str(path), f"unsupported version {version}", byte_offset=4)
    if width < 1 or height < 1:
        raise ParseError(str(path), f"invalid size {width}x{height}", byte_offset=6)
    expected = HEADER.size + width * height * PIXEL_DTYPE.itemsize
    if file_size != expected:
        raise ParseError(
            str(path),
            f"expected {expected} bytes for {width}x{height} raster, found {file_size}",
            byte_offset=min(file_size, expected),
        )

    x_origin, y_origin, x_scale, y_scale, x_skew, y_skew, nodata = rest
    gt = GeoTransform(
        x_origin=x_origin,
        y_origin=y_origin,
        x_scale=x_scale,
        y_scale=y_scale,
        x_skew=x_skew,
        y_skew=y_skew,
    )
    try:
        storage = BinaryGridStorage(path, width, height)
    except (OSError, ValueError) as error:
        raise RasterIOError(str(path), "map", error) from error
    return DsmGrid(
        id=grid_id,
        width=width,
        height=height,
        geotransform=gt,
        nodata=nodata,
        storage=storage,
        path=str(path),
    )


def write_binary(grid: DsmGrid, path: Path, band_rows: int = 256) -> None:
    """Write ``grid`` streaming row bands; heights are stored bit-exactly."""
    path = Path(path)
    gt = grid.geotransform
    header = HEADER.pack(
        MAGIC, VERSION, grid.width, grid.height,
        gt.x_origin, gt.y_origin, gt.x_scale, gt.y_scale, gt.x_skew, gt.y_skew,
        grid.nodata,
    )
    try:
        with open(path, "wb") as handle:
            handle.write(header)
            for band in grid.iter_row_bands(band_rows):
                handle.write(np.ascontiguousarray(band.heights, dtype=PIXEL_DTYPE).tobytes())
    except OSError as error:
        raise RasterIOError(str(path), "write", error) from error
