"""
ESRI ASCII grid adapter.

Header keys: ncols, nrows, xllcorner|xllcenter, yllcorner|yllcenter,
cellsize, NODATA_value; values follow row-major, north row first, with any
line wrapping. Opening a file reads the header only. The first window read
builds a per-row index of (byte offset, tokens to skip, line number) so later
reads seek straight to the requested rows.
"""

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, List, Optional, Tuple

import numpy as np

from src.domain.entities.dsm_grid import DEFAULT_NODATA, DsmGrid, valid_mask
from src.domain.entities.geotransform import GeoTransform
from src.domain.exceptions import ParseError, RasterIOError
from src.domain.ports.outbound.storage.raster_storage_port import RasterStoragePort

from .world_file import Anchor, companion_path, read_world_file, write_world_file

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "xllcenter", "yllcorner", "yllcenter", "cellsize", "nodata_value")


@dataclass(frozen=True)
class AsciiHeader:
    ncols: int
    nrows: int
    x_ll: float
    y_ll: float
    cellsize: float
    nodata: float
    corner: bool
    data_offset: int
    data_line: int

    def geotransform(self) -> GeoTransform:
        half = 0.5 * self.cellsize if self.corner else 0.0
        return GeoTransform(
            x_origin=self.x_ll + half,
            y_origin=self.y_ll + (self.nrows - 1) * self.cellsize + half,
            x_scale=self.cellsize,
            y_scale=-self.cellsize,
        )


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_header(path: Path) -> AsciiHeader:
    """Parse header lines up to the first numeric line."""
    values = {}
    line_number = 0
    try:
        with open(path, "rb") as handle:
            while True:
                offset = handle.tell()
                raw = handle.readline()
                if not raw:
                    raise ParseError(str(path), "file ends before raster values", line=line_number + 1)
                line_number += 1
                tokens = raw.decode("ascii", errors="replace").split()
                if not tokens:
                    continue
                if _is_number(tokens[0]):
                    break
                key = tokens[0].lower()
                if key not in HEADER_KEYS or len(tokens) != 2:
                    raise ParseError(str(path), f"unexpected header line {raw.strip()!r}", line=line_number)
                try:
                    values[key] = float(tokens[1])
                except ValueError:
                    raise ParseError(str(path), f"header value for {key} is not a number", line=line_number) from None
    except OSError as error:
        raise RasterIOError(str(path), "read", error) from error

    for required in ("ncols", "nrows", "cellsize"):
        if required not in values:
            raise ParseError(str(path), f"missing header key {required}", line=line_number)
    corner_x, corner_y = "xllcorner" in values, "yllcorner" in values
    if corner_x == ("xllcenter" in values) or corner_y == ("yllcenter" in values) or corner_x != corner_y:
        raise ParseError(str(path), "header needs either xllcorner/yllcorner or xllcenter/yllcenter", line=line_number)

    ncols, nrows = int(values["ncols"]), int(values["nrows"])
    if ncols < 1 or nrows < 1 or ncols != values["ncols"] or nrows != values["nrows"]:
        raise ParseError(str(path), "ncols and nrows must be positive integers")
    if not values["cellsize"] > 0:
        raise ParseError(str(path), "cellsize must be positive")
    return AsciiHeader(
        ncols=ncols,
        nrows=nrows,
        x_ll=values["xllcorner" if corner_x else "xllcenter"],
        y_ll=values["yllcorner" if corner_y else "yllcenter"],
        cellsize=values["cellsize"],
        nodata=values.get("nodata_value", DEFAULT_NODATA),
        corner=corner_x,
        data_offset=offset,
        data_line=line_number,
    )


class AsciiGridStorage(RasterStoragePort):
    """Window reads served from an ESRI ASCII grid without loading the whole file."""

    def __init__(self, path: Path, header: AsciiHeader):
        super().__init__()
        self._path = Path(path)
        self._header = header
        self._row_index: Optional[List[Tuple[int, int, int]]] = None
        self._lock = threading.Lock()

    @property
    def width(self) -> int:
        return self._header.ncols

    @property
    def height(self) -> int:
        return self._header.nrows

    def _build_index(self) -> List[Tuple[int, int, int]]:
        ncols, nrows = self._header.ncols, self._header.nrows
        expected = ncols * nrows
        index: List[Tuple[int, int, int]] = []
        seen = 0
        line_number = self._header.data_line - 1
        with open(self._path, "rb") as handle:
            handle.seek(self._header.data_offset)
            while True:
                offset = handle.tell()
                raw = handle.readline()
                if not raw:
                    break
                line_number += 1
                count = len(raw.split())
                while len(index) < nrows and len(index) * ncols < seen + count:
                    index.append((offset, len(index) * ncols - seen, line_number))
                seen += count
        if seen != expected:
            raise ParseError(
                str(self._path),
                f"expected {expected} values, found {seen}",
                line=line_number,
            )
        return index

    def _ensure_index(self) -> List[Tuple[int, int, int]]:
        with self._lock:
            if self._row_index is None:
                try:
                    self._row_index = self._build_index()
                except OSError as error:
                    raise RasterIOError(str(self._path), "index", error) from error
            return self._row_index

    def _read_row(self, handle: BinaryIO, row: int, col_start: int, col_stop: int) -> np.ndarray:
        offset, skip, line_number = self._row_index[row]
        handle.seek(offset)
        tokens: List[str] = []
        needed = skip + col_stop
        while len(tokens) < needed:
            raw = handle.readline()
            if not raw:
                break
            tokens.extend(raw.decode("ascii", errors="replace").split())
        try:
            return np.array(tokens[skip + col_start:skip + col_stop], dtype=np.float64)
        except ValueError:
            raise ParseError(str(self._path), f"non-numeric value in row {row}", line=line_number) from None

    def _read(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> np.ndarray:
        self._ensure_index()
        block = np.empty((row_stop - row_start, col_stop - col_start))
        try:
            with open(self._path, "rb") as handle:
                for offset, row in enumerate(range(row_start, row_stop)):
                    block[offset] = self._read_row(handle, row, col_start, col_stop)
        except OSError as error:
            raise RasterIOError(str(self._path), "read", error) from error
        return block


def load_ascii(path: Path, grid_id: int = 0, anchor: Anchor = "center") -> DsmGrid:
    """Open an ASCII grid lazily; a companion world file overrides the header georeference."""
    path = Path(path)
    header = read_header(path)
    world = companion_path(path)
    gt = read_world_file(world, anchor) if world else header.geotransform()
    return DsmGrid(
        id=grid_id,
        width=header.ncols,
        height=header.nrows,
        geotransform=gt,
        nodata=header.nodata,
        storage=AsciiGridStorage(path, header),
        path=str(path),
    )


def _header_for(grid: DsmGrid, nodata: float) -> AsciiHeader:
    gt = grid.geotransform
    cellsize = abs(gt.x_scale)
    return AsciiHeader(
        ncols=grid.width,
        nrows=grid.height,
        x_ll=gt.x_origin,
        y_ll=gt.y_origin - (grid.height - 1) * cellsize,
        cellsize=cellsize,
        nodata=nodata,
        corner=False,
        data_offset=0,
        data_line=0,
    )


def write_ascii(grid: DsmGrid, path: Path, anchor: Anchor = "center", band_rows: int = 256) -> None:
    """
    Write an ASCII grid with 17 significant digits.

    A world file is written next to it whenever the header alone cannot
    reproduce the georeference exactly (skew, non-square or south-up pixels,
    rounding of the lower-left origin).
    """
    path = Path(path)
    nodata = grid.nodata if np.isfinite(grid.nodata) else DEFAULT_NODATA
    header = _header_for(grid, nodata)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as handle:
            handle.write(f"ncols {header.ncols}\n")
            handle.write(f"nrows {header.nrows}\n")
            handle.write(f"xllcenter {header.x_ll:.17g}\n")
            handle.write(f"yllcenter {header.y_ll:.17g}\n")
            handle.write(f"cellsize {header.cellsize:.17g}\n")
            handle.write(f"NODATA_value {nodata:.17g}\n")
            for band in grid.iter_row_bands(band_rows):
                values = np.where(valid_mask(band.heights, grid.nodata), band.heights, nodata)
                np.savetxt(handle, values, fmt="%.17g")
    except OSError as error:
        raise RasterIOError(str(path), "write", error) from error

    world = path.with_suffix(".wld")
    if header.geotransform() != grid.geotransform:
        write_world_file(grid.geotransform, world, anchor)
    elif world.is_file():
        # stale companion from an earlier write would override the header
        world.unlink()
