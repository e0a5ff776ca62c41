"""
Outbound port for rectangular window reads from a raster backend.
Backends never hand out the whole raster; callers ask for row/column blocks.
"""

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ReadStats:
    """Instrumentation counters shared by every storage backend."""

    windows_read: int = 0
    pixels_read: int = 0
    peak_window_pixels: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, pixels: int) -> None:
        with self._lock:
            self.windows_read += 1
            self.pixels_read += pixels
            if pixels > self.peak_window_pixels:
                self.peak_window_pixels = pixels

    def reset(self) -> None:
        with self._lock:
            self.windows_read = 0
            self.pixels_read = 0
            self.peak_window_pixels = 0


class RasterStoragePort(ABC):
    """
    Outbound port interface for raster storage.

    Implementations must be safe for concurrent readers and must keep
    memory proportional to the requested block, never to the raster size.
    """

    def __init__(self) -> None:
        self.stats = ReadStats()

    @property
    @abstractmethod
    def width(self) -> int:
        """Number of columns."""

    @property
    @abstractmethod
    def height(self) -> int:
        """Number of rows."""

    @abstractmethod
    def _read(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> np.ndarray:
        """Backend-specific read of the half-open block, already clipped."""

    def read_block(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> np.ndarray:
        """
        Read a half-open block ``[row_start:row_stop, col_start:col_stop]``.

        Returns:
            float64 array of shape (row_stop - row_start, col_stop - col_start)
            holding raw values (nodata sentinels included)
        """
        block = np.asarray(self._read(row_start, row_stop, col_start, col_stop), dtype=np.float64)
        self.stats.record(int(block.size))
        return block


class InMemoryRasterStorage(RasterStoragePort):
    """In-memory storage for materialized rasters (resampling and fusion outputs)."""

    def __init__(self, heights: np.ndarray) -> None:
        super().__init__()
        array = np.asarray(heights, dtype=np.float64)
        if array.ndim != 2:
            raise ValueError("Raster array must be two-dimensional")
        self._array = array

    @property
    def width(self) -> int:
        return int(self._array.shape[1])

    @property
    def height(self) -> int:
        return int(self._array.shape[0])

    def _read(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> np.ndarray:
        return self._array[row_start:row_stop, col_start:col_stop].copy()
