"""
Exact nearest-neighbor search from a 3D query point into a reference DSM.

The search never builds a spatial index over the reference. For each query:

1. the query's horizontal position is projected into the reference grid and
   the co-located pixel becomes the initial correspondence;
2. the 3D distance to that pixel's point bounds the true nearest neighbor;
3. the bounding sphere is projected to a pixel rectangle;
4. only the pixels of that rectangle are read and scanned.

Memory and time per query are proportional to the rectangle area.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.dsm_grid import DsmGrid, Window, read_window
from src.domain.entities.value_objects import NnResult, SearchBound
from src.domain.exceptions import AllNodataError, NoOverlapError, OutOfBoundsError

DEFAULT_MAX_RING_RADIUS: int = 64

# Guards ceil() against representation error when d / gsd is an exact integer.
_CEIL_SLACK: float = 1e-9


def _nearest_pixel(value: float) -> int:
    return int(math.floor(value + 0.5))


def _window_squared_distances(window: Window, grid: DsmGrid, query: Sequence[float]) -> np.ndarray:
    """Squared 3D distances from ``query`` to every window pixel; nodata -> inf."""
    uu, vv = window.pixel_grid()
    xs, ys = grid.geotransform.uv_to_world(uu.astype(np.float64), vv.astype(np.float64))
    dx = xs - query[0]
    dy = ys - query[1]
    dh = window.heights - query[2]
    squared = dx * dx + dy * dy + dh * dh
    return np.where(window.mask, squared, np.inf)


def _ring_windows(ref: DsmGrid, u_c: int, v_c: int, radius: int) -> List[Window]:
    """The four border strips of the square ring at ``radius`` around (u_c, v_c)."""
    strips = (
        (u_c - radius, u_c + radius, v_c - radius, v_c - radius),
        (u_c - radius, u_c + radius, v_c + radius, v_c + radius),
        (u_c - radius, u_c - radius, v_c - radius + 1, v_c + radius - 1),
        (u_c + radius, u_c + radius, v_c - radius + 1, v_c + radius - 1),
    )
    windows = []
    for rect in strips:
        if rect[0] > rect[1] or rect[2] > rect[3]:
            continue
        try:
            windows.append(read_window(ref, rect))
        except OutOfBoundsError:
            continue
    return windows


def _ring_scan(
    query: Sequence[float],
    ref: DsmGrid,
    u_c: int,
    v_c: int,
    max_ring_radius: int
) -> Tuple[int, int, float, float]:
    """Nearest valid pixel on the first non-empty ring; returns (u, v, h, squared distance)."""
    for radius in range(1, max_ring_radius + 1):
        if (u_c - radius < 0 and v_c - radius < 0
                and u_c + radius >= ref.width and v_c + radius >= ref.height):
            break
        best: Optional[Tuple[float, int, int, float]] = None
        for window in _ring_windows(ref, u_c, v_c, radius):
            if not window.n_valid:
                continue
            squared = _window_squared_distances(window, ref, query)
            flat = int(np.argmin(squared))
            row, col = divmod(flat, window.shape[1])
            candidate = (
                float(squared[row, col]),
                window.v_min + row,
                window.u_min + col,
                float(window.heights[row, col]),
            )
            if best is None or candidate[:3] < best[:3]:
                best = candidate
        if best is not None:
            squared_distance, v, u, h = best
            return u, v, h, squared_distance
    raise AllNodataError(
        "No valid reference pixel near the query",
        context={"pixel": [u_c, v_c], "max_ring_radius": max_ring_radius},
    )


def initial_bound(
    query_point: Sequence[float],
    ref: DsmGrid,
    max_ring_radius: int = DEFAULT_MAX_RING_RADIUS
) -> SearchBound:
    """
    Constant-time upper bound on the nearest-neighbor distance.

    Raises:
        NoOverlapError: if the query projects outside the reference extent
        AllNodataError: if no valid pixel lies within ``max_ring_radius``
    """
    x, y, h = (float(value) for value in query_point)
    u_f, v_f = ref.geotransform.world_to_uv(x, y)
    u_c, v_c = _nearest_pixel(u_f), _nearest_pixel(v_f)
    if not ref.contains_pixel(u_c, v_c):
        raise NoOverlapError(
            "Query projects outside the reference raster",
            context={"pixel": [u_c, v_c], "grid_id": ref.id},
        )

    anchor = read_window(ref, (u_c, u_c, v_c, v_c))
    if anchor.mask[0, 0]:
        anchor_u, anchor_v = u_c, v_c
        anchor_h = float(anchor.heights[0, 0])
        squared = float(_window_squared_distances(anchor, ref, (x, y, h))[0, 0])
    else:
        anchor_u, anchor_v, anchor_h, squared = _ring_scan((x, y, h), ref, u_c, v_c, max_ring_radius)

    radius_d = math.sqrt(squared)
    half = max(0, math.ceil(radius_d * ref.geotransform.pixel_radius() - _CEIL_SLACK))
    return SearchBound(
        anchor_pixel=(anchor_u, anchor_v),
        anchor_height=anchor_h,
        radius_d=radius_d,
        rect=(u_c - half, u_c + half, v_c - half, v_c + half),
    )


def nn_search(query_point: Sequence[float], ref: DsmGrid, bound: SearchBound) -> NnResult:
    """
    Exact 3D nearest valid reference point inside the bound's rectangle.

    Ties are broken by the smallest (v, u) pixel index.

    Raises:
        AllNodataError: if every pixel of the rectangle is nodata
    """
    query = tuple(float(value) for value in query_point)
    try:
        window = read_window(ref, bound.rect)
    except OutOfBoundsError as error:
        raise NoOverlapError("Search rectangle lies outside the reference", context={"rect": list(bound.rect)}) from error
    if not window.n_valid:
        raise AllNodataError(context={"rect": list(bound.rect)})

    squared = _window_squared_distances(window, ref, query)
    flat = int(np.argmin(squared))
    row, col = divmod(flat, window.shape[1])
    u, v = window.u_min + col, window.v_min + row
    x, y = ref.geotransform.uv_to_world(float(u), float(v))
    return NnResult(
        ref_point=(float(x), float(y), float(window.heights[row, col])),
        ref_pixel=(u, v),
        distance=math.sqrt(float(squared[row, col])),
        candidates_scanned=window.area,
    )


def brute_force_nn(query_point: Sequence[float], ref: DsmGrid, band_rows: int = 256) -> NnResult:
    """Exhaustive scan over every valid pixel, streamed in row bands."""
    query = tuple(float(value) for value in query_point)
    best: Optional[Tuple[float, int, int, float]] = None
    scanned = 0
    for band in ref.iter_row_bands(band_rows):
        scanned += band.area
        if not band.n_valid:
            continue
        squared = _window_squared_distances(band, ref, query)
        flat = int(np.argmin(squared))
        row, col = divmod(flat, band.shape[1])
        value = float(squared[row, col])
        if best is None or value < best[0]:
            best = (value, band.u_min + col, band.v_min + row, float(band.heights[row, col]))

    if best is None:
        raise AllNodataError("Reference raster contains only nodata", context={"grid_id": ref.id})

    squared_distance, u, v, h = best
    x, y = ref.geotransform.uv_to_world(float(u), float(v))
    return NnResult(
        ref_point=(float(x), float(y), h),
        ref_pixel=(u, v),
        distance=math.sqrt(squared_distance),
        candidates_scanned=scanned,
    )


def find_nearest(
    query_point: Sequence[float],
    ref: DsmGrid,
    max_ring_radius: int = DEFAULT_MAX_RING_RADIUS
) -> NnResult:
    """``initial_bound`` followed by ``nn_search``."""
    return nn_search(query_point, ref, initial_bound(query_point, ref, max_ring_radius))


@dataclass(frozen=True)
class CorrespondenceBatch:
    """Nearest neighbors of a batch of query points; dropped queries are excluded."""

    query_index: np.ndarray
    ref_points: np.ndarray
    distances: np.ndarray
    candidates: np.ndarray

    def __len__(self) -> int:
        return int(self.query_index.size)


def _search_chunk(
    points: np.ndarray,
    offset: int,
    ref: DsmGrid,
    max_ring_radius: int
) -> List[Tuple[int, Tuple[float, float, float], float, int]]:
    found = []
    for local, point in enumerate(points):
        try:
            result = find_nearest(point, ref, max_ring_radius)
        except (NoOverlapError, AllNodataError):
            continue
        found.append((offset + local, result.ref_point, result.distance, result.candidates_scanned))
    return found


def search_batch(
    points: np.ndarray,
    ref: DsmGrid,
    max_ring_radius: int = DEFAULT_MAX_RING_RADIUS,
    executor: Optional[ThreadPoolExecutor] = None,
    chunk_size: int = 256
) -> CorrespondenceBatch:
    """
    Nearest neighbors for an (N, 3) array of queries.

    Queries projecting off the reference or surrounded by nodata are dropped.
    With an executor, chunks of queries are searched concurrently.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    chunks = [(points[start:start + chunk_size], start) for start in range(0, len(points), chunk_size)]
    if executor is None:
        parts = [_search_chunk(chunk, start, ref, max_ring_radius) for chunk, start in chunks]
    else:
        futures = [executor.submit(_search_chunk, chunk, start, ref, max_ring_radius) for chunk, start in chunks]
        parts = [future.result() for future in futures]

    found = [item for part in parts for item in part]
    if not found:
        return CorrespondenceBatch(
            query_index=np.zeros(0, dtype=np.int64),
            ref_points=np.zeros((0, 3)),
            distances=np.zeros(0),
            candidates=np.zeros(0, dtype=np.int64),
        )
    return CorrespondenceBatch(
        query_index=np.array([item[0] for item in found], dtype=np.int64),
        ref_points=np.array([item[1] for item in found], dtype=np.float64),
        distances=np.array([item[2] for item in found], dtype=np.float64),
        candidates=np.array([item[3] for item in found], dtype=np.int64),
    )
