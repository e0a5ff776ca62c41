"""
Masked raster sampling and pose-driven resampling.

Sampling here is bilinear over valid neighbors only (the DSM-ICP search reads
integer pixels and never goes through this module).
"""

from typing import Iterator, Optional, Tuple

import numpy as np
from scipy import ndimage

from src.domain.entities.dsm_grid import DsmGrid, read_window
from src.domain.entities.geotransform import GeoTransform
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.exceptions import EmptyResultError, InvalidInputError, OutOfBoundsError

SNAP_TOLERANCE: float = 1e-9

# Minimum share of bilinear weight that must fall on valid pixels.
MIN_VALID_WEIGHT: float = 0.5

DEFAULT_RESAMPLE_ITERATIONS: int = 6

SAMPLING_MODES = ("bilinear", "nearest")


def _snap(values: np.ndarray) -> np.ndarray:
    nearest = np.round(values)
    return np.where(np.abs(values - nearest) <= SNAP_TOLERANCE, nearest, values)


def bilinear_sample(grid: DsmGrid, u: np.ndarray, v: np.ndarray, mode: str = "bilinear") -> np.ndarray:
    """
    Sample heights at fractional pixel coordinates.

    Bilinear weights are renormalized over valid neighbors; a sample whose
    valid weight is below one half, or which falls outside the raster, is
    NaN. ``mode="nearest"`` reads the nearest pixel instead.

    Only the bounding window of the requested coordinates is read.
    """
    if mode not in SAMPLING_MODES:
        raise InvalidInputError("Unknown sampling mode", field="mode", value=mode)
    u = _snap(np.asarray(u, dtype=np.float64))
    v = _snap(np.asarray(v, dtype=np.float64))
    result = np.full(u.shape, np.nan)

    if mode == "nearest":
        u = np.floor(u + 0.5)
        v = np.floor(v + 0.5)
    inside = (
        np.isfinite(u) & np.isfinite(v)
        & (u >= 0) & (u <= grid.width - 1)
        & (v >= 0) & (v <= grid.height - 1)
    )
    if not np.any(inside):
        return result

    uu, vv = u[inside], v[inside]
    rect = (int(np.floor(uu.min())), int(np.ceil(uu.max())), int(np.floor(vv.min())), int(np.ceil(vv.max())))
    try:
        window = read_window(grid, rect)
    except OutOfBoundsError:
        return result
    rows = vv - window.v_min
    cols = uu - window.u_min

    if mode == "nearest":
        r, c = rows.astype(np.int64), cols.astype(np.int64)
        result[inside] = np.where(window.mask[r, c], window.heights[r, c], np.nan)
        return result

    filled = np.where(window.mask, window.heights, 0.0)
    weight_map = window.mask.astype(np.float64)
    coordinates = np.vstack([rows, cols])
    values = ndimage.map_coordinates(filled, coordinates, order=1, mode="nearest")
    weights = ndimage.map_coordinates(weight_map, coordinates, order=1, mode="nearest")
    ok = weights >= MIN_VALID_WEIGHT
    sampled = np.full(values.shape, np.nan)
    sampled[ok] = values[ok] / weights[ok]
    result[inside] = sampled
    return result


def sample_world(grid: DsmGrid, xs: np.ndarray, ys: np.ndarray, mode: str = "bilinear") -> np.ndarray:
    """Heights at world coordinates; NaN outside the raster or over nodata."""
    u, v = grid.geotransform.world_to_uv(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64))
    return bilinear_sample(grid, u, v, mode)


def is_identity(pose: RigidTransform) -> bool:
    return bool(np.array_equal(pose.rotation, np.eye(3)) and not np.any(pose.translation))


def start_height(grid: DsmGrid, pose: RigidTransform) -> float:
    """Initial world height for the fixed-point search: mid valid height of the source."""
    if is_identity(pose):
        return 0.0
    span = grid.height_range()
    return 0.0 if span is None else 0.5 * (span[0] + span[1])


def posed_height(
    grid: DsmGrid,
    pose: RigidTransform,
    xs: np.ndarray,
    ys: np.ndarray,
    iterations: int = DEFAULT_RESAMPLE_ITERATIONS,
    mode: str = "bilinear",
    initial_height: Optional[float] = None
) -> np.ndarray:
    """
    Height of the posed surface above world (x, y).

    The posed surface is {pose(x_s, y_s, h(x_s, y_s))}. For each (x, y) the
    source location is found by fixed-point iteration on the world height:
    map (x, y, z) back through the inverse pose, sample the source height
    there, map that point forward and take its z.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if is_identity(pose):
        return sample_world(grid, xs, ys, mode)

    inverse = pose.inverse()
    if initial_height is None:
        initial_height = start_height(grid, pose)
    z = np.full(xs.shape, float(initial_height) + float(pose.translation[2]))
    heights = np.full(xs.shape, np.nan)
    for _ in range(max(1, iterations)):
        source = inverse.apply(np.column_stack([xs.ravel(), ys.ravel(), np.nan_to_num(z).ravel()]))
        sampled = sample_world(grid, source[:, 0], source[:, 1], mode)
        forward = pose.apply(np.column_stack([source[:, 0], source[:, 1], np.nan_to_num(sampled)]))
        heights = np.where(np.isfinite(sampled), forward[:, 2], np.nan).reshape(xs.shape)
        z = np.where(np.isfinite(heights), heights, z)
    return heights


def resample_rows(
    grid: DsmGrid,
    pose: RigidTransform,
    target_gt: GeoTransform,
    target_width: int,
    v_start: int,
    v_stop: int,
    iterations: int = DEFAULT_RESAMPLE_ITERATIONS,
    mode: str = "bilinear",
    initial_height: Optional[float] = None
) -> np.ndarray:
    """Posed heights on target rows ``[v_start, v_stop)``; NaN marks nodata."""
    uu, vv = np.meshgrid(np.arange(target_width, dtype=np.float64), np.arange(v_start, v_stop, dtype=np.float64))
    xs, ys = target_gt.uv_to_world(uu, vv)
    return posed_height(grid, pose, xs, ys, iterations, mode, initial_height)


def iter_bands(height: int, band_rows: int) -> Iterator[Tuple[int, int]]:
    for start in range(0, height, band_rows):
        yield start, min(start + band_rows, height)


def apply_pose(
    grid: DsmGrid,
    pose: RigidTransform,
    target_gt: Optional[GeoTransform] = None,
    target_extent: Optional[Tuple[int, int]] = None,
    iterations: int = DEFAULT_RESAMPLE_ITERATIONS,
    band_rows: int = 256
) -> DsmGrid:
    """
    Resample ``grid`` moved by ``pose`` onto a target lattice.

    The target lattice defaults to the source lattice; ``target_extent`` is
    ``(width, height)``. Target pixels that map off the source or into nodata
    become nodata.

    Raises:
        EmptyResultError: if no target pixel receives data
    """
    target_gt = target_gt or grid.geotransform
    width, height = target_extent or (grid.width, grid.height)
    initial = start_height(grid, pose)

    output = np.empty((height, width))
    for v_start, v_stop in iter_bands(height, band_rows):
        output[v_start:v_stop] = resample_rows(
            grid, pose, target_gt, width, v_start, v_stop, iterations, initial_height=initial,
        )
    if not np.any(np.isfinite(output)):
        raise EmptyResultError("apply_pose")
    return DsmGrid.from_array(output, target_gt, nodata=grid.nodata, id=grid.id)


def posed_footprint(grid: DsmGrid, pose: RigidTransform) -> Tuple[float, float, float, float]:
    """World bounding box ``(x_min, x_max, y_min, y_max)`` of the posed pixel-center hull."""
    span = grid.height_range() or (0.0, 0.0)
    us = np.array([0, grid.width - 1, 0, grid.width - 1], dtype=np.float64)
    vs = np.array([0, 0, grid.height - 1, grid.height - 1], dtype=np.float64)
    xs, ys = grid.geotransform.uv_to_world(us, vs)
    corners = np.array([[x, y, h] for x, y in zip(xs, ys) for h in span])
    posed = pose.apply(corners)
    return (
        float(posed[:, 0].min()),
        float(posed[:, 0].max()),
        float(posed[:, 1].min()),
        float(posed[:, 1].max()),
    )
