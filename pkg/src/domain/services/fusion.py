"""Fusion of registered DSMs, error maps and height profiles."""

import math
import warnings
from typing import Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.dsm_grid import DEFAULT_NODATA, DsmGrid
from src.domain.entities.geotransform import GeoTransform
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.value_objects import FusedDsm, HeightProfile, MetricConfig, MetricResult
from src.domain.exceptions import EmptyResultError, InvalidInputError, NoOverlapError
from src.domain.services.metrics import rmse_tau
from src.domain.services.resampling import (
    DEFAULT_RESAMPLE_ITERATIONS,
    iter_bands,
    posed_footprint,
    resample_rows,
    sample_world,
    start_height,
)

# Guards floor() when the extent is an exact multiple of the GSD.
_EXTENT_SLACK: float = 1e-9


def fusion_lattice(
    dsms: Sequence[DsmGrid],
    poses: Sequence[RigidTransform],
    target_gsd: Optional[float] = None
) -> Tuple[GeoTransform, int, int]:
    """North-up lattice covering every posed footprint; GSD defaults to the finest input."""
    boxes = np.array([posed_footprint(dsm, pose) for dsm, pose in zip(dsms, poses)])
    gsd = target_gsd or min(dsm.geotransform.gsd for dsm in dsms)
    if not gsd > 0:
        raise InvalidInputError("Target GSD must be positive", field="target_gsd", value=gsd)
    x_min, x_max = boxes[:, 0].min(), boxes[:, 1].max()
    y_min, y_max = boxes[:, 2].min(), boxes[:, 3].max()
    width = int(math.floor((x_max - x_min) / gsd + _EXTENT_SLACK)) + 1
    height = int(math.floor((y_max - y_min) / gsd + _EXTENT_SLACK)) + 1
    return GeoTransform(x_origin=x_min, y_origin=y_max, x_scale=gsd, y_scale=-gsd), width, height


def fuse(
    dsms: Sequence[DsmGrid],
    poses: Sequence[RigidTransform],
    target_gsd: Optional[float] = None,
    iterations: int = DEFAULT_RESAMPLE_ITERATIONS,
    band_rows: int = 256
) -> FusedDsm:
    """
    Resample every posed DSM onto a common lattice and take the per-pixel median.

    Raises:
        EmptyResultError: no target pixel receives data
    """
    if not dsms:
        raise EmptyResultError("fuse")
    if len(dsms) != len(poses):
        raise InvalidInputError("One pose per DSM is required", field="poses", value=len(poses))

    target_gt, width, height = fusion_lattice(dsms, poses, target_gsd)
    nodata = dsms[0].nodata if np.isfinite(dsms[0].nodata) else DEFAULT_NODATA
    fused = np.full((height, width), np.nan)
    contributors = np.zeros((height, width), dtype=np.int32)

    # Target row span touched by each posed DSM.
    spans = []
    initials = [start_height(dsm, pose) for dsm, pose in zip(dsms, poses)]
    for dsm, pose in zip(dsms, poses):
        x_min, x_max, y_min, y_max = posed_footprint(dsm, pose)
        _, v_a = target_gt.world_to_uv(x_min, y_max)
        _, v_b = target_gt.world_to_uv(x_min, y_min)
        spans.append((math.floor(min(v_a, v_b)) - 1, math.ceil(max(v_a, v_b)) + 1))

    for v_start, v_stop in iter_bands(height, band_rows):
        layers = [
            resample_rows(dsm, pose, target_gt, width, v_start, v_stop, iterations, initial_height=initial)
            for dsm, pose, initial, (low, high) in zip(dsms, poses, initials, spans)
            if high >= v_start and low < v_stop
        ]
        if not layers:
            continue
        stack = np.stack(layers)
        counts = np.count_nonzero(np.isfinite(stack), axis=0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=RuntimeWarning)
            fused[v_start:v_stop] = np.nanmedian(stack, axis=0)
        contributors[v_start:v_stop] = counts

    if not np.any(contributors):
        raise EmptyResultError("fuse")
    return FusedDsm(grid=DsmGrid.from_array(fused, target_gt, nodata=nodata), contributors=contributors)


def error_map(
    fused: DsmGrid,
    reference: DsmGrid,
    cfg: Optional[MetricConfig] = None,
    band_rows: int = 256
) -> Tuple[DsmGrid, MetricResult]:
    """
    Signed ``fused - reference`` on the fused lattice, plus the RMSE_tau summary.

    Outliers beyond tau stay in the map; only the summary gates them.

    Raises:
        NoOverlapError: no fused pixel has a valid reference value
    """
    cfg = cfg or MetricConfig()
    differences = np.full((fused.height, fused.width), np.nan)
    for band in fused.iter_row_bands(band_rows):
        uu, vv = band.pixel_grid()
        xs, ys = fused.geotransform.uv_to_world(uu.astype(np.float64), vv.astype(np.float64))
        reference_heights = sample_world(reference, xs, ys, cfg.sampling)
        both = band.mask & np.isfinite(reference_heights)
        differences[band.v_min:band.v_max + 1][both] = band.heights[both] - reference_heights[both]

    if not np.any(np.isfinite(differences)):
        raise NoOverlapError("Fused raster and reference do not overlap")
    summary = rmse_tau(fused, reference, cfg)
    return DsmGrid.from_array(differences, fused.geotransform, nodata=fused.nodata), summary


def extract_profile(
    grid: DsmGrid,
    start_xy: Tuple[float, float],
    end_xy: Tuple[float, float],
    n: int = 200,
    mode: str = "bilinear"
) -> HeightProfile:
    """Heights at ``n`` evenly spaced points from ``start_xy`` to ``end_xy``."""
    if n < 2:
        raise InvalidInputError("A profile needs at least two samples", field="n", value=n)
    xs = np.linspace(start_xy[0], end_xy[0], n)
    ys = np.linspace(start_xy[1], end_xy[1], n)
    distances = np.hypot(xs - xs[0], ys - ys[0])
    return HeightProfile(distances=distances, xs=xs, ys=ys, heights=sample_world(grid, xs, ys, mode))
