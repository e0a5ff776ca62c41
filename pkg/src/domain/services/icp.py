"""
DSM-ICP: pairwise rigid registration of two height rasters.

Alternates the grid-bounded correspondence step with closed-form rigid
estimation. Query points are read at integer pixels of the moving raster;
reference points at integer pixels of the reference raster.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from src.domain.entities.dsm_grid import DsmGrid, read_window
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.value_objects import IcpParams, RegistrationReport
from src.domain.exceptions import (
    DegenerateGeometryError,
    InvalidInputError,
    NoOverlapError,
    NoValidPixelsError,
    TooFewCorrespondencesError,
)
from src.domain.services.nn_grid import search_batch

logger = logging.getLogger(__name__)

# Relative threshold on the second singular value of the cross-covariance.
RANK_TOLERANCE: float = 1e-12


def _cell_edges(size: int, cells: int) -> np.ndarray:
    return (np.arange(cells + 1) * size) // cells


def _all_valid_pixels(grid: DsmGrid, band_rows: int = 256) -> np.ndarray:
    found = []
    for band in grid.iter_row_bands(band_rows):
        rows, cols = np.nonzero(band.mask)
        found.append(np.column_stack([cols + band.u_min, rows + band.v_min]))
    return np.concatenate(found).astype(np.int64) if found else np.zeros((0, 2), dtype=np.int64)


def _allocate_extra(capacity: np.ndarray, wanted: int, rng: np.random.Generator) -> np.ndarray:
    """Spread ``wanted`` extra samples over cells, proportional to spare valid pixels."""
    extra = np.zeros_like(capacity)
    remaining = wanted
    while remaining > 0:
        spare = capacity - extra
        probabilities = spare / spare.sum()
        draw = rng.multinomial(remaining, probabilities)
        extra += np.minimum(draw, spare)
        remaining = wanted - int(extra.sum())
    return extra


def sample_queries(moving: DsmGrid, n: int, seed: int = 0) -> np.ndarray:
    """
    Stratified, seeded sample of valid query pixels.

    The raster is cut into ceil(sqrt(n)) x ceil(sqrt(n)) cells; one random
    valid pixel is drawn per non-empty cell, then the sample is topped up with
    random valid pixels until it holds ``n``. When the raster has at most
    ``n`` valid pixels, all of them are returned.

    Returns:
        int array of shape (k, 2) holding (u, v) pixel indices

    Raises:
        NoValidPixelsError: if the raster has no valid pixel
    """
    if n < 1:
        raise InvalidInputError("Sample size must be positive", field="n", value=n)

    rng = np.random.default_rng(seed)
    cells = math.ceil(math.sqrt(n))
    u_edges = _cell_edges(moving.width, cells)
    v_edges = _cell_edges(moving.height, cells)

    rects: List[Tuple[int, int, int, int]] = []
    first_pick: List[Tuple[int, int]] = []
    counts: List[int] = []
    for row in range(cells):
        for col in range(cells):
            u0, u1 = int(u_edges[col]), int(u_edges[col + 1]) - 1
            v0, v1 = int(v_edges[row]), int(v_edges[row + 1]) - 1
            if u0 > u1 or v0 > v1:
                continue
            window = read_window(moving, (u0, u1, v0, v1))
            rows, cols = np.nonzero(window.mask)
            if rows.size == 0:
                continue
            pick = int(rng.integers(rows.size))
            rects.append((u0, u1, v0, v1))
            first_pick.append((u0 + int(cols[pick]), v0 + int(rows[pick])))
            counts.append(int(rows.size))

    total_valid = sum(counts)
    if total_valid == 0:
        raise NoValidPixelsError(moving.id)
    if total_valid <= n:
        return _all_valid_pixels(moving)

    picked = np.array(first_pick, dtype=np.int64)
    if len(picked) >= n:
        keep = np.sort(rng.choice(len(picked), size=n, replace=False))
        return picked[keep]

    extra = _allocate_extra(np.array(counts, dtype=np.int64) - 1, n - len(picked), rng)
    samples = [picked]
    for cell, count in enumerate(extra):
        if count == 0:
            continue
        u0, u1, v0, v1 = rects[cell]
        window = read_window(moving, (u0, u1, v0, v1))
        rows, cols = np.nonzero(window.mask)
        pixels = np.column_stack([cols + u0, rows + v0])
        first = np.array(first_pick[cell])
        pixels = pixels[np.any(pixels != first, axis=1)]
        chosen = rng.choice(len(pixels), size=int(count), replace=False)
        samples.append(pixels[np.sort(chosen)])
    return np.concatenate(samples).astype(np.int64)


def query_points(moving: DsmGrid, pixels: np.ndarray) -> np.ndarray:
    """World points (x, y, h) of the given valid pixels in the moving frame."""
    heights = np.empty(len(pixels))
    for index, (u, v) in enumerate(pixels):
        heights[index] = read_window(moving, (u, u, v, v)).heights[0, 0]
    xs, ys = moving.geotransform.uv_to_world(pixels[:, 0].astype(np.float64), pixels[:, 1].astype(np.float64))
    return np.column_stack([xs, ys, heights])


def estimate_rigid(
    p: np.ndarray,
    q: np.ndarray,
    weights: Optional[np.ndarray] = None
) -> RigidTransform:
    """
    Weighted least-squares rigid transform mapping ``p`` onto ``q``.

    Minimizes sum w_i ||R p_i + t - q_i||^2 by centroid subtraction and the
    SVD of the 3x3 cross-covariance; the determinant sign correction keeps
    det(R) = +1.

    Raises:
        DegenerateGeometryError: fewer than 3 correspondences, or collinear /
            coincident points (cross-covariance rank < 2)
    """
    p = np.asarray(p, dtype=np.float64).reshape(-1, 3)
    q = np.asarray(q, dtype=np.float64).reshape(-1, 3)
    if p.shape != q.shape:
        raise InvalidInputError("Correspondence arrays differ in shape")
    if len(p) < 3:
        raise DegenerateGeometryError("fewer than 3 correspondences", context={"count": len(p)})

    if weights is None:
        w = np.ones(len(p))
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != len(p) or np.any(w < 0) or not w.sum() > 0:
            raise InvalidInputError("Weights must be non-negative with a positive sum")
    w = w / w.sum()

    p_mean = w @ p
    q_mean = w @ q
    p_centered = p - p_mean
    q_centered = q - q_mean
    covariance = (p_centered * w[:, None]).T @ q_centered

    u, singular, vt = np.linalg.svd(covariance)
    if singular[0] == 0.0 or singular[1] <= RANK_TOLERANCE * singular[0]:
        raise DegenerateGeometryError(
            "cross-covariance rank below 2",
            context={"singular_values": singular.tolist()},
        )

    v = vt.T
    sign = 1.0 if np.linalg.det(v @ u.T) >= 0.0 else -1.0
    rotation = v @ np.diag([1.0, 1.0, sign]) @ u.T
    translation = q_mean - rotation @ p_mean
    return RigidTransform(rotation, translation)


def objective(p: np.ndarray, q: np.ndarray, transform: RigidTransform, weights: Optional[np.ndarray] = None) -> float:
    """Weighted sum of squared point-to-point residuals."""
    residual = transform.apply(p) - np.asarray(q, dtype=np.float64)
    squared = np.einsum("ij,ij->i", residual, residual)
    if weights is None:
        return float(squared.sum())
    return float(np.asarray(weights) @ squared)


def _select_correspondences(distances: np.ndarray, params: IcpParams) -> np.ndarray:
    """Indices surviving the distance gate and trimming of the worst residuals."""
    gated = np.flatnonzero(distances <= params.correspondence_reject)
    n_trim = int(math.floor(params.trim_fraction * gated.size))
    if n_trim == 0:
        return gated
    order = np.argsort(distances[gated], kind="stable")
    return np.sort(gated[order[:gated.size - n_trim]])


def _pose_delta(previous: RigidTransform, current: RigidTransform, centroid: np.ndarray) -> float:
    """Rotation angle change plus displacement of the query centroid."""
    delta = current.compose(previous.inverse())
    shift = np.linalg.norm(current.apply(centroid[None, :]) - previous.apply(centroid[None, :]))
    return delta.rotation_angle() + float(shift)


def dsm_icp(
    moving: DsmGrid,
    reference: DsmGrid,
    params: Optional[IcpParams] = None,
    init: Optional[RigidTransform] = None,
    executor: Optional[ThreadPoolExecutor] = None
) -> RegistrationReport:
    """
    Register ``moving`` onto ``reference``.

    The returned transform maps points of the moving raster into the
    reference frame and already includes ``init``.

    Raises:
        NoOverlapError: if no query finds a correspondence under ``init``
        TooFewCorrespondencesError: if fewer than 3 correspondences survive
    """
    params = params or IcpParams()
    pose = init or RigidTransform.identity()

    pixels = sample_queries(moving, params.n_queries, params.seed)
    points = query_points(moving, pixels)
    centroid = points.mean(axis=0)

    own_executor = None
    if executor is None and params.threads > 1:
        own_executor = executor = ThreadPoolExecutor(max_workers=params.threads)

    residual_history: List[float] = []
    candidates_history: List[float] = []
    correspondence_seconds: List[float] = []
    scanned_total = 0
    searched_total = 0
    err = 0.0
    n_correspondences = 0
    converged = False
    iteration = 0

    try:
        for iteration in range(1, params.max_iterations + 1):
            started = time.perf_counter()
            batch = search_batch(pose.apply(points), reference, params.max_ring_radius, executor)
            correspondence_seconds.append(time.perf_counter() - started)

            if len(batch) == 0 and iteration == 1:
                raise NoOverlapError(
                    "No query point projects onto valid reference pixels",
                    context={"moving": moving.id, "reference": reference.id},
                )

            keep = _select_correspondences(batch.distances, params)
            if keep.size < 3:
                raise TooFewCorrespondencesError(int(keep.size), iteration)

            candidates_history.append(float(batch.candidates.mean()))
            scanned_total += int(batch.candidates.sum())
            searched_total += len(batch)
            residual_history.append(float(np.sqrt(np.mean(batch.distances[keep] ** 2))))

            p = points[batch.query_index[keep]]
            q = batch.ref_points[keep]
            updated = estimate_rigid(p, q)

            previous_err = err
            residuals = np.linalg.norm(updated.apply(p) - q, axis=1)
            err = float(np.sqrt(np.mean(residuals ** 2)))
            n_correspondences = int(keep.size)
            delta = _pose_delta(pose, updated, centroid)
            pose = updated

            logger.debug(
                "ICP iteration %d: residual=%.6f err=%.6f mean_candidates=%.1f delta=%.3e",
                iteration, residual_history[-1], err, candidates_history[-1], delta,
                extra={"operation": "dsm_icp", "moving": moving.id, "reference": reference.id},
            )

            if delta < params.abs_tol:
                converged = True
            elif iteration > 1 and abs(previous_err - err) < params.rel_tol * previous_err:
                converged = True
            if converged:
                break
    finally:
        if own_executor is not None:
            own_executor.shutdown(wait=True)

    return RegistrationReport(
        transform=pose,
        err=err,
        iterations=iteration,
        n_correspondences=n_correspondences,
        converged=converged,
        mean_candidates_scanned=scanned_total / max(searched_total, 1),
        residual_history=residual_history,
        candidates_history=candidates_history,
        correspondence_seconds=correspondence_seconds,
    )
