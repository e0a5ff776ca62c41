"""
RMSE_tau evaluation of co-located rasters.

Differences with |d| >= tau are outliers. The RMS is taken over inliers only
(divided by the inlier count); the inlier ratio is reported alongside.
"""

from itertools import combinations
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.dsm_grid import DsmGrid
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.scene_graph import SceneEdge
from src.domain.entities.value_objects import MeanPairwiseResult, MetricConfig, MetricResult, PairMetric
from src.domain.exceptions import (
    InvalidInputError,
    NoInliersError,
    NoOverlapError,
    NoOverlappingPairsError,
)
from src.domain.services.motion_averaging import hop_distances
from src.domain.services.resampling import (
    DEFAULT_RESAMPLE_ITERATIONS,
    posed_footprint,
    posed_height,
    start_height,
)


def _pair_differences(
    a: DsmGrid,
    pose_a: RigidTransform,
    b: DsmGrid,
    pose_b: RigidTransform,
    cfg: MetricConfig,
    band_rows: int
) -> Iterator[np.ndarray]:
    """Height differences (posed a minus posed b) at a's valid pixel points."""
    initial = start_height(b, pose_b)
    for band in a.iter_row_bands(band_rows):
        if not band.n_valid:
            continue
        uu, vv = band.pixel_grid()
        xs, ys = a.geotransform.uv_to_world(uu[band.mask].astype(np.float64), vv[band.mask].astype(np.float64))
        points = pose_a.apply(np.column_stack([xs, ys, band.heights[band.mask]]))
        other = posed_height(
            b, pose_b, points[:, 0], points[:, 1],
            iterations=DEFAULT_RESAMPLE_ITERATIONS, mode=cfg.sampling, initial_height=initial,
        )
        both = np.isfinite(other)
        if np.any(both):
            yield points[both, 2] - other[both]


def _summarize(chunks: Iterator[np.ndarray], tau: float) -> MetricResult:
    n_pairs = 0
    n_inliers = 0
    squared_sum = 0.0
    for differences in chunks:
        inliers = differences[np.abs(differences) < tau]
        n_pairs += differences.size
        n_inliers += inliers.size
        squared_sum += float(np.dot(inliers, inliers))
    if n_pairs == 0:
        raise NoOverlapError("Rasters share no valid co-located pixels")
    if n_inliers == 0:
        raise NoInliersError(tau, n_pairs)
    return MetricResult(
        rmse_tau=float(np.sqrt(squared_sum / n_inliers)),
        inlier_ratio=n_inliers / n_pairs,
        n_pairs=n_pairs,
        n_inliers=n_inliers,
    )


def rmse_tau(
    a: DsmGrid,
    b: DsmGrid,
    cfg: Optional[MetricConfig] = None,
    pose_a: Optional[RigidTransform] = None,
    pose_b: Optional[RigidTransform] = None,
    band_rows: int = 256
) -> MetricResult:
    """
    RMSE_tau of ``a`` against ``b``: a's valid pixel centers are sampled in b.

    Raises:
        NoOverlapError: no co-located valid pixel pair exists
        NoInliersError: every difference is an outlier
    """
    cfg = cfg or MetricConfig()
    pose_a = pose_a or RigidTransform.identity()
    pose_b = pose_b or RigidTransform.identity()
    return _summarize(_pair_differences(a, pose_a, b, pose_b, cfg, band_rows), cfg.tau)


def _boxes_intersect(first: Tuple[float, float, float, float], second: Tuple[float, float, float, float]) -> bool:
    return first[0] <= second[1] and second[0] <= first[1] and first[2] <= second[3] and second[2] <= first[3]


def mean_pairwise_rmse(
    dsms: Sequence[DsmGrid],
    poses: Sequence[RigidTransform],
    cfg: Optional[MetricConfig] = None,
    tree: Optional[Sequence[SceneEdge]] = None
) -> MeanPairwiseResult:
    """
    Mean RMSE_tau over every posed pair that overlaps.

    Pairs without inliers are excluded and listed. With ``tree`` given, each
    pair is annotated with its hop count along that tree.

    Raises:
        NoOverlappingPairsError: no pair contributes a value
    """
    cfg = cfg or MetricConfig()
    if len(dsms) != len(poses):
        raise InvalidInputError("One pose per DSM is required", field="poses", value=len(poses))

    boxes = [posed_footprint(dsm, pose) for dsm, pose in zip(dsms, poses)]
    hops = [hop_distances(tree, len(dsms), source) for source in range(len(dsms))] if tree is not None else None

    pairs: List[PairMetric] = []
    excluded: List[Tuple[int, int]] = []
    for i, j in combinations(range(len(dsms)), 2):
        if not _boxes_intersect(boxes[i], boxes[j]):
            continue
        try:
            result = rmse_tau(dsms[i], dsms[j], cfg, poses[i], poses[j])
        except NoOverlapError:
            continue
        except NoInliersError:
            excluded.append((i, j))
            continue
        pairs.append(PairMetric(
            i=i,
            j=j,
            rmse_tau=result.rmse_tau,
            inlier_ratio=result.inlier_ratio,
            tree_hops=hops[i][j] if hops is not None else None,
        ))

    if not pairs:
        raise NoOverlappingPairsError(len(dsms))
    return MeanPairwiseResult(
        mean_rmse_tau=float(np.mean([pair.rmse_tau for pair in pairs])),
        pairs=pairs,
        excluded_pairs=excluded,
    )
