from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.domain.entities.dsm_grid import DsmGrid, PixelRect
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.exceptions import InvalidInputError


@dataclass(frozen=True)
class SearchBound:
    """Value object for the nearest-neighbor upper bound of one query."""
    anchor_pixel: Tuple[int, int]
    anchor_height: float
    radius_d: float
    rect: PixelRect

    def __post_init__(self):
        if not self.radius_d >= 0.0:
            raise InvalidInputError("Search radius must be non-negative", field="radius_d", value=self.radius_d)

    @property
    def side_lengths(self) -> Tuple[int, int]:
        u_min, u_max, v_min, v_max = self.rect
        return u_max - u_min + 1, v_max - v_min + 1


@dataclass(frozen=True)
class NnResult:
    """Value object for an exact nearest-neighbor answer."""
    ref_point: Tuple[float, float, float]
    ref_pixel: Tuple[int, int]
    distance: float
    candidates_scanned: int


@dataclass(frozen=True)
class IcpParams:
    """Value object for DSM-ICP parameters."""
    n_queries: int = 2065
    max_iterations: int = 50
    rel_tol: float = 1e-6
    abs_tol: float = 1e-4
    trim_fraction: float = 0.1
    correspondence_reject: float = 10.0
    seed: int = 0
    max_ring_radius: int = 64
    threads: int = 1

    def __post_init__(self):
        if self.n_queries < 3:
            raise InvalidInputError("n_queries must be at least 3", field="n_queries", value=self.n_queries)
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be positive", field="max_iterations", value=self.max_iterations)
        for name in ("rel_tol", "abs_tol", "correspondence_reject"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive", field=name, value=getattr(self, name))
        if not 0.0 <= self.trim_fraction < 1.0:
            raise InvalidInputError("trim_fraction must lie in [0, 1)", field="trim_fraction", value=self.trim_fraction)
        if self.max_ring_radius < 1:
            raise InvalidInputError("max_ring_radius must be positive", field="max_ring_radius", value=self.max_ring_radius)
        if self.threads < 1:
            raise InvalidInputError("threads must be positive", field="threads", value=self.threads)


@dataclass(frozen=True)
class RegistrationReport:
    """Value object for the outcome of one pairwise DSM-ICP run."""
    transform: RigidTransform
    err: float
    iterations: int
    n_correspondences: int
    converged: bool
    mean_candidates_scanned: float
    residual_history: List[float] = field(default_factory=list)
    candidates_history: List[float] = field(default_factory=list)
    correspondence_seconds: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class GlobalPoses:
    """Value object for solved global poses, gauge-fixed at ``anchor``."""
    poses: List[RigidTransform]
    anchor: int
    objective: float = 0.0
    solver: str = "average"

    def __post_init__(self):
        if not 0 <= self.anchor < len(self.poses):
            raise InvalidInputError("Anchor is not a vertex", field="anchor", value=self.anchor)

    def __len__(self) -> int:
        return len(self.poses)


@dataclass(frozen=True)
class MetricConfig:
    """Value object for RMSE_tau evaluation settings."""
    tau: float = 10.0
    sampling: str = "bilinear"

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidInputError("tau must be positive", field="tau", value=self.tau)
        if self.sampling not in ("bilinear", "nearest"):
            raise InvalidInputError("sampling must be 'bilinear' or 'nearest'", field="sampling", value=self.sampling)


@dataclass(frozen=True)
class MetricResult:
    """Value object for one RMSE_tau evaluation."""
    rmse_tau: float
    inlier_ratio: float
    n_pairs: int
    n_inliers: int


@dataclass(frozen=True)
class PairMetric:
    """RMSE_tau of one posed DSM pair."""
    i: int
    j: int
    rmse_tau: float
    inlier_ratio: float
    tree_hops: Optional[int] = None


@dataclass(frozen=True)
class MeanPairwiseResult:
    """Mean RMSE_tau over all overlapping posed pairs."""
    mean_rmse_tau: float
    pairs: List[PairMetric]
    excluded_pairs: List[Tuple[int, int]]

    @property
    def n_pairs_excluded(self) -> int:
        return len(self.excluded_pairs)


@dataclass(frozen=True)
class FusedDsm:
    """Fused raster plus the per-pixel contributor count raster."""
    grid: DsmGrid
    contributors: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class HeightProfile:
    """Heights sampled along a straight segment; NaN marks nodata."""
    distances: np.ndarray = field(repr=False)
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    heights: np.ndarray = field(repr=False)
