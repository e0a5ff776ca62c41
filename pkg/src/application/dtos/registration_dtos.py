"""
Data transfer objects for the JSON files exchanged between pipeline stages.
Each stage reads and writes only these contracts.
"""

from typing import ClassVar, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.scene_graph import SceneEdge, SceneGraph
from src.domain.entities.value_objects import (
    GlobalPoses,
    HeightProfile,
    MeanPairwiseResult,
    MetricResult,
    RegistrationReport,
)

Rotation = List[float]
Translation = List[float]


def _check_length(values: List[float], expected: int, name: str) -> List[float]:
    if len(values) != expected:
        raise ValueError(f'{name} must have {expected} entries, got {len(values)}')
    return values


class _StageModel(BaseModel):
    model_config: ClassVar[ConfigDict] = ConfigDict(extra='forbid', validate_assignment=True)


class PoseDTO(_StageModel):
    """Rigid pose: row-major rotation and translation in meters."""

    rotation: Rotation = Field(..., description="Row-major 3x3 rotation")
    translation: Translation = Field(..., description="Translation, meters")

    @field_validator('rotation')
    @classmethod
    def validate_rotation(cls, v: Rotation) -> Rotation:
        return _check_length(v, 9, 'rotation')

    @field_validator('translation')
    @classmethod
    def validate_translation(cls, v: Translation) -> Translation:
        return _check_length(v, 3, 'translation')

    def to_transform(self) -> RigidTransform:
        return RigidTransform.from_lists(self.rotation, self.translation)


class RegistrationReportDTO(PoseDTO):
    """Outcome of one pairwise registration (moving into reference)."""

    moving: Optional[str] = Field(None, description="Path of the moving raster")
    reference: Optional[str] = Field(None, description="Path of the reference raster")
    err: float = Field(..., ge=0)
    iterations: int = Field(..., ge=0)
    n_correspondences: int = Field(..., ge=0)
    converged: bool
    mean_candidates_scanned: float = Field(..., ge=0)
    residual_history: List[float] = Field(default_factory=list)
    candidates_history: List[float] = Field(default_factory=list)
    correspondence_seconds: List[float] = Field(default_factory=list)


class VertexDTO(_StageModel):
    id: int = Field(..., ge=0)
    path: Optional[str] = None


class EdgeDTO(PoseDTO):
    """Scene graph edge; the pose maps DSM ``j`` into the frame of DSM ``i``."""

    i: int = Field(..., ge=0)
    j: int = Field(..., ge=0)
    err: float = Field(..., ge=0)
    overlap: float = Field(..., ge=0, le=1)
    quality: float = Field(1.0, ge=0)
    weight: float = Field(1.0, ge=0)

    @model_validator(mode='after')
    def validate_order(self) -> 'EdgeDTO':
        if self.i >= self.j:
            raise ValueError(f'edge ({self.i}, {self.j}) must satisfy i < j')
        return self


class SceneGraphDTO(_StageModel):
    vertices: List[VertexDTO]
    edges: List[EdgeDTO]


class IdentifiedPoseDTO(PoseDTO):
    id: int = Field(..., ge=0)


class GlobalPosesDTO(_StageModel):
    """Global poses mapping each DSM frame into the anchor's frame."""

    anchor: int = Field(..., ge=0)
    poses: List[IdentifiedPoseDTO]
    objective: float = Field(0.0, ge=0)
    solver: str = Field("average", pattern=r'^(average|greedy)$')

    @model_validator(mode='after')
    def validate_ids(self) -> 'GlobalPosesDTO':
        if sorted(pose.id for pose in self.poses) != list(range(len(self.poses))):
            raise ValueError('pose ids must be 0..N-1')
        return self


class PairMetricDTO(_StageModel):
    i: int
    j: int
    rmse_tau: float
    inlier_ratio: float
    tree_hops: Optional[int] = None


class ProfileDTO(_StageModel):
    distances: List[float]
    xs: List[float]
    ys: List[float]
    heights: List[Optional[float]]


class MetricsSummaryDTO(_StageModel):
    """
    Evaluation summary.

    ``rmse_tau`` / ``inlier_ratio`` describe the fused-vs-reference comparison
    when a reference is given, otherwise the mean over posed pairs.
    """

    tau: float
    rmse_tau: float
    inlier_ratio: float
    n_pairs: int = 0
    n_inliers: int = 0
    n_pairs_excluded: int = 0
    mean_pairwise_rmse_tau: Optional[float] = None
    pairs: List[PairMetricDTO] = Field(default_factory=list)
    excluded_pairs: List[Tuple[int, int]] = Field(default_factory=list)
    alignment: Optional[RegistrationReportDTO] = None
    profile: Optional[ProfileDTO] = None


class FuseResultDTO(_StageModel):
    """Files written by a fusion run and the fused lattice."""

    fused: str
    contributors: str
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    gsd: float = Field(..., gt=0)
    n_inputs: int = Field(..., ge=1)
    covered_fraction: float = Field(..., ge=0, le=1)


class TileDTO(_StageModel):
    id: int = Field(..., ge=0)
    path: str


class GroundTruthDTO(_StageModel):
    """Synthetic scene: tile files with their true poses (tile 0 is the gauge)."""

    tiles: List[TileDTO]
    poses: List[IdentifiedPoseDTO]
    truth: str
    seed: int


def pose_to_dto(pose: RigidTransform, pose_id: int) -> IdentifiedPoseDTO:
    return IdentifiedPoseDTO(id=pose_id, rotation=pose.rotation_list(), translation=pose.translation_list())


def report_to_dto(
    report: RegistrationReport,
    moving: Optional[str] = None,
    reference: Optional[str] = None
) -> RegistrationReportDTO:
    return RegistrationReportDTO(
        moving=moving,
        reference=reference,
        rotation=report.transform.rotation_list(),
        translation=report.transform.translation_list(),
        err=report.err,
        iterations=report.iterations,
        n_correspondences=report.n_correspondences,
        converged=report.converged,
        mean_candidates_scanned=report.mean_candidates_scanned,
        residual_history=list(report.residual_history),
        candidates_history=list(report.candidates_history),
        correspondence_seconds=list(report.correspondence_seconds),
    )


def graph_to_dto(graph: SceneGraph) -> SceneGraphDTO:
    return SceneGraphDTO(
        vertices=[VertexDTO(id=vertex, path=graph.paths.get(vertex)) for vertex in graph.vertices],
        edges=[
            EdgeDTO(
                i=edge.i,
                j=edge.j,
                rotation=edge.relative.rotation_list(),
                translation=edge.relative.translation_list(),
                err=edge.err,
                overlap=edge.overlap,
                quality=edge.quality,
                weight=edge.weight,
            )
            for edge in graph.edges
        ],
    )


def dto_to_graph(dto: SceneGraphDTO) -> SceneGraph:
    return SceneGraph(
        vertices=sorted(vertex.id for vertex in dto.vertices),
        edges=[
            SceneEdge(
                i=edge.i,
                j=edge.j,
                relative=edge.to_transform(),
                err=edge.err,
                overlap=edge.overlap,
                quality=edge.quality,
                weight=edge.weight,
            )
            for edge in dto.edges
        ],
        paths={vertex.id: vertex.path for vertex in dto.vertices if vertex.path},
    )


def poses_to_dto(poses: GlobalPoses) -> GlobalPosesDTO:
    return GlobalPosesDTO(
        anchor=poses.anchor,
        poses=[pose_to_dto(pose, index) for index, pose in enumerate(poses.poses)],
        objective=poses.objective,
        solver=poses.solver,
    )


def dto_to_poses(dto: GlobalPosesDTO) -> GlobalPoses:
    ordered = sorted(dto.poses, key=lambda pose: pose.id)
    return GlobalPoses(
        poses=[pose.to_transform() for pose in ordered],
        anchor=dto.anchor,
        objective=dto.objective,
        solver=dto.solver,
    )


def _optional_floats(values: Iterable[float]) -> List[Optional[float]]:
    return [float(value) if value == value else None for value in values]


def profile_to_dto(profile: HeightProfile) -> ProfileDTO:
    return ProfileDTO(
        distances=[float(d) for d in profile.distances],
        xs=[float(x) for x in profile.xs],
        ys=[float(y) for y in profile.ys],
        heights=_optional_floats(profile.heights),
    )


def metrics_to_dto(
    tau: float,
    summary: Optional[MetricResult] = None,
    pairwise: Optional[MeanPairwiseResult] = None
) -> MetricsSummaryDTO:
    """Summary from a reference comparison, from posed pairs, or both."""
    pairs = [
        PairMetricDTO(i=p.i, j=p.j, rmse_tau=p.rmse_tau, inlier_ratio=p.inlier_ratio, tree_hops=p.tree_hops)
        for p in (pairwise.pairs if pairwise else [])
    ]
    if summary is not None:
        rmse, ratio = summary.rmse_tau, summary.inlier_ratio
        n_pairs, n_inliers = summary.n_pairs, summary.n_inliers
    else:
        rmse = pairwise.mean_rmse_tau
        ratio = sum(p.inlier_ratio for p in pairwise.pairs) / len(pairwise.pairs)
        n_pairs, n_inliers = len(pairwise.pairs), 0
    return MetricsSummaryDTO(
        tau=tau,
        rmse_tau=rmse,
        inlier_ratio=ratio,
        n_pairs=n_pairs,
        n_inliers=n_inliers,
        n_pairs_excluded=pairwise.n_pairs_excluded if pairwise else 0,
        mean_pairwise_rmse_tau=pairwise.mean_rmse_tau if pairwise else None,
        pairs=pairs,
        excluded_pairs=list(pairwise.excluded_pairs) if pairwise else [],
    )
