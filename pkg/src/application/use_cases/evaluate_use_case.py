"""
Use case for evaluating registration quality with RMSE_tau.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from src.application.dtos.registration_dtos import (
    GlobalPosesDTO,
    MetricsSummaryDTO,
    SceneGraphDTO,
    dto_to_graph,
    metrics_to_dto,
    profile_to_dto,
    report_to_dto,
)
from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.application.use_cases.fuse_use_case import resolve_poses
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.value_objects import IcpParams, MetricConfig
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.domain.services.fusion import error_map, extract_profile
from src.domain.services.icp import dsm_icp
from src.domain.services.metrics import mean_pairwise_rmse, rmse_tau
from src.domain.services.motion_averaging import maximum_spanning_tree
from src.domain.services.resampling import apply_pose, is_identity


@dataclass(frozen=True)
class EvaluateRequest:
    """
    Inputs of an evaluation run.

    With ``reference_path`` the subject (``subject_path``, or the single input
    raster with its pose) is compared against the reference. With two or more
    inputs the posed pairwise mean is reported as well.
    """
    paths: List[str] = field(default_factory=list)
    poses: Optional[GlobalPosesDTO] = None
    subject_path: Optional[str] = None
    reference_path: Optional[str] = None
    cfg: MetricConfig = field(default_factory=MetricConfig)
    align_first: bool = False
    params: IcpParams = field(default_factory=IcpParams)
    error_map_path: Optional[str] = None
    profile: Optional[Tuple[float, float, float, float]] = None
    profile_samples: int = 200
    graph: Optional[SceneGraphDTO] = None
    fmt: Optional[str] = None


class EvaluateUseCase(SyncBaseUseCase[EvaluateRequest, MetricsSummaryDTO]):
    """Reference comparison, pairwise consistency, error map and height profile."""

    operation = "evaluate"

    def __init__(self, raster_repository: RasterRepository) -> None:
        super().__init__()
        self._raster_repository = raster_repository

    def validate_request(self, request: EvaluateRequest) -> Optional[str]:
        has_subject = request.subject_path is not None or len(request.paths) == 1
        if request.reference_path is None and len(request.paths) < 2:
            return "Evaluation needs a reference raster or at least two posed rasters"
        if request.reference_path is not None and not has_subject:
            return "Reference comparison needs a subject raster or exactly one input raster"
        if request.poses is not None and len(request.poses.poses) != len(request.paths):
            return f"Poses file has {len(request.poses.poses)} poses for {len(request.paths)} rasters"
        if (request.align_first or request.error_map_path) and request.reference_path is None:
            return "--align-first and --error-map need a reference raster"
        if request.profile is not None and not has_subject:
            return "A profile needs a subject raster or exactly one input raster"
        return None

    def _execute(self, request: EvaluateRequest) -> UseCaseResult[MetricsSummaryDTO]:
        dsms = [self._raster_repository.load(path, grid_id=index) for index, path in enumerate(request.paths)]
        poses = resolve_poses(request.poses, len(dsms))

        pairwise = None
        if len(dsms) >= 2:
            tree = maximum_spanning_tree(dto_to_graph(request.graph)) if request.graph else None
            pairwise = mean_pairwise_rmse(dsms, poses, request.cfg, tree)

        if request.subject_path is not None:
            subject, subject_pose = self._raster_repository.load(request.subject_path), RigidTransform.identity()
        elif len(dsms) == 1:
            subject, subject_pose = dsms[0], poses[0]
        else:
            subject, subject_pose = None, None

        summary = None
        alignment = None
        if request.reference_path is not None:
            reference = self._raster_repository.load(request.reference_path)
            if request.align_first:
                report = dsm_icp(subject, reference, request.params, init=subject_pose)
                subject_pose = report.transform
                alignment = report_to_dto(report, subject.path, reference.path)
            summary = rmse_tau(subject, reference, request.cfg, pose_a=subject_pose)
            if request.error_map_path:
                posed = subject if is_identity(subject_pose) else apply_pose(subject, subject_pose)
                differences, _ = error_map(posed, reference, request.cfg)
                self._raster_repository.write(differences, request.error_map_path, request.fmt)

        dto = metrics_to_dto(request.cfg.tau, summary, pairwise)
        if alignment is not None:
            dto.alignment = alignment
        if request.profile is not None:
            posed = subject if is_identity(subject_pose) else apply_pose(subject, subject_pose)
            x0, y0, x1, y1 = request.profile
            dto.profile = profile_to_dto(
                extract_profile(posed, (x0, y0), (x1, y1), request.profile_samples, request.cfg.sampling)
            )

        return UseCaseResult.success_result(
            data=dto,
            message="Evaluation finished",
            metadata={"rmse_tau": dto.rmse_tau, "n_pairs_excluded": dto.n_pairs_excluded},
        )
