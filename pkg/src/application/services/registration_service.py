"""
Registration pipeline service.
Orchestrates the stage use cases behind a single interface for the drivers.
"""

from typing import TypeVar

from src.application.dtos.registration_dtos import (
    FuseResultDTO,
    GlobalPosesDTO,
    GroundTruthDTO,
    MetricsSummaryDTO,
    RegistrationReportDTO,
    SceneGraphDTO,
)
from src.application.use_cases.base import UseCaseResult
from src.application.use_cases.build_graph_use_case import BuildGraphRequest, BuildGraphUseCase
from src.application.use_cases.evaluate_use_case import EvaluateRequest, EvaluateUseCase
from src.application.use_cases.fuse_use_case import FuseRequest, FuseUseCase
from src.application.use_cases.register_pair_use_case import RegisterPairRequest, RegisterPairUseCase
from src.application.use_cases.solve_poses_use_case import SolvePosesRequest, SolvePosesUseCase
from src.application.use_cases.synthesize_use_case import SynthesizeRequest, SynthesizeUseCase
from src.domain.ports.inbound.services.registration_service_port import RegistrationServicePort
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository

T = TypeVar('T')


def _unwrap(result: UseCaseResult[T]) -> T:
    """Data of a successful result; the carried domain exception otherwise."""
    if not result.success:
        raise result.error
    return result.data


class RegistrationService(RegistrationServicePort):
    """
    Application service for the registration pipeline.

    Holds no logic of its own: each stage is delegated to its use case and
    failed results are raised back as their domain exceptions.
    """

    def __init__(self, raster_repository: RasterRepository) -> None:
        self._raster_repository = raster_repository

        self._register_pair_use_case = RegisterPairUseCase(raster_repository)
        self._build_graph_use_case = BuildGraphUseCase(raster_repository)
        self._solve_poses_use_case = SolvePosesUseCase()
        self._fuse_use_case = FuseUseCase(raster_repository)
        self._evaluate_use_case = EvaluateUseCase(raster_repository)
        self._synthesize_use_case = SynthesizeUseCase(raster_repository)

    def register_pair(self, request: RegisterPairRequest) -> RegistrationReportDTO:
        return _unwrap(self._register_pair_use_case.execute(request))

    def build_graph(self, request: BuildGraphRequest) -> SceneGraphDTO:
        return _unwrap(self._build_graph_use_case.execute(request))

    def solve_poses(self, request: SolvePosesRequest) -> GlobalPosesDTO:
        return _unwrap(self._solve_poses_use_case.execute(request))

    def fuse(self, request: FuseRequest) -> FuseResultDTO:
        return _unwrap(self._fuse_use_case.execute(request))

    def evaluate(self, request: EvaluateRequest) -> MetricsSummaryDTO:
        return _unwrap(self._evaluate_use_case.execute(request))

    def synthesize(self, request: SynthesizeRequest) -> GroundTruthDTO:
        return _unwrap(self._synthesize_use_case.execute(request))
