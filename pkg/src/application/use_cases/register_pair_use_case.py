"""
Use case for registering one DSM onto another with DSM-ICP.
"""

from dataclasses import dataclass, field
from typing import Optional

from src.application.dtos.registration_dtos import RegistrationReportDTO, report_to_dto
from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.value_objects import IcpParams
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.domain.services.icp import dsm_icp


@dataclass(frozen=True)
class RegisterPairRequest:
    """Moving raster registered onto the reference raster."""
    moving_path: str
    reference_path: str
    params: IcpParams = field(default_factory=IcpParams)
    init: Optional[RigidTransform] = None


class RegisterPairUseCase(SyncBaseUseCase[RegisterPairRequest, RegistrationReportDTO]):
    """
    Loads both rasters lazily and runs DSM-ICP.

    The report's transform maps moving-raster points into the reference frame.
    """

    operation = "register_pair"

    def __init__(self, raster_repository: RasterRepository) -> None:
        super().__init__()
        self._raster_repository = raster_repository

    def validate_request(self, request: RegisterPairRequest) -> Optional[str]:
        if not request.moving_path or not request.reference_path:
            return "Both a moving and a reference raster are required"
        return None

    def _execute(self, request: RegisterPairRequest) -> UseCaseResult[RegistrationReportDTO]:
        moving = self._raster_repository.load(request.moving_path, grid_id=1)
        reference = self._raster_repository.load(request.reference_path, grid_id=0)

        report = dsm_icp(moving, reference, request.params, init=request.init)

        return UseCaseResult.success_result(
            data=report_to_dto(report, request.moving_path, request.reference_path),
            message="Registration finished",
            metadata={
                "iterations": report.iterations,
                "err": report.err,
                "converged": report.converged,
            },
        )
