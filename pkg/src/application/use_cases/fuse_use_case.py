"""
Use case for fusing posed DSMs into one raster.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.application.dtos.registration_dtos import FuseResultDTO, GlobalPosesDTO, dto_to_poses
from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.domain.entities.dsm_grid import DsmGrid
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.domain.services.fusion import fuse
from src.domain.services.resampling import DEFAULT_RESAMPLE_ITERATIONS

# Contributor rasters keep 0 as a real count.
CONTRIBUTORS_NODATA: float = -1.0


@dataclass(frozen=True)
class FuseRequest:
    paths: List[str]
    output_path: str
    contributors_path: str
    poses: Optional[GlobalPosesDTO] = None
    target_gsd: Optional[float] = None
    iterations: int = DEFAULT_RESAMPLE_ITERATIONS
    fmt: Optional[str] = None
    band_rows: int = 256


def resolve_poses(poses: Optional[GlobalPosesDTO], count: int) -> List[RigidTransform]:
    """Poses of a poses file, or identities when none is given."""
    if poses is None:
        return [RigidTransform.identity() for _ in range(count)]
    return dto_to_poses(poses).poses


class FuseUseCase(SyncBaseUseCase[FuseRequest, FuseResultDTO]):
    """
    Per-pixel median of every posed DSM on a common north-up lattice.

    Writes the fused raster and the contributor-count raster.
    """

    operation = "fuse"

    def __init__(self, raster_repository: RasterRepository) -> None:
        super().__init__()
        self._raster_repository = raster_repository

    def validate_request(self, request: FuseRequest) -> Optional[str]:
        if not request.paths:
            return "At least one raster is required"
        if request.poses is not None and len(request.poses.poses) != len(request.paths):
            return f"Poses file has {len(request.poses.poses)} poses for {len(request.paths)} rasters"
        return None

    def _execute(self, request: FuseRequest) -> UseCaseResult[FuseResultDTO]:
        dsms = [self._raster_repository.load(path, grid_id=index) for index, path in enumerate(request.paths)]
        poses = resolve_poses(request.poses, len(dsms))

        fused = fuse(dsms, poses, request.target_gsd, request.iterations, request.band_rows)
        grid = fused.grid
        self._raster_repository.write(grid, request.output_path, request.fmt)
        counts = DsmGrid.from_array(
            fused.contributors.astype(np.float64), grid.geotransform, nodata=CONTRIBUTORS_NODATA,
        )
        self._raster_repository.write(counts, request.contributors_path, request.fmt)

        covered = float(np.count_nonzero(fused.contributors)) / fused.contributors.size
        return UseCaseResult.success_result(
            data=FuseResultDTO(
                fused=request.output_path,
                contributors=request.contributors_path,
                width=grid.width,
                height=grid.height,
                gsd=grid.geotransform.gsd,
                n_inputs=len(dsms),
                covered_fraction=covered,
            ),
            message="Fusion finished",
            metadata={"width": grid.width, "height": grid.height, "covered_fraction": covered},
        )
