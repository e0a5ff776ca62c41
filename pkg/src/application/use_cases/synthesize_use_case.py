"""
Use case for generating a synthetic tile mosaic with known poses.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from src.application.dtos.registration_dtos import GroundTruthDTO, TileDTO, pose_to_dto
from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.domain.services.terrain import MosaicSpec, synthesize


@dataclass(frozen=True)
class SynthesizeRequest:
    spec: MosaicSpec
    out_dir: Path
    fmt: Optional[str] = None


class SynthesizeUseCase(SyncBaseUseCase[SynthesizeRequest, GroundTruthDTO]):
    """Writes ``tile_XX`` rasters and the ``truth`` raster; identical specs give identical files."""

    operation = "synthesize"

    def __init__(self, raster_repository: RasterRepository) -> None:
        super().__init__()
        self._raster_repository = raster_repository

    def _execute(self, request: SynthesizeRequest) -> UseCaseResult[GroundTruthDTO]:
        scene = synthesize(request.spec)
        extension = self._raster_repository.extension(request.fmt)
        out_dir = Path(request.out_dir)

        tiles = []
        for tile in scene.tiles:
            path = str(out_dir / f"tile_{tile.id:02d}{extension}")
            self._raster_repository.write(tile, path, request.fmt)
            tiles.append(TileDTO(id=tile.id, path=path))
        truth_path = str(out_dir / f"truth{extension}")
        self._raster_repository.write(scene.truth, truth_path, request.fmt)

        return UseCaseResult.success_result(
            data=GroundTruthDTO(
                tiles=tiles,
                poses=[pose_to_dto(pose, index) for index, pose in enumerate(scene.poses)],
                truth=truth_path,
                seed=request.spec.seed,
            ),
            message="Synthetic scene written",
            metadata={"n_tiles": len(tiles)},
        )
