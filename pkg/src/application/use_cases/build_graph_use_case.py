"""
Use case for building the weighted scene graph of a DSM collection.
"""

from dataclasses import dataclass, field
from typing import List, Optional

from src.application.dtos.registration_dtos import SceneGraphDTO, graph_to_dto
from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.domain.entities.value_objects import IcpParams
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.domain.services.scene_graph import DEFAULT_OVERLAP_THRESHOLD, build_graph


@dataclass(frozen=True)
class BuildGraphRequest:
    paths: List[str]
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
    params: IcpParams = field(default_factory=IcpParams)
    threads: int = 1


class BuildGraphUseCase(SyncBaseUseCase[BuildGraphRequest, SceneGraphDTO]):
    """Registers every overlapping pair; vertex ids follow the order of ``paths``."""

    operation = "build_graph"

    def __init__(self, raster_repository: RasterRepository) -> None:
        super().__init__()
        self._raster_repository = raster_repository

    def validate_request(self, request: BuildGraphRequest) -> Optional[str]:
        if len(set(request.paths)) != len(request.paths):
            return "Input rasters must be distinct"
        return None

    def _execute(self, request: BuildGraphRequest) -> UseCaseResult[SceneGraphDTO]:
        dsms = [
            self._raster_repository.load(path, grid_id=index)
            for index, path in enumerate(request.paths)
        ]
        graph = build_graph(dsms, request.overlap_threshold, request.params, request.threads)
        return UseCaseResult.success_result(
            data=graph_to_dto(graph),
            message="Scene graph built",
            metadata={"n_vertices": graph.n_vertices, "n_edges": len(graph.edges)},
        )
