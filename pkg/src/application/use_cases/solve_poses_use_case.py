"""
Use case for solving global poses from a scene graph.
"""

from dataclasses import dataclass
from typing import Optional

from src.application.dtos.registration_dtos import GlobalPosesDTO, SceneGraphDTO, dto_to_graph, poses_to_dto
from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.domain.services.motion_averaging import greedy_mst_solve, motion_average

SOLVERS = {
    "average": motion_average,
    "greedy": greedy_mst_solve,
}


@dataclass(frozen=True)
class SolvePosesRequest:
    graph: SceneGraphDTO
    solver: str = "average"
    anchor: int = 0


class SolvePosesUseCase(SyncBaseUseCase[SolvePosesRequest, GlobalPosesDTO]):
    """Motion averaging or the greedy spanning-tree baseline, gauge-fixed at the anchor."""

    operation = "solve_poses"

    def validate_request(self, request: SolvePosesRequest) -> Optional[str]:
        if request.solver not in SOLVERS:
            return f"Unknown solver '{request.solver}'; expected one of {sorted(SOLVERS)}"
        if not 0 <= request.anchor < len(request.graph.vertices):
            return f"Anchor {request.anchor} is not a vertex"
        return None

    def _execute(self, request: SolvePosesRequest) -> UseCaseResult[GlobalPosesDTO]:
        graph = dto_to_graph(request.graph)
        poses = SOLVERS[request.solver](graph, request.anchor)
        return UseCaseResult.success_result(
            data=poses_to_dto(poses),
            message="Global poses solved",
            metadata={"solver": poses.solver, "objective": poses.objective},
        )
