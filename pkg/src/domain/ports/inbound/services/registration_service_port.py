"""
Inbound port for the registration pipeline.
Defines the stages external actors (the CLI, tests, other drivers) can run.
"""

from typing import Protocol

from src.application.dtos.registration_dtos import (
    FuseResultDTO,
    GlobalPosesDTO,
    GroundTruthDTO,
    MetricsSummaryDTO,
    RegistrationReportDTO,
    SceneGraphDTO,
)
from src.application.use_cases.build_graph_use_case import BuildGraphRequest
from src.application.use_cases.evaluate_use_case import EvaluateRequest
from src.application.use_cases.fuse_use_case import FuseRequest
from src.application.use_cases.register_pair_use_case import RegisterPairRequest
from src.application.use_cases.solve_poses_use_case import SolvePosesRequest
from src.application.use_cases.synthesize_use_case import SynthesizeRequest


class RegistrationServicePort(Protocol):
    """
    Protocol of the pipeline stages.

    Every method raises the domain exception that stopped the stage.
    """

    def register_pair(self, request: RegisterPairRequest) -> RegistrationReportDTO:
        """
        Register the moving raster onto the reference raster.

        Raises:
            NoOverlapError, TooFewCorrespondencesError: registration failed
            ParseError, RasterIOError: an input cannot be read
        """
        ...

    def build_graph(self, request: BuildGraphRequest) -> SceneGraphDTO:
        """
        Register every overlapping pair into a weighted scene graph.

        Raises:
            DisconnectedGraphError: surviving edges leave the graph disconnected
            NotEnoughDsmsError: fewer than two rasters
        """
        ...

    def solve_poses(self, request: SolvePosesRequest) -> GlobalPosesDTO:
        """
        Global poses from a scene graph.

        Raises:
            DisconnectedGraphError: the graph is disconnected
        """
        ...

    def fuse(self, request: FuseRequest) -> FuseResultDTO:
        """Fuse posed rasters and write the fused and contributor rasters."""
        ...

    def evaluate(self, request: EvaluateRequest) -> MetricsSummaryDTO:
        """
        RMSE_tau summaries.

        Raises:
            NoOverlapError, NoInliersError, NoOverlappingPairsError: nothing to measure
        """
        ...

    def synthesize(self, request: SynthesizeRequest) -> GroundTruthDTO:
        """Write a synthetic mosaic and return its ground truth."""
        ...
