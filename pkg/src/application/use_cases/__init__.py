"""
Pipeline stage use cases.
Each stage of the registration pipeline is one use case.
"""

from src.application.use_cases.base import SyncBaseUseCase, UseCaseResult
from src.application.use_cases.build_graph_use_case import BuildGraphRequest, BuildGraphUseCase
from src.application.use_cases.evaluate_use_case import EvaluateRequest, EvaluateUseCase
from src.application.use_cases.fuse_use_case import FuseRequest, FuseUseCase
from src.application.use_cases.register_pair_use_case import RegisterPairRequest, RegisterPairUseCase
from src.application.use_cases.solve_poses_use_case import SolvePosesRequest, SolvePosesUseCase
from src.application.use_cases.synthesize_use_case import SynthesizeRequest, SynthesizeUseCase

__all__ = [
    # Base classes
    'SyncBaseUseCase',
    'UseCaseResult',

    # Stage use cases
    'RegisterPairUseCase',
    'BuildGraphUseCase',
    'SolvePosesUseCase',
    'FuseUseCase',
    'EvaluateUseCase',
    'SynthesizeUseCase',

    # Requests
    'RegisterPairRequest',
    'BuildGraphRequest',
    'SolvePosesRequest',
    'FuseRequest',
    'EvaluateRequest',
    'SynthesizeRequest',
]
