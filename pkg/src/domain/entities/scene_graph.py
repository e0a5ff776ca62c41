"""Scene graph entity: DSMs as vertices, weighted relative poses as edges."""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from src.domain.entities.rigid_transform import RigidTransform
from src.domain.exceptions import DisconnectedGraphError, InvalidInputError


@dataclass(frozen=True)
class SceneEdge:
    """
    One registered DSM pair.

    ``relative`` maps points of DSM ``j`` into the frame of DSM ``i``
    (it is the result of registering moving=j onto reference=i).
    """

    i: int
    j: int
    relative: RigidTransform
    err: float
    overlap: float
    quality: float = 1.0
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.i < self.j:
            raise InvalidInputError("Edges are stored with i < j", context={"i": self.i, "j": self.j})
        if not 0.0 <= self.overlap <= 1.0:
            raise InvalidInputError("Overlap must lie in [0, 1]", field="overlap", value=self.overlap)
        if self.err < 0.0:
            raise InvalidInputError("Registration error must be non-negative", field="err", value=self.err)
        if self.weight < 0.0:
            raise InvalidInputError("Edge weight must be non-negative", field="weight", value=self.weight)

    @property
    def key(self) -> Tuple[int, int]:
        return self.i, self.j


@dataclass(frozen=True)
class SceneGraph:
    """
    Weighted scene graph.

    Attributes:
        vertices: DSM ids 0..N-1
        edges: unique canonical edges
        paths: optional source file per vertex id
    """

    vertices: List[int]
    edges: List[SceneEdge]
    paths: Dict[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if sorted(self.vertices) != list(range(len(self.vertices))):
            raise InvalidInputError("Vertex ids must be 0..N-1", field="vertices")
        seen = set()
        for edge in self.edges:
            if edge.key in seen:
                raise InvalidInputError("Duplicate edge", context={"edge": list(edge.key)})
            if edge.j >= len(self.vertices):
                raise InvalidInputError("Edge references unknown vertex", context={"edge": list(edge.key)})
            seen.add(edge.key)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def edge(self, i: int, j: int) -> Optional[SceneEdge]:
        key = (min(i, j), max(i, j))
        for candidate in self.edges:
            if candidate.key == key:
                return candidate
        return None

    def components(self) -> List[List[int]]:
        """Connected components as sorted vertex lists."""
        n = self.n_vertices
        if n == 0:
            return []
        rows = [edge.i for edge in self.edges]
        cols = [edge.j for edge in self.edges]
        adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, labels = connected_components(adjacency, directed=False)
        groups: Dict[int, List[int]] = {}
        for vertex, label in enumerate(labels):
            groups.setdefault(int(label), []).append(vertex)
        return sorted(groups.values())

    def ensure_connected(self) -> None:
        components = self.components()
        if len(components) > 1:
            raise DisconnectedGraphError(components)

    def with_edges(self, edges: List[SceneEdge]) -> "SceneGraph":
        return replace(self, edges=list(edges))

    def scaled_weights(self, factor: float) -> "SceneGraph":
        return self.with_edges([replace(edge, weight=edge.weight * factor) for edge in self.edges])
