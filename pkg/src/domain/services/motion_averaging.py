"""
Global pose estimation from a weighted scene graph.

Convention: edge (i, j) stores T_ij mapping frame j into frame i, and the
global pose T_i maps frame i into the world (the anchor's frame). For exact
data T_ij = T_i^-1 T_j, i.e. R_ij = R_i^T R_j and t_ij = R_i^T (t_j - t_i).

Two solvers share that convention:

- ``motion_average``: closed-form rotation synchronization by chordal
  relaxation followed by a weighted linear least-squares translation solve;
- ``greedy_mst_solve``: chaining relative poses along a maximum-weight
  spanning tree.
"""

from collections import deque
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.sparse import coo_matrix, csc_matrix
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh, factorized

from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.scene_graph import SceneEdge, SceneGraph
from src.domain.entities.value_objects import GlobalPoses
from src.domain.exceptions import (
    DegenerateMatrixError,
    InvalidInputError,
    NumericalFailureError,
)

# Above this many vertices the eigenproblem is solved with sparse shift-invert.
DENSE_EIGEN_LIMIT: int = 100

RANK_TOLERANCE: float = 1e-12


def _check_anchor(graph: SceneGraph, anchor: int) -> None:
    if not 0 <= anchor < graph.n_vertices:
        raise InvalidInputError("Anchor is not a vertex", field="anchor", value=anchor)


def project_to_so3(matrix: np.ndarray) -> np.ndarray:
    """
    Nearest rotation to ``matrix`` in Frobenius norm.

    Raises:
        DegenerateMatrixError: if ``matrix`` has rank below 2
    """
    matrix = np.asarray(matrix, dtype=np.float64).reshape(3, 3)
    u, singular, vt = np.linalg.svd(matrix)
    if singular[0] == 0.0 or singular[1] <= RANK_TOLERANCE * singular[0]:
        raise DegenerateMatrixError(singular.tolist())
    sign = 1.0 if np.linalg.det(u @ vt) >= 0.0 else -1.0
    return u @ np.diag([1.0, 1.0, sign]) @ vt


def _connection_laplacian(graph: SceneGraph) -> csc_matrix:
    """Block Laplacian (D - W) over 3x3 blocks; for exact edges X_i = R_i^T spans its null space."""
    n = graph.n_vertices
    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []
    block_r, block_c = np.meshgrid(np.arange(3), np.arange(3), indexing="ij")
    diagonal = np.zeros(n)

    for edge in graph.edges:
        w = edge.weight
        r_ij = edge.relative.rotation
        for a, b, block in ((edge.i, edge.j, -w * r_ij), (edge.j, edge.i, -w * r_ij.T)):
            rows.append((3 * a + block_r).ravel())
            cols.append((3 * b + block_c).ravel())
            vals.append(block.ravel())
        diagonal[edge.i] += w
        diagonal[edge.j] += w

    index = np.arange(3 * n)
    rows.append(index)
    cols.append(index)
    vals.append(np.repeat(diagonal, 3))
    return coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(3 * n, 3 * n),
    ).tocsc()


def _bottom_eigenvectors(laplacian: csc_matrix) -> np.ndarray:
    size = laplacian.shape[0]
    if size <= 3 * DENSE_EIGEN_LIMIT:
        try:
            _, vectors = scipy.linalg.eigh(laplacian.toarray(), subset_by_index=[0, 2])
        except np.linalg.LinAlgError as error:
            raise NumericalFailureError("rotation eigendecomposition", cause=error) from error
        return vectors

    shift = 1e-3 * float(laplacian.diagonal().max())
    try:
        values, vectors = eigsh(laplacian, k=3, sigma=-shift, which="LM")
    except (ArpackNoConvergence, ArpackError, RuntimeError) as error:
        raise NumericalFailureError("rotation eigendecomposition", cause=error) from error
    return vectors[:, np.argsort(values)]


def rotation_average(graph: SceneGraph, anchor: int = 0) -> List[np.ndarray]:
    """
    Global rotations by spectral chordal relaxation, gauge-fixed at ``anchor``.

    Raises:
        DisconnectedGraphError: graph is not connected
        NumericalFailureError: the eigensolver fails
    """
    _check_anchor(graph, anchor)
    graph.ensure_connected()
    n = graph.n_vertices
    if n == 1:
        return [np.eye(3)]

    vectors = _bottom_eigenvectors(_connection_laplacian(graph))
    blocks = vectors.reshape(n, 3, 3)
    if sum(np.linalg.det(block) for block in blocks) < 0:
        blocks[:, :, 0] *= -1.0

    rotations = [project_to_so3(block).T for block in blocks]
    gauge = rotations[anchor].T
    rotations = [gauge @ rotation for rotation in rotations]
    rotations[anchor] = np.eye(3)
    return rotations


def translation_solve(graph: SceneGraph, rotations: Sequence[np.ndarray], anchor: int = 0) -> List[np.ndarray]:
    """
    Weighted least-squares translations for fixed rotations.

    Minimizes sum w_ij ||R_i t_ij + t_i - t_j||^2 with t_anchor = 0 through
    the sparse normal equations.

    Raises:
        DisconnectedGraphError: graph is not connected
        NumericalFailureError: the normal matrix is singular
    """
    _check_anchor(graph, anchor)
    graph.ensure_connected()
    n = graph.n_vertices
    if len(rotations) != n:
        raise InvalidInputError("One rotation per vertex is required", field="rotations", value=len(rotations))
    translations = [np.zeros(3) for _ in range(n)]
    if n == 1:
        return translations

    m = len(graph.edges)
    rows = np.empty(6 * m, dtype=np.int64)
    cols = np.empty(6 * m, dtype=np.int64)
    vals = np.empty(6 * m)
    rhs = np.empty(3 * m)
    weights = np.empty(3 * m)
    axis = np.arange(3)
    for k, edge in enumerate(graph.edges):
        span = slice(6 * k, 6 * k + 6)
        rows[span] = np.concatenate([3 * k + axis, 3 * k + axis])
        cols[span] = np.concatenate([3 * edge.j + axis, 3 * edge.i + axis])
        vals[span] = np.concatenate([np.ones(3), -np.ones(3)])
        rhs[3 * k:3 * k + 3] = np.asarray(rotations[edge.i]) @ edge.relative.translation
        weights[3 * k:3 * k + 3] = edge.weight

    design = coo_matrix((vals, (rows, cols)), shape=(3 * m, 3 * n)).tocsc()
    free = np.setdiff1d(np.arange(3 * n), 3 * anchor + axis)
    design = design[:, free]
    weighted_t = design.T.multiply(weights).tocsc()
    normal = (weighted_t @ design).tocsc()
    try:
        solve = factorized(normal)
        solution = solve(weighted_t @ rhs)
    except RuntimeError as error:
        raise NumericalFailureError("translation normal equations", cause=error) from error
    if not np.all(np.isfinite(solution)):
        raise NumericalFailureError("translation normal equations")

    stacked = np.zeros(3 * n)
    stacked[free] = solution
    return [stacked[3 * index:3 * index + 3].copy() for index in range(n)]


def objective(graph: SceneGraph, poses: Sequence[RigidTransform]) -> float:
    """Weighted consistency of global poses with every edge (rotation + translation terms)."""
    total = 0.0
    for edge in graph.edges:
        pose_i, pose_j = poses[edge.i], poses[edge.j]
        rotation_term = np.linalg.norm(edge.relative.rotation - pose_i.rotation.T @ pose_j.rotation) ** 2
        residual = pose_i.rotation @ edge.relative.translation + pose_i.translation - pose_j.translation
        total += edge.weight * (rotation_term + float(residual @ residual))
    return float(total)


def motion_average(graph: SceneGraph, anchor: int = 0) -> GlobalPoses:
    """Rotation averaging, then the translation solve; reports the final objective."""
    rotations = rotation_average(graph, anchor)
    translations = translation_solve(graph, rotations, anchor)
    poses = [RigidTransform(rotation, translation) for rotation, translation in zip(rotations, translations)]
    poses[anchor] = RigidTransform.identity()
    return GlobalPoses(poses=poses, anchor=anchor, objective=objective(graph, poses), solver="average")


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def root(self, node: int) -> int:
        while self.parent[node] != node:
            self.parent[node] = self.parent[self.parent[node]]
            node = self.parent[node]
        return node

    def join(self, a: int, b: int) -> bool:
        root_a, root_b = self.root(a), self.root(b)
        if root_a == root_b:
            return False
        self.parent[max(root_a, root_b)] = min(root_a, root_b)
        return True


def maximum_spanning_tree(graph: SceneGraph) -> List[SceneEdge]:
    """Kruskal on descending weight; ties go to the smaller (i, j)."""
    graph.ensure_connected()
    forest = _UnionFind(graph.n_vertices)
    tree: List[SceneEdge] = []
    for edge in sorted(graph.edges, key=lambda e: (-e.weight, e.i, e.j)):
        if forest.join(edge.i, edge.j):
            tree.append(edge)
            if len(tree) == graph.n_vertices - 1:
                break
    return tree


def hop_distances(edges: Sequence[SceneEdge], n: int, source: int) -> List[Optional[int]]:
    """Breadth-first hop count from ``source``; None for unreachable vertices."""
    adjacency: Dict[int, List[int]] = {vertex: [] for vertex in range(n)}
    for edge in edges:
        adjacency[edge.i].append(edge.j)
        adjacency[edge.j].append(edge.i)
    hops: List[Optional[int]] = [None] * n
    hops[source] = 0
    queue = deque([source])
    while queue:
        vertex = queue.popleft()
        for neighbor in sorted(adjacency[vertex]):
            if hops[neighbor] is None:
                hops[neighbor] = hops[vertex] + 1
                queue.append(neighbor)
    return hops


def greedy_mst_solve(graph: SceneGraph, anchor: int = 0) -> GlobalPoses:
    """Compose relative poses outward from the anchor along the maximum-weight spanning tree."""
    _check_anchor(graph, anchor)
    tree = maximum_spanning_tree(graph)

    adjacency: Dict[int, List[SceneEdge]] = {vertex: [] for vertex in range(graph.n_vertices)}
    for edge in tree:
        adjacency[edge.i].append(edge)
        adjacency[edge.j].append(edge)

    poses: List[Optional[RigidTransform]] = [None] * graph.n_vertices
    poses[anchor] = RigidTransform.identity()
    queue = deque([anchor])
    while queue:
        vertex = queue.popleft()
        for edge in sorted(adjacency[vertex], key=lambda e: e.key):
            if edge.i == vertex and poses[edge.j] is None:
                poses[edge.j] = poses[vertex].compose(edge.relative)
                queue.append(edge.j)
            elif edge.j == vertex and poses[edge.i] is None:
                poses[edge.i] = poses[vertex].compose(edge.relative.inverse())
                queue.append(edge.i)

    return GlobalPoses(poses=poses, anchor=anchor, objective=objective(graph, poses), solver="greedy")
