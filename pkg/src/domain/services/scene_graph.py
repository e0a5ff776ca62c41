"""
Scene-graph construction: overlap scoring, pairwise DSM-ICP and edge weighting.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from src.domain.entities.dsm_grid import DsmGrid, read_window
from src.domain.entities.scene_graph import SceneEdge, SceneGraph
from src.domain.entities.value_objects import IcpParams
from src.domain.exceptions import (
    AllNodataError,
    DegenerateGeometryError,
    NoOverlapError,
    NotEnoughDsmsError,
    OutOfBoundsError,
    TooFewCorrespondencesError,
)
from src.domain.services.icp import dsm_icp

logger = logging.getLogger(__name__)

DEFAULT_OVERLAP_THRESHOLD: float = 0.05
DECIMATE_ABOVE_PIXELS: int = 10_000_000
DECIMATION_STEP: int = 4

# Failures that make a pair unreliable; the pair is skipped, not fatal.
_EDGE_FAILURES = (TooFewCorrespondencesError, NoOverlapError, AllNodataError, DegenerateGeometryError)


def _lattice_step(a: DsmGrid, b: DsmGrid) -> int:
    if max(a.width * a.height, b.width * b.height) > DECIMATE_ABOVE_PIXELS:
        return DECIMATION_STEP
    return 1


def _count_projected(
    source: DsmGrid,
    target: DsmGrid,
    step: int,
    band_rows: int
) -> Tuple[int, int]:
    """Valid lattice pixels of ``source`` and how many land on valid ``target`` pixels."""
    n_valid = 0
    n_overlap = 0
    for band in source.iter_row_bands(band_rows):
        uu, vv = band.pixel_grid()
        lattice = (uu % step == 0) & (vv % step == 0)
        selected = band.mask & lattice
        count = int(np.count_nonzero(selected))
        if count == 0:
            continue
        n_valid += count

        xs, ys = source.geotransform.uv_to_world(uu[selected].astype(np.float64), vv[selected].astype(np.float64))
        tu, tv = target.geotransform.world_to_uv(xs, ys)
        tu = np.floor(tu + 0.5).astype(np.int64)
        tv = np.floor(tv + 0.5).astype(np.int64)
        inside = (tu >= 0) & (tu < target.width) & (tv >= 0) & (tv < target.height)
        if not np.any(inside):
            continue
        tu, tv = tu[inside], tv[inside]
        try:
            window = read_window(target, (int(tu.min()), int(tu.max()), int(tv.min()), int(tv.max())))
        except OutOfBoundsError:
            continue
        n_overlap += int(np.count_nonzero(window.mask[tv - window.v_min, tu - window.u_min]))
    return n_valid, n_overlap


def overlap_score(a: DsmGrid, b: DsmGrid, band_rows: int = 256) -> float:
    """
    Fraction of valid pixels shared by two rasters, in [0, 1].

    Pixels are matched by projecting pixel centers through world coordinates
    to the nearest pixel of the other raster. Each raster's shared count is
    taken on its own lattice and divided by its own valid count; the larger
    fraction is the score. At equal GSD this is the shared count over the
    smaller valid count, and a raster nested inside a coarser or finer one
    scores 1.
    """
    step = _lattice_step(a, b)
    valid_a, a_on_b = _count_projected(a, b, step, band_rows)
    valid_b, b_on_a = _count_projected(b, a, step, band_rows)
    if valid_a == 0 or valid_b == 0:
        return 0.0
    return min(1.0, max(a_on_b / valid_a, b_on_a / valid_b))


def assign_weights(graph: SceneGraph) -> SceneGraph:
    """
    Edge quality by a softmax of negative registration errors over all edges.

    weight = overlap * quality, rescaled so the largest weight is 1.
    """
    if not graph.edges:
        return graph
    errors = np.array([edge.err for edge in graph.edges], dtype=np.float64)
    quality = softmax(-errors)
    overlap = np.array([edge.overlap for edge in graph.edges], dtype=np.float64)
    weights = overlap * quality
    peak = weights.max()
    if peak > 0:
        weights = weights / peak
    return graph.with_edges([
        replace(edge, quality=float(r), weight=float(w))
        for edge, r, w in zip(graph.edges, quality, weights)
    ])


def _register_pair(
    dsms: Sequence[DsmGrid],
    i: int,
    j: int,
    overlap: float,
    params: IcpParams
) -> Optional[SceneEdge]:
    try:
        report = dsm_icp(moving=dsms[j], reference=dsms[i], params=params)
    except _EDGE_FAILURES as error:
        logger.warning(
            "Skipping pair (%d, %d): %s",
            i, j, error.message,
            extra={"operation": "build_graph", "error_code": error.error_code.value},
        )
        return None
    return SceneEdge(i=i, j=j, relative=report.transform, err=report.err, overlap=overlap)


def build_graph(
    dsms: Sequence[DsmGrid],
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    icp_params: Optional[IcpParams] = None,
    threads: int = 1
) -> SceneGraph:
    """
    Register every sufficiently overlapping pair and assemble the weighted graph.

    Vertex ids are list positions. Edge (i, j) holds the pose mapping DSM j
    into the frame of DSM i.

    Raises:
        NotEnoughDsmsError: fewer than two rasters
        DisconnectedGraphError: the surviving edges leave the graph disconnected
    """
    if len(dsms) < 2:
        raise NotEnoughDsmsError(len(dsms))
    dsms = [dsm if dsm.id == index else dsm.with_id(index) for index, dsm in enumerate(dsms)]
    params = icp_params or IcpParams()

    candidates: List[Tuple[int, int, float]] = []
    for i, j in combinations(range(len(dsms)), 2):
        score = overlap_score(dsms[i], dsms[j])
        logger.debug("Overlap (%d, %d) = %.4f", i, j, score, extra={"operation": "build_graph"})
        if score > overlap_threshold:
            candidates.append((i, j, score))

    if threads > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(_register_pair, dsms, i, j, s, params) for i, j, s in candidates]
            edges = [future.result() for future in futures]
    else:
        edges = [_register_pair(dsms, i, j, s, params) for i, j, s in candidates]

    graph = SceneGraph(
        vertices=list(range(len(dsms))),
        edges=[edge for edge in edges if edge is not None],
        paths={dsm.id: dsm.path for dsm in dsms if dsm.path},
    )
    graph.ensure_connected()
    return assign_weights(graph)
