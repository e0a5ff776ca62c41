"""
Synthetic test scenes: diamond-square terrain cut into perturbed, overlapping tiles.

Tile k carries a ground-truth pose T_k mapping its own frame into the world
frame; tile 0 is never perturbed and fixes the gauge. T_k rotates about the
tile center at the tile's mean height. Tile heights are the
world surface resampled through T_k^-1, so registration should recover T_k.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from src.domain.entities.dsm_grid import DEFAULT_NODATA, DsmGrid
from src.domain.entities.geotransform import GeoTransform
from src.domain.entities.rigid_transform import RigidTransform
from src.domain.exceptions import InvalidInputError
from src.domain.services.resampling import apply_pose

# RMS gradient of generated terrain, m/m. Integer-pixel ICP recovers
# sub-pixel shifts only where the gradient is near 1 or steeper.
DEFAULT_SLOPE: float = 2.5


def diamond_square(exponent: int, amplitude: float = 1.0, roughness: float = 0.5, seed: int = 0) -> np.ndarray:
    """
    Fractal heightmap of shape (2**exponent + 1, 2**exponent + 1).

    Each level halves the step and multiplies the random displacement range
    by ``roughness``; lower roughness gives smoother terrain.
    """
    if exponent < 1:
        raise InvalidInputError("exponent must be at least 1", field="exponent", value=exponent)
    size = 2 ** exponent + 1
    rng = np.random.default_rng(seed)
    heights = np.zeros((size, size))
    heights[::size - 1, ::size - 1] = rng.uniform(-amplitude, amplitude, (2, 2))

    step = size - 1
    scale = amplitude
    while step > 1:
        half = step // 2
        # square step
        centers = (
            heights[0:size - 1:step, 0:size - 1:step]
            + heights[0:size - 1:step, step::step]
            + heights[step::step, 0:size - 1:step]
            + heights[step::step, step::step]
        ) / 4.0
        heights[half::step, half::step] = centers + rng.uniform(-scale, scale, centers.shape)

        # diamond step
        padded = np.pad(heights, half, mode="constant", constant_values=np.nan)
        for row_start, col_start in ((0, half), (half, 0)):
            rr, cc = np.meshgrid(
                np.arange(row_start, size, step),
                np.arange(col_start, size, step),
                indexing="ij",
            )
            neighbors = np.stack([
                padded[rr, cc + half],
                padded[rr + 2 * half, cc + half],
                padded[rr + half, cc],
                padded[rr + half, cc + 2 * half],
            ])
            heights[rr, cc] = np.nanmean(neighbors, axis=0) + rng.uniform(-scale, scale, rr.shape)

        scale *= roughness
        step = half
    return heights


@dataclass(frozen=True)
class MosaicSpec:
    """
    Layout and perturbation ranges of a synthetic tile mosaic.

    Attributes:
        rows, cols: tile grid
        tile_size: tile width and height, pixels
        overlap: fraction of a tile shared with each rook neighbor
        gsd: meters per pixel
        amplitude: diamond-square displacement range, meters
        roughness: diamond-square roughness in (0, 1)
        slope: RMS terrain gradient, m/m; the surface is rescaled to it.
            None keeps the raw ``amplitude`` relief
        max_rotation_deg: per-tile rotation bound
        max_shift_px: per-tile horizontal shift bound, pixels
        max_shift_m: per-tile vertical shift bound, meters
        nodata_fraction: share of each tile punched out as disk-shaped holes
        noise_sigma: Gaussian height noise, meters
        origin: world (x, y) of the first terrain pixel center
        seed: master seed
    """

    rows: int = 1
    cols: int = 2
    tile_size: int = 64
    overlap: float = 0.5
    gsd: float = 1.0
    amplitude: float = 40.0
    roughness: float = 0.55
    slope: Optional[float] = DEFAULT_SLOPE
    max_rotation_deg: float = 0.0
    max_shift_px: float = 0.0
    max_shift_m: float = 0.0
    nodata_fraction: float = 0.0
    noise_sigma: float = 0.0
    origin: Tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise InvalidInputError("Mosaic needs at least one tile", context={"rows": self.rows, "cols": self.cols})
        if self.tile_size < 4:
            raise InvalidInputError("tile_size must be at least 4", field="tile_size", value=self.tile_size)
        if not 0.0 <= self.overlap < 1.0:
            raise InvalidInputError("overlap must lie in [0, 1)", field="overlap", value=self.overlap)
        if not self.gsd > 0:
            raise InvalidInputError("gsd must be positive", field="gsd", value=self.gsd)
        if not 0.0 < self.roughness < 1.0:
            raise InvalidInputError("roughness must lie in (0, 1)", field="roughness", value=self.roughness)
        if self.slope is not None and not self.slope > 0:
            raise InvalidInputError("slope must be positive", field="slope", value=self.slope)
        if not 0.0 <= self.nodata_fraction < 1.0:
            raise InvalidInputError("nodata_fraction must lie in [0, 1)", field="nodata_fraction", value=self.nodata_fraction)
        for name in ("max_rotation_deg", "max_shift_px", "max_shift_m", "noise_sigma", "amplitude"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be non-negative", field=name, value=getattr(self, name))

    @property
    def tile_offset(self) -> int:
        return max(1, int(round(self.tile_size * (1.0 - self.overlap))))

    @property
    def mosaic_shape(self) -> Tuple[int, int]:
        """(width, height) of the area covered by the tiles, pixels."""
        return (
            self.tile_size + (self.cols - 1) * self.tile_offset,
            self.tile_size + (self.rows - 1) * self.tile_offset,
        )

    @property
    def margin(self) -> int:
        """
        Terrain border keeping perturbed tiles inside the generated surface.

        Rotation sweeps the tile outline and, through tilt, shifts points by
        up to their height above the rotation center; with ``slope`` set that
        height is bounded by slope * tile extent.
        """
        sweep = self.tile_size * math.sin(math.radians(self.max_rotation_deg)) * (1.0 + (self.slope or 0.0))
        return int(math.ceil(self.max_shift_px + sweep)) + 2


@dataclass(frozen=True)
class SyntheticScene:
    """Generated tiles, their true poses and the unperturbed truth raster."""

    tiles: List[DsmGrid]
    poses: List[RigidTransform]
    truth: DsmGrid
    spec: MosaicSpec = field(repr=False)


def random_pose(
    rng: np.random.Generator,
    center: np.ndarray,
    max_rotation_deg: float,
    max_shift_xy: float,
    max_shift_z: float
) -> RigidTransform:
    """Random rigid motion about ``center`` within the given bounds."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = math.radians(max_rotation_deg) * rng.uniform(-1.0, 1.0)
    rotation = Rotation.from_rotvec(angle * axis).as_matrix()
    heading = rng.uniform(0.0, 2.0 * math.pi)
    radius = max_shift_xy * rng.uniform(0.0, 1.0)
    shift = np.array([radius * math.cos(heading), radius * math.sin(heading), max_shift_z * rng.uniform(-1.0, 1.0)])
    return RigidTransform(rotation, center - rotation @ center + shift)


def rescale_to_slope(heights: np.ndarray, gsd: float, slope: float) -> np.ndarray:
    """``heights`` scaled about their mean so the RMS pixel-to-pixel gradient equals ``slope``."""
    gradients = np.concatenate([np.diff(heights, axis=0).ravel(), np.diff(heights, axis=1).ravel()]) / gsd
    current = float(np.sqrt(np.mean(gradients ** 2))) if gradients.size else 0.0
    if current == 0.0:
        return heights
    mean = float(heights.mean())
    return mean + (heights - mean) * (slope / current)


def _punch_holes(heights: np.ndarray, fraction: float, rng: np.random.Generator) -> None:
    rows, cols = heights.shape
    radius = max(1.0, 0.05 * min(rows, cols))
    vv, uu = np.mgrid[0:rows, 0:cols]
    holes = np.zeros(heights.shape, dtype=bool)
    while holes.mean() < fraction:
        cu, cv = rng.uniform(0, cols), rng.uniform(0, rows)
        holes |= (uu - cu) ** 2 + (vv - cv) ** 2 <= radius ** 2
    heights[holes] = np.nan


def synthesize(spec: MosaicSpec) -> SyntheticScene:
    """Deterministic scene for ``spec``; identical specs give identical arrays."""
    width, height = spec.mosaic_shape
    margin = spec.margin
    needed = max(width, height) + 2 * margin
    exponent = max(1, math.ceil(math.log2(needed - 1)))
    surface = diamond_square(exponent, spec.amplitude, spec.roughness, spec.seed)
    if spec.slope is not None:
        surface = rescale_to_slope(surface, spec.gsd, spec.slope)

    # Terrain pixel (margin, margin) is world pixel (0, 0).
    world_gt = GeoTransform(
        x_origin=spec.origin[0],
        y_origin=spec.origin[1],
        x_scale=spec.gsd,
        y_scale=-spec.gsd,
    )
    terrain = DsmGrid.from_array(
        surface[:height + 2 * margin, :width + 2 * margin],
        world_gt.shifted(-margin, -margin),
    )
    truth = DsmGrid.from_array(surface[margin:margin + height, margin:margin + width], world_gt)

    rng = np.random.default_rng(spec.seed + 1)
    tiles: List[DsmGrid] = []
    poses: List[RigidTransform] = []
    for row in range(spec.rows):
        for col in range(spec.cols):
            index = row * spec.cols + col
            tile_gt = world_gt.shifted(col * spec.tile_offset, row * spec.tile_offset)
            cx, cy = tile_gt.uv_to_world((spec.tile_size - 1) / 2.0, (spec.tile_size - 1) / 2.0)
            top = margin + row * spec.tile_offset
            left = margin + col * spec.tile_offset
            cz = float(surface[top:top + spec.tile_size, left:left + spec.tile_size].mean())
            center = np.array([cx, cy, cz])
            if index == 0:
                pose = RigidTransform.identity()
            else:
                pose = random_pose(
                    rng, center, spec.max_rotation_deg, spec.max_shift_px * spec.gsd, spec.max_shift_m,
                )
            tile = apply_pose(terrain, pose.inverse(), tile_gt, (spec.tile_size, spec.tile_size))
            heights = tile.to_array()
            heights[heights == tile.nodata] = np.nan
            if spec.noise_sigma > 0:
                heights += rng.normal(0.0, spec.noise_sigma, heights.shape)
            if spec.nodata_fraction > 0:
                _punch_holes(heights, spec.nodata_fraction, rng)
            tiles.append(DsmGrid.from_array(heights, tile_gt, nodata=DEFAULT_NODATA, id=index))
            poses.append(pose)
    return SyntheticScene(tiles=tiles, poses=poses, truth=truth, spec=spec)


def perturb(grid: DsmGrid, pose: RigidTransform, seed: Optional[int] = None, noise_sigma: float = 0.0) -> DsmGrid:
    """``grid`` as seen from a frame displaced by ``pose`` (resampled through ``pose``^-1)."""
    moved = apply_pose(grid, pose.inverse())
    if noise_sigma <= 0:
        return moved
    heights = moved.to_array()
    valid = heights != moved.nodata
    heights[valid] += np.random.default_rng(seed).normal(0.0, noise_sigma, int(valid.sum()))
    return DsmGrid.from_array(heights, moved.geotransform, nodata=moved.nodata, id=grid.id)
