"""
Unit tests for fractal terrain and synthetic tile mosaics.
"""

import math

import numpy as np
import pytest

from src.domain.entities.rigid_transform import RigidTransform
from src.domain.exceptions import InvalidInputError
from src.domain.services.scene_graph import overlap_score
from src.domain.services.terrain import (
    DEFAULT_SLOPE,
    MosaicSpec,
    diamond_square,
    perturb,
    random_pose,
    rescale_to_slope,
    synthesize,
)


@pytest.mark.unit
class TestDiamondSquare:
    """Fractal heightmap generator."""

    def test_shape_and_finiteness(self) -> None:
        heights = diamond_square(5, amplitude=10.0, seed=1)

        assert heights.shape == (33, 33)
        assert np.all(np.isfinite(heights))

    def test_seeded(self) -> None:
        np.testing.assert_array_equal(diamond_square(4, seed=9), diamond_square(4, seed=9))
        assert not np.array_equal(diamond_square(4, seed=9), diamond_square(4, seed=10))

    def test_corners_within_amplitude(self) -> None:
        heights = diamond_square(3, amplitude=2.0, seed=4)

        assert np.all(np.abs(heights[::8, ::8]) <= 2.0)

    def test_lower_roughness_is_smoother(self) -> None:
        smooth = diamond_square(6, amplitude=10.0, roughness=0.3, seed=5)
        rough = diamond_square(6, amplitude=10.0, roughness=0.8, seed=5)

        assert np.abs(np.diff(smooth, axis=1)).mean() < np.abs(np.diff(rough, axis=1)).mean()

    @pytest.mark.error_handling
    def test_exponent_must_be_positive(self) -> None:
        with pytest.raises(InvalidInputError):
            diamond_square(0)


@pytest.mark.unit
class TestRescaleToSlope:
    """Relief normalisation."""

    def test_rms_gradient_matches(self) -> None:
        heights = diamond_square(6, amplitude=10.0, seed=3)

        scaled = rescale_to_slope(heights, gsd=0.5, slope=2.0)

        gradients = np.concatenate([np.diff(scaled, axis=0).ravel(), np.diff(scaled, axis=1).ravel()]) / 0.5
        assert np.sqrt(np.mean(gradients ** 2)) == pytest.approx(2.0)
        assert scaled.mean() == pytest.approx(heights.mean())

    def test_flat_surface_unchanged(self) -> None:
        flat = np.full((5, 5), 3.0)

        np.testing.assert_array_equal(rescale_to_slope(flat, gsd=1.0, slope=2.0), flat)


@pytest.mark.unit
class TestMosaicSpec:
    """Mosaic layout arithmetic."""

    def test_layout(self) -> None:
        spec = MosaicSpec(rows=3, cols=3, tile_size=64, overlap=0.5)

        assert spec.tile_offset == 32
        assert spec.mosaic_shape == (128, 128)

    def test_margin_grows_with_perturbation(self) -> None:
        still = MosaicSpec()
        moving = MosaicSpec(max_rotation_deg=2.0, max_shift_px=3.0)

        assert still.margin == 2
        assert moving.margin == math.ceil(3.0 + 64 * math.sin(math.radians(2.0)) * (1.0 + DEFAULT_SLOPE)) + 2
        assert MosaicSpec(max_shift_px=3.0, slope=None).margin == 5

    @pytest.mark.error_handling
    @pytest.mark.parametrize(
        "field, value",
        [("overlap", 1.0), ("tile_size", 2), ("roughness", 1.0), ("rows", 0), ("noise_sigma", -1.0), ("slope", 0.0)],
    )
    def test_invalid_fields(self, field: str, value) -> None:
        with pytest.raises(InvalidInputError):
            MosaicSpec(**{field: value})


@pytest.mark.unit
class TestSynthesize:
    """Deterministic tiles with known poses."""

    def test_single_tile_is_truth(self) -> None:
        scene = synthesize(MosaicSpec(rows=1, cols=1, tile_size=32, seed=3))

        assert len(scene.tiles) == 1
        np.testing.assert_allclose(scene.tiles[0].to_array(), scene.truth.to_array(), atol=1e-9)
        np.testing.assert_array_equal(scene.poses[0].as_matrix(), np.eye(4))

    def test_half_overlap(self) -> None:
        scene = synthesize(MosaicSpec(rows=1, cols=2, tile_size=64, overlap=0.5, seed=1))

        assert overlap_score(scene.tiles[0], scene.tiles[1]) == pytest.approx(0.5, abs=0.02)

    def test_identical_specs_give_identical_tiles(self) -> None:
        spec = MosaicSpec(rows=2, cols=2, tile_size=32, max_rotation_deg=1.0, max_shift_px=2.0, max_shift_m=1.0,
                          noise_sigma=0.05, nodata_fraction=0.1, seed=17)

        first, second = synthesize(spec), synthesize(spec)

        for a, b in zip(first.tiles, second.tiles):
            np.testing.assert_array_equal(a.to_array(), b.to_array())
        for a, b in zip(first.poses, second.poses):
            np.testing.assert_array_equal(a.as_matrix(), b.as_matrix())

    def test_poses_within_bounds(self) -> None:
        spec = MosaicSpec(rows=2, cols=3, tile_size=32, max_rotation_deg=1.5, max_shift_px=4.0, max_shift_m=2.0,
                          seed=8)

        scene = synthesize(spec)

        assert [tile.id for tile in scene.tiles] == list(range(6))
        np.testing.assert_array_equal(scene.poses[0].as_matrix(), np.eye(4))
        for pose in scene.poses[1:]:
            assert pose.rotation_angle() <= math.radians(1.5) + 1e-12
            assert not np.allclose(pose.as_matrix(), np.eye(4))

    def test_nodata_fraction(self) -> None:
        scene = synthesize(MosaicSpec(rows=1, cols=2, tile_size=40, nodata_fraction=0.2, seed=2))

        for tile in scene.tiles:
            share = 1.0 - tile.valid_count() / (tile.width * tile.height)
            assert 0.2 <= share < 0.4

    def test_origin_places_first_tile(self) -> None:
        scene = synthesize(MosaicSpec(rows=1, cols=1, tile_size=16, origin=(500.0, 900.0)))

        assert scene.tiles[0].geotransform.uv_to_world(0.0, 0.0) == (500.0, 900.0)

    def test_raw_relief_without_slope(self) -> None:
        scene = synthesize(MosaicSpec(rows=1, cols=1, tile_size=16, slope=None, seed=3))

        surface = diamond_square(5, 40.0, 0.55, 3)
        np.testing.assert_array_equal(scene.truth.to_array(), surface[2:18, 2:18])

    def test_tiles_rotate_about_their_mean_height(self) -> None:
        scene = synthesize(MosaicSpec(rows=1, cols=2, tile_size=32, max_rotation_deg=2.0, seed=6))

        cx, cy = scene.tiles[1].geotransform.uv_to_world(15.5, 15.5)
        center = np.array([cx, cy, scene.truth.to_array()[:, 16:48].mean()])
        pose = scene.poses[1]
        assert pose.rotation_angle() > 0.0
        np.testing.assert_allclose(pose.apply(center[None, :])[0], center, atol=1e-9)


@pytest.mark.unit
class TestPerturb:
    """Displacing a raster by a known pose."""

    def test_random_pose_keeps_center_near(self, rng: np.random.Generator) -> None:
        center = np.array([10.0, -5.0, 0.0])

        pose = random_pose(rng, center, 2.0, 3.0, 1.0)

        moved = pose.apply(center[None, :])[0]
        assert np.hypot(*(moved - center)[:2]) <= 3.0 + 1e-12
        assert abs(moved[2] - center[2]) <= 1.0 + 1e-12

    def test_vertical_perturbation(self, wave_grid) -> None:
        moved = perturb(wave_grid, RigidTransform(np.eye(3), np.array([0.0, 0.0, 2.0])))

        np.testing.assert_allclose(moved.to_array(), wave_grid.to_array() - 2.0, atol=1e-9)

    def test_noise_is_seeded(self, wave_grid) -> None:
        pose = RigidTransform.identity()

        first = perturb(wave_grid, pose, seed=4, noise_sigma=0.1).to_array()
        second = perturb(wave_grid, pose, seed=4, noise_sigma=0.1).to_array()

        np.testing.assert_array_equal(first, second)
        assert np.std(first - wave_grid.to_array()) == pytest.approx(0.1, rel=0.1)
