"""
Unit tests for RMSE_tau and the mean pairwise evaluation.
"""

import numpy as np
import pytest

from src.domain.entities.rigid_transform import RigidTransform
from src.domain.entities.scene_graph import SceneEdge
from src.domain.entities.value_objects import MetricConfig
from src.domain.exceptions import (
    InvalidInputError,
    NoInliersError,
    NoOverlapError,
    NoOverlappingPairsError,
)
from src.domain.services.metrics import mean_pairwise_rmse, rmse_tau
from tests.helpers import wave_heights

IDENTITY = RigidTransform.identity()


@pytest.mark.unit
class TestRmseTau:
    """Thresholded RMS of co-located differences."""

    def test_outlier_is_gated(self, make_grid) -> None:
        a = make_grid([[1.0, 2.0, 100.0]])
        b = make_grid(np.zeros((1, 3)))

        result = rmse_tau(a, b, MetricConfig(tau=10.0))

        assert result.rmse_tau == pytest.approx(np.sqrt(2.5))
        assert result.inlier_ratio == pytest.approx(2 / 3)
        assert (result.n_pairs, result.n_inliers) == (3, 2)

    def test_constant_offset(self, wave_grid, make_grid) -> None:
        shifted = make_grid(wave_heights(64, 64) + 3.0)

        result = rmse_tau(shifted, wave_grid)

        assert result.rmse_tau == pytest.approx(3.0)
        assert result.inlier_ratio == 1.0

    def test_identical_rasters(self, wave_grid) -> None:
        result = rmse_tau(wave_grid, wave_grid)

        assert result.rmse_tau == 0.0
        assert result.n_pairs == 64 * 64

    def test_difference_at_tau_is_an_outlier(self, make_grid) -> None:
        a = make_grid([[10.0, 1.0]])
        b = make_grid(np.zeros((1, 2)))

        result = rmse_tau(a, b, MetricConfig(tau=10.0))

        assert result.n_inliers == 1
        assert result.rmse_tau == pytest.approx(1.0)

    def test_nodata_is_skipped(self, make_grid) -> None:
        a = make_grid([[1.0, np.nan, 1.0]])
        b = make_grid([[0.0, 0.0, np.nan]])

        result = rmse_tau(a, b)

        assert result.n_pairs == 1

    def test_poses_are_applied(self, wave_grid, make_grid) -> None:
        lowered = make_grid(wave_heights(64, 64) - 3.0)
        raise_by_three = RigidTransform(np.eye(3), np.array([0.0, 0.0, 3.0]))

        result = rmse_tau(wave_grid, lowered, pose_b=raise_by_three)

        assert result.rmse_tau == pytest.approx(0.0, abs=1e-9)

    def test_band_size_does_not_change_result(self, wave_grid, make_grid) -> None:
        other = make_grid(wave_heights(64, 64, u0=5) * 0.9)

        whole = rmse_tau(wave_grid, other)
        banded = rmse_tau(wave_grid, other, band_rows=5)

        assert banded.rmse_tau == pytest.approx(whole.rmse_tau, rel=1e-12)
        assert banded.n_pairs == whole.n_pairs

    @pytest.mark.error_handling
    def test_every_difference_is_an_outlier(self, wave_grid, make_grid) -> None:
        raised = make_grid(wave_heights(64, 64) + 20.0)

        with pytest.raises(NoInliersError):
            rmse_tau(raised, wave_grid, MetricConfig(tau=10.0))

    @pytest.mark.error_handling
    def test_disjoint_rasters(self, make_grid) -> None:
        a = make_grid(np.zeros((3, 3)))
        b = make_grid(np.zeros((3, 3)), x0=50.0)

        with pytest.raises(NoOverlapError):
            rmse_tau(a, b)

    @pytest.mark.error_handling
    def test_tau_must_be_positive(self) -> None:
        with pytest.raises(InvalidInputError):
            MetricConfig(tau=0.0)


@pytest.mark.unit
class TestMeanPairwise:
    """Mean RMSE_tau over overlapping posed pairs."""

    @pytest.fixture
    def stacked(self, make_grid):
        return [make_grid(np.full((6, 6), h), grid_id=k) for k, h in enumerate((0.0, 1.0, 3.0))]

    def test_mean_over_pairs(self, stacked) -> None:
        result = mean_pairwise_rmse(stacked, [IDENTITY] * 3)

        assert [(p.i, p.j) for p in result.pairs] == [(0, 1), (0, 2), (1, 2)]
        assert [p.rmse_tau for p in result.pairs] == pytest.approx([1.0, 3.0, 2.0])
        assert result.mean_rmse_tau == pytest.approx(2.0)
        assert result.n_pairs_excluded == 0

    def test_tree_hops_annotated(self, stacked) -> None:
        tree = [
            SceneEdge(i=0, j=1, relative=IDENTITY, err=0.0, overlap=1.0),
            SceneEdge(i=1, j=2, relative=IDENTITY, err=0.0, overlap=1.0),
        ]

        result = mean_pairwise_rmse(stacked, [IDENTITY] * 3, tree=tree)

        assert [p.tree_hops for p in result.pairs] == [1, 2, 1]

    def test_pairs_without_inliers_are_excluded(self, make_grid) -> None:
        dsms = [make_grid(np.full((6, 6), h)) for h in (0.0, 1.0, 50.0)]

        result = mean_pairwise_rmse(dsms, [IDENTITY] * 3, MetricConfig(tau=10.0))

        assert result.excluded_pairs == [(0, 2), (1, 2)]
        assert result.mean_rmse_tau == pytest.approx(1.0)

    def test_non_overlapping_pairs_are_skipped(self, make_grid) -> None:
        dsms = [make_grid(np.zeros((4, 4))), make_grid(np.ones((4, 4)), x0=2.0), make_grid(np.zeros((4, 4)), x0=40.0)]

        result = mean_pairwise_rmse(dsms, [IDENTITY] * 3)

        assert [(p.i, p.j) for p in result.pairs] == [(0, 1)]
        assert result.excluded_pairs == []

    @pytest.mark.error_handling
    def test_no_overlapping_pairs(self, make_grid) -> None:
        dsms = [make_grid(np.zeros((4, 4))), make_grid(np.zeros((4, 4)), x0=40.0)]

        with pytest.raises(NoOverlappingPairsError):
            mean_pairwise_rmse(dsms, [IDENTITY, IDENTITY])

    @pytest.mark.error_handling
    def test_pose_count_mismatch(self, stacked) -> None:
        with pytest.raises(InvalidInputError):
            mean_pairwise_rmse(stacked, [IDENTITY])
