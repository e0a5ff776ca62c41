"""
Unit tests for lazily windowed DSM rasters.
"""

import numpy as np
import pytest

from src.domain.entities.dsm_grid import DsmGrid, Window, read_window, valid_mask
from src.domain.exceptions import InvalidInputError, OutOfBoundsError
from src.infrastructure.adapters.outbound.raster.procedural import procedural_grid, wave_surface
from tests.helpers import north_up


@pytest.mark.unit
class TestReadWindow:
    """Clipped window reads."""

    def test_full_extent_with_nodata(self, make_grid) -> None:
        heights = np.arange(9, dtype=np.float64).reshape(3, 3)
        heights[1, 2] = np.nan
        grid = make_grid(heights)

        window = read_window(grid, (0, 2, 0, 2))

        assert window.area == 9
        assert window.n_valid == 8
        assert not window.mask[1, 2]
        assert window.heights[1, 2] == grid.nodata

    def test_overhang_is_clipped(self, make_grid) -> None:
        grid = make_grid(np.zeros((4, 5)))

        window = grid.read_window((2, 6, 1, 2))

        assert (window.u_min, window.u_max, window.v_min, window.v_max) == (2, 4, 1, 2)
        assert window.shape == (2, 3)

    def test_checkerboard_mask(self, make_grid) -> None:
        heights = np.ones((5, 7))
        vv, uu = np.mgrid[0:5, 0:7]
        heights[(uu + vv) % 2 == 0] = np.nan
        grid = make_grid(heights)

        window = read_window(grid, (0, 6, 0, 4))

        assert window.area - window.n_valid == int(np.ceil(window.area / 2))

    def test_pixel_grid_matches_bounds(self, make_grid) -> None:
        grid = make_grid(np.zeros((6, 6)))

        uu, vv = read_window(grid, (1, 3, 2, 5)).pixel_grid()

        assert uu[0, 0] == 1 and uu[0, -1] == 3
        assert vv[0, 0] == 2 and vv[-1, 0] == 5

    @pytest.mark.error_handling
    def test_disjoint_window_raises(self, make_grid) -> None:
        grid = make_grid(np.zeros((4, 4)))

        with pytest.raises(OutOfBoundsError):
            read_window(grid, (10, 12, 0, 1))

    @pytest.mark.error_handling
    def test_empty_window_raises(self, make_grid) -> None:
        grid = make_grid(np.zeros((4, 4)))

        with pytest.raises(InvalidInputError):
            read_window(grid, (3, 1, 0, 1))

    @pytest.mark.error_handling
    def test_window_shape_mismatch(self) -> None:
        with pytest.raises(InvalidInputError):
            Window(0, 1, 0, 1, heights=np.zeros((2, 2)), mask=np.ones((1, 2), dtype=bool))


@pytest.mark.unit
class TestDsmGrid:
    """Raster-level helpers."""

    def test_from_array_converts_nan(self, make_grid) -> None:
        grid = make_grid([[1.0, np.nan], [np.inf, 4.0]])

        assert grid.valid_count() == 2
        assert grid.to_array()[0, 1] == grid.nodata

    def test_valid_mask_with_nan_sentinel(self) -> None:
        values = np.array([1.0, np.nan, -9999.0])

        np.testing.assert_array_equal(valid_mask(values, float("nan")), [True, False, True])

    def test_height_range_and_footprint(self, make_grid) -> None:
        grid = make_grid([[1.0, 5.0, np.nan], [-2.0, 0.0, 3.0]], gsd=2.0, x0=10.0, y0=20.0)

        assert grid.height_range() == (-2.0, 5.0)
        assert grid.footprint() == (10.0, 14.0, 18.0, 20.0)

    def test_height_range_all_nodata(self, make_grid) -> None:
        grid = make_grid(np.full((2, 2), np.nan))

        assert grid.height_range() is None

    def test_row_bands_cover_raster(self, make_grid) -> None:
        grid = make_grid(np.ones((10, 3)))

        bands = list(grid.iter_row_bands(4))

        assert [band.shape[0] for band in bands] == [4, 4, 2]

    def test_with_id_shares_storage(self, make_grid) -> None:
        grid = make_grid(np.ones((2, 2)))

        relabeled = grid.with_id(5)

        assert relabeled.id == 5
        assert relabeled.storage is grid.storage

    @pytest.mark.error_handling
    def test_storage_size_mismatch(self, make_grid) -> None:
        grid = make_grid(np.ones((2, 2)))

        with pytest.raises(InvalidInputError):
            DsmGrid(id=0, width=3, height=2, geotransform=grid.geotransform, nodata=-9999.0, storage=grid.storage)


@pytest.mark.unit
class TestLazyAccess:
    """Window reads never touch the whole raster."""

    def test_loading_reads_nothing(self) -> None:
        grid = procedural_grid(100_000, 100_000, wave_surface(), north_up(100_000, 100_000))

        assert grid.storage.stats.windows_read == 0
        assert grid.storage.stats.pixels_read == 0

    def test_window_memory_matches_window_area(self) -> None:
        grid = procedural_grid(100_000, 100_000, wave_surface(), north_up(100_000, 100_000))

        window = read_window(grid, (5000, 5009, 7000, 7019))

        assert window.area == 200
        assert grid.storage.stats.peak_window_pixels == 200
        assert grid.storage.stats.windows_read == 1
