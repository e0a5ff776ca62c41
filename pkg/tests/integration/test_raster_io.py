"""
Integration tests for raster files: ESRI ASCII grids, DSMG binaries and world files.
"""

from pathlib import Path

import numpy as np
import pytest

from src.domain.entities.dsm_grid import DsmGrid
from src.domain.entities.geotransform import GeoTransform
from src.domain.exceptions import ParseError, RasterIOError, UnsupportedFormatError
from src.infrastructure.adapters.outbound.raster.binary_dsmg import HEADER, load_binary, write_binary
from src.infrastructure.adapters.outbound.raster.esri_ascii import load_ascii, read_header, write_ascii
from src.infrastructure.adapters.outbound.raster.file_raster_repository import FileRasterRepositoryAdapter
from src.infrastructure.adapters.outbound.raster.world_file import read_world_file, write_world_file
from src.infrastructure.config.settings import RasterSettings

SKEWED = GeoTransform(x_origin=500.25, y_origin=-20.5, x_scale=0.5, y_scale=-0.75, x_skew=0.1, y_skew=0.05)


def write_text(path: Path, text: str) -> Path:
    path.write_text(text, encoding="ascii")
    return path


@pytest.fixture
def small_grid(make_grid, rng: np.random.Generator) -> DsmGrid:
    heights = rng.uniform(-50.0, 50.0, (5, 7))
    heights[2, 3] = np.nan
    return make_grid(heights, gsd=0.5, x0=1000.0, y0=2000.0)


@pytest.mark.integration
class TestEsriAscii:
    """ASCII grid reading and writing."""

    def test_round_trip_is_exact(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        path = tmp_path / "dsm.asc"

        write_ascii(small_grid, path)
        loaded = load_ascii(path)

        np.testing.assert_array_equal(loaded.to_array(), small_grid.to_array())
        assert loaded.geotransform == small_grid.geotransform
        assert loaded.nodata == small_grid.nodata
        assert not path.with_suffix(".wld").exists()

    def test_corner_header(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "corner.asc", (
            "ncols 3\nnrows 2\nxllcorner 100\nyllcorner 200\ncellsize 2\nNODATA_value -9999\n"
            "1 2 3\n4 -9999 6\n"
        ))

        grid = load_ascii(path)

        assert grid.geotransform.uv_to_world(0.0, 0.0) == (101.0, 203.0)
        assert grid.valid_count() == 5
        np.testing.assert_array_equal(grid.to_array(), [[1, 2, 3], [4, -9999, 6]])

    def test_values_may_wrap_lines(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "wrapped.asc", (
            "ncols 3\nnrows 2\nxllcenter 0\nyllcenter 0\ncellsize 1\n1 2\n3 4\n5\n6\n"
        ))

        grid = load_ascii(path)

        np.testing.assert_array_equal(grid.read_window((1, 2, 1, 1)).heights, [[5.0, 6.0]])
        np.testing.assert_array_equal(grid.to_array(), [[1, 2, 3], [4, 5, 6]])

    def test_opening_reads_only_the_header(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        path = tmp_path / "lazy.asc"
        write_ascii(small_grid, path)

        grid = load_ascii(path)

        assert grid.storage.stats.windows_read == 0
        assert read_header(path).data_line == 7

    def test_skewed_grid_gets_world_file(self, make_grid, tmp_path: Path) -> None:
        grid = DsmGrid.from_array(np.arange(12.0).reshape(3, 4), SKEWED)
        path = tmp_path / "skewed.asc"

        write_ascii(grid, path)
        loaded = load_ascii(path)

        assert path.with_suffix(".wld").is_file()
        assert loaded.geotransform == SKEWED

    def test_stale_world_file_is_removed(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        path = tmp_path / "dsm.asc"
        write_ascii(DsmGrid.from_array(np.zeros((2, 2)), SKEWED), path)

        write_ascii(small_grid, path)

        assert not path.with_suffix(".wld").exists()
        assert load_ascii(path).geotransform == small_grid.geotransform

    @pytest.mark.error_handling
    def test_unknown_header_key_reports_line(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "bad.asc", "ncols 2\nnrows 1\ncolour blue\n1 2\n")

        with pytest.raises(ParseError) as exc_info:
            load_ascii(path)

        assert exc_info.value.line == 3

    @pytest.mark.error_handling
    def test_missing_values_detected_on_first_read(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "short.asc", "ncols 2\nnrows 2\nxllcenter 0\nyllcenter 0\ncellsize 1\n1 2\n3\n")
        grid = load_ascii(path)

        with pytest.raises(ParseError) as exc_info:
            grid.to_array()

        assert "expected 4 values" in exc_info.value.message

    @pytest.mark.error_handling
    def test_non_numeric_value_reports_line(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "text.asc", (
            "ncols 2\nnrows 2\nxllcenter 0\nyllcenter 0\ncellsize 1\n1 2\n3 x\n"
        ))

        with pytest.raises(ParseError) as exc_info:
            load_ascii(path).to_array()

        assert exc_info.value.line == 7

    @pytest.mark.error_handling
    def test_mixed_anchor_keys(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "mixed.asc", "ncols 1\nnrows 1\nxllcorner 0\nyllcenter 0\ncellsize 1\n1\n")

        with pytest.raises(ParseError):
            load_ascii(path)


@pytest.mark.integration
class TestWorldFile:
    """Six-line world files."""

    def test_line_order(self, tmp_path: Path) -> None:
        path = tmp_path / "grid.wld"

        write_world_file(SKEWED, path)

        lines = [float(line) for line in path.read_text(encoding="utf-8").split()]
        assert lines == [0.5, 0.05, 0.1, -0.75, 500.25, -20.5]

    def test_corner_anchor_shifts_half_pixel(self, tmp_path: Path) -> None:
        path = tmp_path / "grid.wld"
        gt = GeoTransform(x_origin=10.0, y_origin=20.0, x_scale=2.0, y_scale=-2.0)

        write_world_file(gt, path, anchor="corner")

        assert read_world_file(path, anchor="corner") == gt
        assert read_world_file(path, anchor="center").uv_to_world(0.0, 0.0) == (9.0, 21.0)

    @pytest.mark.error_handling
    def test_wrong_line_count(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "grid.wld", "1\n0\n0\n-1\n0\n")

        with pytest.raises(ParseError):
            read_world_file(path)

    @pytest.mark.error_handling
    def test_bad_number_reports_line(self, tmp_path: Path) -> None:
        path = write_text(tmp_path / "grid.wld", "1\n0\n0\nminus one\n0\n0\n")

        with pytest.raises(ParseError) as exc_info:
            read_world_file(path)

        assert exc_info.value.line == 4


@pytest.mark.integration
class TestBinaryDsmg:
    """Native binary rasters."""

    def test_round_trip_is_bit_exact(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        path = tmp_path / "dsm.dsmg"

        write_binary(small_grid, path, band_rows=2)
        loaded = load_binary(path, grid_id=3)

        assert path.stat().st_size == HEADER.size + 8 * 5 * 7
        assert loaded.id == 3
        assert loaded.geotransform == small_grid.geotransform
        np.testing.assert_array_equal(loaded.to_array(), small_grid.to_array())

    def test_skew_survives(self, tmp_path: Path) -> None:
        path = tmp_path / "skewed.dsmg"

        write_binary(DsmGrid.from_array(np.ones((2, 3)), SKEWED), path)

        assert load_binary(path).geotransform == SKEWED

    @pytest.mark.error_handling
    def test_truncated_data(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        path = tmp_path / "cut.dsmg"
        write_binary(small_grid, path)
        path.write_bytes(path.read_bytes()[:-8])

        with pytest.raises(ParseError) as exc_info:
            load_binary(path)

        assert exc_info.value.byte_offset == HEADER.size + 8 * 5 * 7 - 8

    @pytest.mark.error_handling
    def test_truncated_header(self, tmp_path: Path) -> None:
        path = tmp_path / "stub.dsmg"
        path.write_bytes(b"DSMG\x01\x00")

        with pytest.raises(ParseError) as exc_info:
            load_binary(path)

        assert exc_info.value.byte_offset == 6

    @pytest.mark.error_handling
    def test_bad_magic(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        path = tmp_path / "magic.dsmg"
        write_binary(small_grid, path)
        path.write_bytes(b"XXXX" + path.read_bytes()[4:])

        with pytest.raises(ParseError) as exc_info:
            load_binary(path)

        assert exc_info.value.byte_offset == 0


@pytest.mark.integration
class TestFileRasterRepository:
    """Format dispatch."""

    def test_extension_dispatch(self, raster_repository: FileRasterRepositoryAdapter, small_grid: DsmGrid,
                                tmp_path: Path) -> None:
        for name in ("a.asc", "b.txt", "c.dsmg", "d.bin"):
            raster_repository.write(small_grid, str(tmp_path / name))

            loaded = raster_repository.load(str(tmp_path / name), grid_id=2)

            assert loaded.id == 2
            np.testing.assert_array_equal(loaded.to_array(), small_grid.to_array())

    def test_explicit_format_wins(self, raster_repository: FileRasterRepositoryAdapter, small_grid: DsmGrid,
                                  tmp_path: Path) -> None:
        path = str(tmp_path / "grid.data")

        raster_repository.write(small_grid, path, fmt="ascii")

        assert Path(path).read_text(encoding="ascii").startswith("ncols 7")
        assert raster_repository.load(path, fmt="ascii").width == 7

    def test_default_format_without_suffix(self, small_grid: DsmGrid, tmp_path: Path) -> None:
        repository = FileRasterRepositoryAdapter(RasterSettings(default_format="dsmg"))
        path = tmp_path / "nested" / "grid"

        repository.write(small_grid, str(path))

        assert path.read_bytes()[:4] == b"DSMG"
        assert repository.extension() == ".dsmg"
        assert repository.extension("ascii") == ".asc"

    @pytest.mark.error_handling
    def test_unknown_extension(self, raster_repository: FileRasterRepositoryAdapter, tmp_path: Path) -> None:
        with pytest.raises(UnsupportedFormatError):
            raster_repository.load(str(tmp_path / "grid.tif"))

    @pytest.mark.error_handling
    def test_unknown_format_name(self, raster_repository: FileRasterRepositoryAdapter, tmp_path: Path) -> None:
        with pytest.raises(UnsupportedFormatError):
            raster_repository.load(str(tmp_path / "grid.asc"), fmt="geotiff")

    @pytest.mark.error_handling
    def test_missing_file(self, raster_repository: FileRasterRepositoryAdapter, tmp_path: Path) -> None:
        with pytest.raises(RasterIOError):
            raster_repository.load(str(tmp_path / "absent.dsmg"))
