"""
Test configuration and fixtures.
Provides shared rasters, repositories and containers for unit and integration tests.
"""

from pathlib import Path
from typing import Callable, Iterator, Optional

import numpy as np
import pytest
from dishka import Container

from src.domain.entities.dsm_grid import DsmGrid
from src.infrastructure.adapters.outbound.raster.file_raster_repository import FileRasterRepositoryAdapter
from src.infrastructure.config.settings import AppSettings, RasterSettings, Settings
from src.infrastructure.di.container import create_dishka_container
from tests.helpers import north_up, wave_heights

GridFactory = Callable[..., DsmGrid]


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test sees the same stream."""
    return np.random.default_rng(12345)


@pytest.fixture
def make_grid() -> GridFactory:
    """Factory for in-memory rasters on a 1 m north-up lattice."""

    def factory(heights, gsd: float = 1.0, x0: float = 0.0, y0: Optional[float] = None, grid_id: int = 0,
                nodata: float = -9999.0) -> DsmGrid:
        array = np.asarray(heights, dtype=np.float64)
        gt = north_up(array.shape[1], array.shape[0], gsd, x0, y0)
        return DsmGrid.from_array(array, gt, nodata=nodata, id=grid_id)

    return factory


@pytest.fixture
def wave_grid(make_grid: GridFactory) -> DsmGrid:
    """64x64 smooth surface, amplitude 5 m."""
    return make_grid(wave_heights(64, 64))


@pytest.fixture
def raster_settings() -> RasterSettings:
    return RasterSettings()


@pytest.fixture
def raster_repository(raster_settings: RasterSettings) -> FileRasterRepositoryAdapter:
    return FileRasterRepositoryAdapter(raster_settings)


@pytest.fixture
def test_settings(tmp_path: Path) -> Settings:
    """Settings writing into the test's temporary directory."""
    return Settings(app=AppSettings(out_dir=tmp_path / "out", log_level="WARNING"))


@pytest.fixture
def container(test_settings: Settings) -> Iterator[Container]:
    di_container = create_dishka_container(test_settings)
    try:
        yield di_container
    finally:
        di_container.close()
