"""Raster builders shared by the test modules."""

from typing import Optional

import numpy as np

from src.domain.entities.geotransform import GeoTransform
from src.infrastructure.adapters.outbound.raster.procedural import wave_surface


def north_up(width: int, height: int, gsd: float = 1.0, x0: float = 0.0, y0: Optional[float] = None) -> GeoTransform:
    """North-up transform whose lowest row lies on y = 0 unless ``y0`` is given."""
    top = (height - 1) * gsd if y0 is None else y0
    return GeoTransform(x_origin=x0, y_origin=top, x_scale=gsd, y_scale=-gsd)


def wave_heights(width: int, height: int, u0: int = 0, v0: int = 0) -> np.ndarray:
    """Smooth test surface sampled on a block of pixels."""
    uu, vv = np.meshgrid(np.arange(u0, u0 + width), np.arange(v0, v0 + height))
    return wave_surface()(uu, vv)
