"""
Affine georeferencing of DSM rasters.

The origin anchors the CENTER of pixel (0, 0); ``u`` is the column index and
``v`` the row index:

    x = x_origin + x_scale * u + x_skew * v
    y = y_origin + y_skew * u + y_scale * v
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from src.domain.exceptions import SingularTransformError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class GeoTransform:
    """
    Pixel-to-world affine mapping.

    Attributes:
        x_origin: world x of the center of pixel (0, 0), meters
        y_origin: world y of the center of pixel (0, 0), meters
        x_scale: meters per pixel along u (> 0)
        y_scale: meters per pixel along v (typically < 0 for north-up rasters)
        x_skew: x change per row, meters
        y_skew: y change per column, meters
    """

    x_origin: float
    y_origin: float
    x_scale: float
    y_scale: float
    x_skew: float = 0.0
    y_skew: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x_origin", "y_origin", "x_scale", "y_scale", "x_skew", "y_skew"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise SingularTransformError(determinant=float("nan"))
            object.__setattr__(self, name, value)
        if self.determinant == 0.0:
            raise SingularTransformError(determinant=0.0)

    @property
    def determinant(self) -> float:
        return self.x_scale * self.y_scale - self.x_skew * self.y_skew

    @property
    def matrix(self) -> np.ndarray:
        """2x2 linear part mapping (u, v) to (x, y) offsets."""
        return np.array([[self.x_scale, self.x_skew], [self.y_skew, self.y_scale]])

    def uv_to_world(self, u: ArrayLike, v: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        x = self.x_origin + self.x_scale * u + self.x_skew * v
        y = self.y_origin + self.y_skew * u + self.y_scale * v
        return x, y

    def world_to_uv(self, x: ArrayLike, y: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        det = self.determinant
        if det == 0.0:
            raise SingularTransformError(determinant=det)
        dx = x - self.x_origin
        dy = y - self.y_origin
        u = (self.y_scale * dx - self.x_skew * dy) / det
        v = (self.x_scale * dy - self.y_skew * dx) / det
        return u, v

    def pixel_radius(self) -> float:
        """
        Pixels per meter along the most sensitive image axis.

        A horizontal world displacement of norm ``d`` moves ``u`` and ``v`` by
        at most ``d * pixel_radius()`` each. Without skew this is
        ``1 / min(|x_scale|, |y_scale|)``.
        """
        det = self.determinant
        row_u = np.hypot(self.y_scale, self.x_skew) / abs(det)
        row_v = np.hypot(self.x_scale, self.y_skew) / abs(det)
        return float(max(row_u, row_v))

    @property
    def gsd(self) -> float:
        """Finest ground sampling distance, meters."""
        return 1.0 / self.pixel_radius()

    def shifted(self, du: float, dv: float) -> "GeoTransform":
        """Transform whose pixel (0, 0) is this transform's pixel (du, dv)."""
        x, y = self.uv_to_world(du, dv)
        return GeoTransform(
            x_origin=float(x),
            y_origin=float(y),
            x_scale=self.x_scale,
            y_scale=self.y_scale,
            x_skew=self.x_skew,
            y_skew=self.y_skew,
        )


def uv_to_world(
    u: ArrayLike,
    v: ArrayLike,
    gt: GeoTransform,
    h: ArrayLike = 0.0
) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Map pixel coordinates and a height to a world point; ``h`` passes through."""
    x, y = gt.uv_to_world(u, v)
    return x, y, h


def world_to_uv(x: ArrayLike, y: ArrayLike, gt: GeoTransform) -> Tuple[ArrayLike, ArrayLike]:
    """Exact inverse of :func:`uv_to_world`; rounding is left to the caller."""
    return gt.world_to_uv(x, y)
