"""
Six-line world files.

Line order: x_scale, y_skew, x_skew, y_scale, x_origin, y_origin. The origin
anchors the center of pixel (0, 0) unless the reader is told the file uses
outer-corner anchoring.
"""

from pathlib import Path
from typing import Literal, Optional

from src.domain.entities.geotransform import GeoTransform
from src.domain.exceptions import ParseError, RasterIOError

WORLD_FILE_SUFFIXES = (".wld", ".tfw")

Anchor = Literal["center", "corner"]


def companion_path(raster_path: Path) -> Optional[Path]:
    """Existing world file next to ``raster_path``, if any."""
    raster_path = Path(raster_path)
    candidates = [raster_path.with_suffix(suffix) for suffix in WORLD_FILE_SUFFIXES]
    if raster_path.suffix:
        # ESRI convention: first and last letter of the extension plus "w".
        ext = raster_path.suffix[1:]
        candidates.append(raster_path.with_suffix(f".{ext[0]}{ext[-1]}w"))
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return None


def read_world_file(path: Path, anchor: Anchor = "center") -> GeoTransform:
    path = Path(path)
    try:
        lines = [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    except OSError as error:
        raise RasterIOError(str(path), "read", error) from error

    if len(lines) != 6:
        raise ParseError(str(path), f"expected 6 numeric lines, found {len(lines)}")
    values = []
    for number, text in enumerate(lines, start=1):
        try:
            values.append(float(text))
        except ValueError:
            raise ParseError(str(path), f"not a number: {text!r}", line=number) from None

    x_scale, y_skew, x_skew, y_scale, x_origin, y_origin = values
    if anchor == "corner":
        x_origin += 0.5 * (x_scale + x_skew)
        y_origin += 0.5 * (y_skew + y_scale)
    return GeoTransform(
        x_origin=x_origin,
        y_origin=y_origin,
        x_scale=x_scale,
        y_scale=y_scale,
        x_skew=x_skew,
        y_skew=y_skew,
    )


def write_world_file(gt: GeoTransform, path: Path, anchor: Anchor = "center") -> None:
    x_origin, y_origin = gt.x_origin, gt.y_origin
    if anchor == "corner":
        x_origin -= 0.5 * (gt.x_scale + gt.x_skew)
        y_origin -= 0.5 * (gt.y_skew + gt.y_scale)
    values = (gt.x_scale, gt.y_skew, gt.x_skew, gt.y_scale, x_origin, y_origin)
    try:
        Path(path).write_text("".join(f"{value:.17g}\n" for value in values), encoding="utf-8")
    except OSError as error:
        raise RasterIOError(str(path), "write", error) from error
