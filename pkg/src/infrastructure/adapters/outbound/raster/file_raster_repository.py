from pathlib import Path
from typing import Optional, Sequence

from src.domain.entities.dsm_grid import DsmGrid
from src.domain.exceptions import UnsupportedFormatError
from src.domain.ports.outbound.repositories.raster_repository import RasterRepository
from src.infrastructure.config.settings import RasterSettings

from .binary_dsmg import load_binary, write_binary
from .esri_ascii import load_ascii, write_ascii

FORMAT_EXTENSIONS = {
    "ascii": (".asc", ".txt"),
    "dsmg": (".dsmg", ".bin"),
}


class FileRasterRepositoryAdapter(RasterRepository):
    """
    File-system implementation of RasterRepository.
    Dispatches on the explicit format name or on the file extension.
    """

    supported_formats: Sequence[str] = tuple(FORMAT_EXTENSIONS)

    def __init__(self, settings: Optional[RasterSettings] = None):
        self._settings = settings or RasterSettings()

    def resolve_format(self, path: str, fmt: Optional[str] = None, for_write: bool = False) -> str:
        """
        Format name for ``path``.

        Raises:
            UnsupportedFormatError: unknown format or extension
        """
        if fmt is not None:
            name = fmt.lower()
            if name not in FORMAT_EXTENSIONS:
                raise UnsupportedFormatError(fmt, self.supported_formats)
            return name
        suffix = Path(path).suffix.lower()
        for name, extensions in FORMAT_EXTENSIONS.items():
            if suffix in extensions:
                return name
        if for_write and not suffix:
            return self._settings.default_format
        raise UnsupportedFormatError(suffix or path, self.supported_formats)

    def extension(self, fmt: Optional[str] = None) -> str:
        return FORMAT_EXTENSIONS[fmt or self._settings.default_format][0]

    def load(self, path: str, fmt: Optional[str] = None, grid_id: int = 0) -> DsmGrid:
        name = self.resolve_format(path, fmt)
        if name == "ascii":
            return load_ascii(Path(path), grid_id, self._settings.world_file_anchor)
        return load_binary(Path(path), grid_id)

    def write(self, grid: DsmGrid, path: str, fmt: Optional[str] = None) -> None:
        name = self.resolve_format(path, fmt, for_write=True)
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        if name == "ascii":
            write_ascii(grid, Path(path), self._settings.world_file_anchor, self._settings.band_rows)
        else:
            write_binary(grid, Path(path), self._settings.band_rows)
