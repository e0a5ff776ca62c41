"""
Raster file adapters.
ESRI ASCII grids with optional world files, the native binary DSMG format
and procedurally generated rasters.
"""

from .binary_dsmg import BinaryGridStorage, load_binary, write_binary
from .esri_ascii import AsciiGridStorage, load_ascii, write_ascii
from .file_raster_repository import FileRasterRepositoryAdapter
from .procedural import ProceduralRasterStorage, procedural_grid, wave_surface
from .world_file import read_world_file, write_world_file

__all__ = [
    'AsciiGridStorage',
    'BinaryGridStorage',
    'FileRasterRepositoryAdapter',
    'ProceduralRasterStorage',
    'load_ascii',
    'load_binary',
    'procedural_grid',
    'read_world_file',
    'wave_surface',
    'write_ascii',
    'write_binary',
    'write_world_file',
]
