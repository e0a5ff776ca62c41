"""
Outbound repository ports.
Persistence contracts for DSM rasters.
"""

from .raster_repository import RasterRepository

__all__ = ['RasterRepository']
