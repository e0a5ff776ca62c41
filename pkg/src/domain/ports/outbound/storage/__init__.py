"""
Outbound raster storage ports package.
Contains the window-read contract raster backends implement.
"""
