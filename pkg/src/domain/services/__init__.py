"""
Numerical domain services: nearest-neighbor search, DSM-ICP, scene graph
construction, global pose solvers, resampling, fusion, metrics and synthetic
terrain.
"""
