"""
Data transfer objects: JSON contracts between pipeline stages and the
pipeline configuration.
"""
