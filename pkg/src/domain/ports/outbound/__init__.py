"""
Outbound ports package.
Contains interfaces for operations to external systems.
"""