"""
Outbound adapters package.
Contains adapters that interact with external systems.
"""