"""
Infrastructure adapters package.
Contains inbound and outbound adapter implementations.
"""