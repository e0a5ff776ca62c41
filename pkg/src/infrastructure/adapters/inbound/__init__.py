"""
Inbound adapters package.
Contains adapters that receive external requests.
"""