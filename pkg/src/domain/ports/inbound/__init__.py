"""
Inbound ports package.
Contains interfaces for operations triggered from outside the domain.
"""