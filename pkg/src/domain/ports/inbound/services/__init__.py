"""
Inbound services ports package.
Contains service interfaces for business operations.
"""