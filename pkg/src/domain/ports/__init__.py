"""
Domain ports package.
Contains inbound and outbound port interfaces.
"""