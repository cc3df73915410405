"""Allocative bonding curves: exact fixed-point pricing, an organization
state machine with assessment voting, agent scenarios and flow analytics."""

from .numeric import Dec

__version__ = "0.1.0"

__all__ = ["Dec", "__version__"]
