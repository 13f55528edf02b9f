"""Twistor spaces of odd-dimensional manifolds and the eta-Einstein condition."""
from . import contact_structures, geometry_engine, linalg, twistor

__version__ = "0.1.0"
