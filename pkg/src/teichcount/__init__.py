"""Flat surfaces, multicurve counting and Jacobian checks for Teichmueller lattice counting."""

from .surface import FlatSurface, SurfaceError, builtin_origami, load_surface, save_surface
from .config import RunConfig

__version__ = "0.1.0"

__all__ = ["FlatSurface", "SurfaceError", "builtin_origami", "load_surface", "save_surface",
           "RunConfig", "__version__"]
