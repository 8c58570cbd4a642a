"""chiptrap: combined electro-magnetic microtrap simulation for atom chips."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .species import LI7, AtomSpecies

__all__ = ["BACKEND", "AtomSpecies", "LI7", "__version__"]
