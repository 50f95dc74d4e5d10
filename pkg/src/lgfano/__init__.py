"""Exact and numeric tools for the Landau-Ginzburg / Fano-general-type correspondence
of weighted Fermat-type hypersurfaces: state spaces, I-functions, Picard-Fuchs
operators, mirror extraction and asymptotic collapse maps."""

from .geometry import InvalidInput, SymmetryGroup, WeightSystem

__all__ = ["InvalidInput", "SymmetryGroup", "WeightSystem"]
__version__ = "0.1.0"
