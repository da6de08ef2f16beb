"""Numerical lab for the incidence bilinear form of spherical convolution.

The package measures T(E, F), the mass of point pairs of two sets at unit
distance weighted by sphere surface measure, builds the dual cap pairs
that nearly extremize it, and verifies the quantitative mechanisms behind
that extremality: measure asymptotics, inclusion bounds, inflation and
slicing determinants, balanced convex approximation, nondegeneracy
necessity and cap decompositions.
"""

__version__ = "0.1.0"

from . import (constants, convex_approx, decomposition, geometry, lab, maps,
               oracle, rng, suite, surface_ops)

__all__ = ["constants", "convex_approx", "decomposition", "geometry", "lab",
           "maps", "oracle", "rng", "suite", "surface_ops", "__version__"]
