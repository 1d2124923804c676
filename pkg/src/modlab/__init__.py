"""Numerics for dispersive equations with a rough time modulation ``W_t``.

Submodules
----------
paths        modulation paths (piecewise-linear interpolants)
occupation   occupation measures, local time and its Fourier transform
spectral     periodic spectral fields, dispersion symbols, norms
solver       split-step and integrating-factor solvers along a path
atoms        p-variation norms, atomic bounds, duality pairings
resonance    lattice sums, resonance factorization, Wick weight sums
"""

__version__ = "0.1.0"
