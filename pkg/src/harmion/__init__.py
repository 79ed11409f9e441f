"""Two-photon ionization of hydrogenic atoms by combs of odd harmonics.

Subpackages cover the field construction, a combinatorial path-counting
model, the B-spline radial basis, time propagation, photoelectron spectrum
analysis, lowest-order perturbation theory, and campaign orchestration.
"""

__version__ = "0.1.0"
