"""B-spline radial basis and field-free hydrogenic eigensystems.

The radial wavefunction u(r) = r R(r) of each angular channel is expanded on
B-splines over [0, r_max] with the two boundary splines removed (hard wall at
both ends).  All operator matrices are assembled by per-interval
Gauss-Legendre quadrature and are banded with bandwidth spline_order - 1.

Channel Hamiltonian:  H_l = -1/2 d^2/dr^2 + l(l+1)/(2 r^2) - Z/r
Generalized eigenproblem H c = E S c gives bound Rydberg states plus a
discretized (box-normalized) continuum used everywhere downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import eigh


@dataclass(frozen=True)
class HydrogenicSpec:
    """Bare Coulomb atom/ion: nuclear charge Z and initial (n, l)."""

    nuclear_charge: int
    initial_n: int = 1
    initial_l: int = 0

    def __post_init__(self):
        if self.nuclear_charge < 1:
            raise ValueError("nuclear charge must be a positive integer")
        if not 0 <= self.initial_l < self.initial_n:
            raise ValueError("require 0 <= l < n")
        if (self.initial_n, self.initial_l) not in ((1, 0), (2, 0)):
            raise ValueError("supported initial states: (1,0) and (2,0)")

    @property
    def binding_energy_au(self) -> float:
        return 0.5 * self.nuclear_charge**2 / self.initial_n**2

    def bound_energy(self, n: int) -> float:
        return -0.5 * self.nuclear_charge**2 / n**2


def _breakpoints(box_radius: float, n_breakpoints: int, grid_law: str,
                 inner_radius: float = 30.0, inner_fraction: float = 0.25):
    if grid_law == "linear":
        return np.linspace(0.0, box_radius, n_breakpoints)
    if grid_law == "two_zone":
        # dense uniform zone near the nucleus, coarser uniform zone outside
        if box_radius <= inner_radius:
            return np.linspace(0.0, box_radius, n_breakpoints)
        n_in = max(8, int(round(inner_fraction * n_breakpoints)))
        inner = np.linspace(0.0, inner_radius, n_in)
        outer = np.linspace(inner_radius, box_radius, n_breakpoints - n_in + 1)
        return np.concatenate([inner, outer[1:]])
    raise ValueError(f"unknown grid law {grid_law!r}")


@dataclass
class RadialBasis:
    """B-spline discretization of [0, r_max] with hard-wall boundaries."""

    spline_order: int
    breakpoints: np.ndarray
    knots: np.ndarray
    n_basis: int
    quad_points: np.ndarray
    quad_weights: np.ndarray
    bval: np.ndarray   # (n_quad, n_basis) basis values at quadrature points
    bder: np.ndarray   # (n_quad, n_basis) first derivatives
    _moments: dict = dc_field(default_factory=dict, repr=False)

    @property
    def box_radius(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def bandwidth(self) -> int:
        return self.spline_order - 1

    def fingerprint(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(np.int64(self.spline_order).tobytes())
        h.update(np.asarray(self.breakpoints, dtype=float).tobytes())
        return h.hexdigest()[:16]

    def _assemble(self, weight: np.ndarray, derivative: bool = False) -> np.ndarray:
        B = self.bder if derivative else self.bval
        return (B * (self.quad_weights * weight)[:, None]).T @ B

    def moment(self, power: int) -> np.ndarray:
        """<B_i | r^power | B_j> as a dense symmetric (banded) matrix."""
        if power not in self._moments:
            r = self.quad_points
            self._moments[power] = self._assemble(r.astype(float) ** power)
        return self._moments[power]

    def overlap(self) -> np.ndarray:
        return self.moment(0)

    def kinetic(self) -> np.ndarray:
        """<B_i | -1/2 d^2/dr^2 | B_j> (boundary terms vanish)."""
        if "kin" not in self._moments:
            self._moments["kin"] = 0.5 * self._assemble(
                np.ones_like(self.quad_points), derivative=True)
        return self._moments["kin"]

    def hamiltonian(self, nuclear_charge: int, l: int) -> np.ndarray:
        H = self.kinetic() - nuclear_charge * self.moment(-1)
        if l > 0:
            H = H + 0.5 * l * (l + 1) * self.moment(-2)
        return H

    def overlap_outer(self, fraction: float = 0.9) -> np.ndarray:
        """Overlap restricted to r > fraction * r_max (boundary diagnostics)."""
        key = ("outer", fraction)
        if key not in self._moments:
            mask = (self.quad_points > fraction * self.box_radius).astype(float)
            self._moments[key] = self._assemble(mask)
        return self._moments[key]

    def evaluate(self, coefs: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Radial function u(r) for a coefficient vector."""
        full = np.zeros(len(coefs) + 2, dtype=complex)
        full[1:-1] = coefs
        spl = BSpline(self.knots, full.real, self.spline_order - 1)
        out = spl(np.asarray(r, dtype=float))
        if np.iscomplexobj(coefs):
            spl_im = BSpline(self.knots, full.imag, self.spline_order - 1)
            out = out + 1j * spl_im(np.asarray(r, dtype=float))
        return out


def build_basis(box_radius: float, n_breakpoints: int, spline_order: int = 7,
                grid_law: str = "two_zone") -> RadialBasis:
    """Construct the basis and its quadrature rule.

    Gauss-Legendre with spline_order + 1 points per interval integrates
    products of two splines times r exactly and r^-1, r^-2 to high accuracy
    (splines vanish at r = 0, so the integrands are regular).
    """
    if box_radius <= 0:
        raise ValueError("box radius must be positive")
    if n_breakpoints < spline_order + 2:
        raise ValueError("need at least spline_order + 2 breakpoints")
    if spline_order < 4:
        raise ValueError("spline order must be >= 4")
    bp = _breakpoints(box_radius, n_breakpoints, grid_law)
    if np.any(np.diff(bp) <= 0):
        raise ValueError("breakpoints must be strictly increasing")

    k = spline_order
    degree = k - 1
    knots = np.concatenate([np.full(degree, bp[0]), bp, np.full(degree, bp[-1])])
    n_total = len(knots) - k          # number of B-splines on this knot vector
    n_basis = n_total - 2             # drop the two boundary splines

    # per-interval Gauss-Legendre rule
    gx, gw = np.polynomial.legendre.leggauss(k + 1)
    a, b = bp[:-1], bp[1:]
    half = 0.5 * (b - a)
    quad_points = (half[:, None] * (gx[None, :] + 1.0) + a[:, None]).ravel()
    quad_weights = (half[:, None] * gw[None, :]).ravel()

    ident = np.eye(n_total)
    bval = np.empty((len(quad_points), n_basis))
    bder = np.empty_like(bval)
    for j in range(1, n_total - 1):
        spl = BSpline(knots, ident[j], degree)
        bval[:, j - 1] = spl(quad_points)
        bder[:, j - 1] = spl.derivative()(quad_points)

    return RadialBasis(k, bp, knots, n_basis, quad_points, quad_weights, bval, bder)


def angular_factor(l_lower: int) -> float:
    """<l+1, m=0 | cos(theta) | l, m=0> for the lower of the two l values."""
    l = l_lower
    return (l + 1) / math.sqrt((2 * l + 1) * (2 * l + 3))


def dipole_matrix(basis: RadialBasis, l: int, lp: int) -> np.ndarray:
    """<B_i | z | B_j> block between channels l and l' (m = 0)."""
    if abs(l - lp) != 1:
        raise ValueError(f"dipole selection rule requires |l - l'| = 1, got {l}, {lp}")
    return angular_factor(min(l, lp)) * basis.moment(1)


@dataclass
class ChannelEigensystem:
    """Field-free eigenpairs of one angular channel, S-orthonormal."""

    l: int
    energies: np.ndarray           # ascending, a.u.
    coefficients: np.ndarray       # (n_basis, n_states), columns are states

    @property
    def n_states(self) -> int:
        return len(self.energies)

    def positive_mask(self) -> np.ndarray:
        return self.energies > 0.0

    def density_of_states(self) -> np.ndarray:
        """Local DOS 2/(E_{n+1} - E_{n-1}), one-sided at the ends."""
        E = self.energies
        rho = np.empty_like(E)
        rho[1:-1] = 2.0 / (E[2:] - E[:-2])
        rho[0] = 1.0 / (E[1] - E[0])
        rho[-1] = 1.0 / (E[-1] - E[-2])
        return rho


def _fix_signs(coefs: np.ndarray) -> np.ndarray:
    """Make the first significant coefficient (innermost lobe) positive."""
    for j in range(coefs.shape[1]):
        c = coefs[:, j]
        idx = np.argmax(np.abs(c) > 1e-2 * np.max(np.abs(c)))
        if c[idx] < 0:
            coefs[:, j] = -c
    return coefs


def solve_channel(basis: RadialBasis, spec: HydrogenicSpec, l: int) -> ChannelEigensystem:
    """All eigenpairs of the channel-l Hamiltonian in the spline basis."""
    if l < 0:
        raise ValueError("l must be non-negative")
    H = basis.hamiltonian(spec.nuclear_charge, l)
    S = basis.overlap()
    try:
        energies, coefs = eigh(H, S)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolve failed for channel l={l}: {exc}") from exc
    return ChannelEigensystem(l, energies, _fix_signs(coefs))


def initial_state(eigensystem: ChannelEigensystem, spec: HydrogenicSpec,
                  tol: float = 1e-6):
    """(energy, coefficients) of the requested bound state.

    Picks the eigenvalue nearest -Z^2/(2 n^2); fails if none is within tol.
    """
    if eigensystem.l != spec.initial_l:
        raise ValueError("eigensystem channel does not match requested state")
    target = spec.bound_energy(spec.initial_n)
    idx = int(np.argmin(np.abs(eigensystem.energies - target)))
    if abs(eigensystem.energies[idx] - target) > tol:
        raise RuntimeError(
            f"no eigenvalue within {tol} of {target}; basis too small "
            f"(closest: {eigensystem.energies[idx]})")
    return float(eigensystem.energies[idx]), eigensystem.coefficients[:, idx].copy()


@lru_cache(maxsize=8)
def _cached_basis(box_radius: float, n_breakpoints: int, spline_order: int,
                  grid_law: str) -> RadialBasis:
    return build_basis(box_radius, n_breakpoints, spline_order, grid_law)


def get_basis(box_radius: float, n_breakpoints: int, spline_order: int = 7,
              grid_law: str = "two_zone") -> RadialBasis:
    """Memoized build_basis; repeated campaign runs share one basis."""
    return _cached_basis(float(box_radius), int(n_breakpoints),
                         int(spline_order), grid_law)
