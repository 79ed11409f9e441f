"""Lowest-order two-photon transition amplitudes and path interference.

The two-photon amplitude from the ground state |g> to a continuum state |f>
at E_f = E_g + w1 + w2 is

    M(w1, w2) = sum_n <f|z|n> <n|z|g> / (E_g + w1 - E_n)

summed over the full discretized intermediate p-channel spectrum (bound and
box continuum).  The final state is the box eigenstate nearest the target
energy, carrying a sqrt(density-of-states) normalization so magnitudes vary
smoothly with energy.  An independent Dalgarno-Lewis route solves the
inhomogeneous radial equation (E_g + w1 - H_1)|lam> = z|g> and evaluates
<f|z|lam>, bypassing the spectral sum.

Signs follow the convention that every radial eigenfunction has a positive
innermost lobe; only relative signs across a grid are physically meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve as dense_solve

from .basis import (ChannelEigensystem, HydrogenicSpec, RadialBasis,
                    angular_factor, initial_state, solve_channel)
from .units import au_to_ev, ev_to_au

PATHWAYS = {"spd": (0, 1, 2), "sps": (0, 1, 0)}


@dataclass(frozen=True)
class InterferenceQuery:
    """Triple of phases; interference is governed by d = p1 + p3 - 2 p2."""

    phi1: float
    phi2: float
    phi3: float

    @property
    def delta(self) -> float:
        d = self.phi1 + self.phi3 - 2.0 * self.phi2
        d = math.remainder(d, 2.0 * math.pi)
        if d <= -math.pi:
            d += 2.0 * math.pi
        return d


@dataclass
class TwoPhotonElement:
    first_order: int | None
    second_order: int | None
    pathway: str
    value: float                 # signed, a.u. with sqrt(DOS) final-state norm
    dl_value: float              # Dalgarno-Lewis cross-check
    final_energy_au: float
    resonant: bool
    nearest_resonance: tuple     # (state label, detuning in eV)

    @property
    def cross_check_error(self) -> float:
        return abs(self.value - self.dl_value) / max(abs(self.value), 1e-300)


class PerturbationEngine:
    """Caches eigensystems and dipole blocks for repeated amplitude evaluations."""

    def __init__(self, basis: RadialBasis, spec: HydrogenicSpec):
        self.basis = basis
        self.spec = spec
        self._eig: dict[int, ChannelEigensystem] = {}
        self.R = basis.moment(1)
        self.S = basis.overlap()

    def eigensystem(self, l: int) -> ChannelEigensystem:
        if l not in self._eig:
            self._eig[l] = solve_channel(self.basis, self.spec, l)
        return self._eig[l]

    def ground_state(self):
        return initial_state(self.eigensystem(self.spec.initial_l), self.spec)

    def _nearest_bound_resonance(self, e_intermediate: float):
        es = self.eigensystem(1)
        bound = es.energies[es.energies < 0]
        if len(bound) == 0:
            return ("none", math.inf)
        idx = int(np.argmin(np.abs(bound - e_intermediate)))
        n_eff = self.spec.nuclear_charge / math.sqrt(-2.0 * bound[idx])
        label = f"{int(round(n_eff))}p"
        return (label, au_to_ev(e_intermediate - bound[idx]))

    def two_photon_element(self, w1_au: float, w2_au: float,
                           pathway: str = "spd") -> TwoPhotonElement:
        """Signed amplitude for absorbing w1 then w2 (a.u. frequencies)."""
        if pathway not in PATHWAYS:
            raise ValueError(f"pathway must be one of {sorted(PATHWAYS)}")
        l_g, l_i, l_f = PATHWAYS[pathway]
        if l_g != self.spec.initial_l:
            raise ValueError("pathway must start from the initial channel")
        e_g, g = self.ground_state()
        e_int = e_g + w1_au
        e_f = e_int + w2_au
        if e_f <= 0:
            raise ValueError(f"final energy {e_f} not in the continuum")

        es_i = self.eigensystem(l_i)
        es_f = self.eigensystem(l_f)
        pos = es_f.positive_mask()
        rel = int(np.argmin(np.abs(es_f.energies[pos] - e_f)))
        f_idx = int(np.nonzero(pos)[0][rel])
        f = es_f.coefficients[:, f_idx]
        rho_f = es_f.density_of_states()[f_idx]

        c_first = angular_factor(min(l_g, l_i))
        c_second = angular_factor(min(l_i, l_f))
        u = es_i.coefficients.T @ (self.R @ g)          # <n|r|g>
        v = es_i.coefficients.T @ (self.R @ f)          # <n|r|f>
        denom = e_int - es_i.energies
        detuning = float(np.min(np.abs(denom)))
        value = c_first * c_second * float(np.sum(u * v / denom)) * math.sqrt(rho_f)

        # independent route: one linear solve instead of the spectral sum
        H_i = self.basis.hamiltonian(self.spec.nuclear_charge, l_i)
        lam = dense_solve(e_int * self.S - H_i, self.R @ g, assume_a="sym")
        dl_value = c_first * c_second * float(f @ (self.R @ lam)) * math.sqrt(rho_f)

        return TwoPhotonElement(
            first_order=None, second_order=None, pathway=pathway,
            value=value, dl_value=dl_value,
            final_energy_au=float(es_f.energies[f_idx]),
            resonant=detuning < 1e-4,
            nearest_resonance=self._nearest_bound_resonance(e_int))


def two_photon_element(spec: HydrogenicSpec, basis: RadialBasis,
                       w1_au: float, w2_au: float,
                       pathway: str = "spd") -> TwoPhotonElement:
    return PerturbationEngine(basis, spec).two_photon_element(w1_au, w2_au, pathway)


@dataclass
class ElementGrid:
    orders: list
    fundamental_ev: float
    pathway: str
    elements: list               # rows: first photon, columns: second photon

    def value(self, q1: int, q2: int) -> float:
        i, j = self.orders.index(q1), self.orders.index(q2)
        return self.elements[i][j].value

    def row_monotone_report(self) -> dict:
        """Per row: does |value| decrease as the second photon grows?"""
        report = {}
        for q1, row in zip(self.orders, self.elements):
            mags = [abs(e.value) for e in row]
            report[q1] = all(a > b for a, b in zip(mags, mags[1:]))
        return report

    def sign_pattern(self) -> dict:
        return {q1: [1 if e.value > 0 else -1 for e in row]
                for q1, row in zip(self.orders, self.elements)}

    def max_cross_check_error(self) -> float:
        return max(e.cross_check_error for row in self.elements for e in row)


def table_grid(spec: HydrogenicSpec, basis: RadialBasis, orders,
               fundamental_ev: float, pathway: str = "spd") -> ElementGrid:
    """Grid of two-photon elements over (first photon, second photon) orders."""
    engine = PerturbationEngine(basis, spec)
    w = ev_to_au(fundamental_ev)
    elements = []
    for q1 in orders:
        row = []
        for q2 in orders:
            el = engine.two_photon_element(q1 * w, q2 * w, pathway)
            el.first_order, el.second_order = q1, q2
            row.append(el)
        elements.append(row)
    return ElementGrid(list(orders), fundamental_ev, pathway, elements)


def predict_peak(contributions) -> float:
    """|sum_ij M_ij E_i E_j e^{i(phi_i + phi_j)}|^2 over ordered pairs.

    contributions: iterable of (M, E_i, E_j, phi_i, phi_j) sharing one final
    energy; ordered pairs (i, j) and (j, i) are both listed by the caller.
    """
    amp = sum(M * Ei * Ej * np.exp(1j * (pi + pj))
              for M, Ei, Ej, pi, pj in contributions)
    return float(abs(amp) ** 2)
