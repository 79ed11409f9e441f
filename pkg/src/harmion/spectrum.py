"""Energy-resolved photoelectron analysis of a propagated wavefunction.

The final state is projected on the field-free box eigenstates of every
channel.  Positive-energy amplitudes carry a local density-of-states factor
rho_n = 2/(E_{n+1} - E_{n-1}) turning box populations into a per-energy
density; the directional spectrum along the polarization axis adds the
Coulomb phases sigma_l = arg Gamma(l + 1 - iZ/k) in the coherent partial-wave
sum.  Peak bookkeeping assigns windows of half-width hbar*w_L around every
energy-conserving combination of n photons, so windows of one order tile the
axis without gaps; integrals over windows are computed as sums of the box
populations inside the window, which keeps closure with the bound part exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.special import loggamma

from .basis import ChannelEigensystem, HydrogenicSpec
from .field import HarmonicComb
from .units import au_to_ev


@dataclass
class ChannelAmplitudes:
    """Per-channel continuum amplitudes and bound populations."""

    energies: list            # per l: ndarray of positive energies (a.u.)
    amplitudes: list          # per l: complex <n,l|S|psi_l>, box-normalized
    dos: list                 # per l: rho_n (a.u.^-1)
    bound_populations: list   # per l: ndarray |a|^2 of E < 0 states
    bound_energies: list      # per l: ndarray of E < 0 energies

    @property
    def l_max(self) -> int:
        return len(self.energies) - 1

    def continuum_total(self) -> float:
        return float(sum(np.sum(np.abs(a) ** 2) for a in self.amplitudes))

    def bound_total(self) -> float:
        return float(sum(np.sum(p) for p in self.bound_populations))

    def window_probability(self, lo: float, hi: float) -> float:
        """Continuum population with lo <= E < hi (a.u.), all channels."""
        total = 0.0
        for E, a in zip(self.energies, self.amplitudes):
            sel = (E >= lo) & (E < hi)
            total += float(np.sum(np.abs(a[sel]) ** 2))
        return total

    def window_centroid(self, lo: float, hi: float) -> float:
        num = den = 0.0
        for E, a in zip(self.energies, self.amplitudes):
            sel = (E >= lo) & (E < hi)
            w = np.abs(a[sel]) ** 2
            num += float(np.sum(E[sel] * w))
            den += float(np.sum(w))
        return num / den if den > 0 else 0.5 * (lo + hi)


def project_continuum(final_state, eigensystems: list[ChannelEigensystem],
                      overlap: np.ndarray) -> ChannelAmplitudes:
    """Spectral decomposition of the final wavefunction.

    final_state: WavefunctionState (coefficients per channel).
    eigensystems: one ChannelEigensystem per l, same order as the state.
    """
    C = final_state.coefficients
    if len(eigensystems) != C.shape[0]:
        raise ValueError("need one eigensystem per angular channel")
    energies, amplitudes, dos, bpops, bens = [], [], [], [], []
    for l, es in enumerate(eigensystems):
        a = es.coefficients.T @ (overlap @ C[l])
        pos = es.positive_mask()
        if np.count_nonzero(pos) < 3:
            raise RuntimeError(
                f"channel l={l} has fewer than 3 positive-energy states; "
                "basis too small")
        energies.append(es.energies[pos])
        amplitudes.append(a[pos])
        dos.append(es.density_of_states()[pos])
        bpops.append(np.abs(a[~pos]) ** 2)
        bens.append(es.energies[~pos])
    return ChannelAmplitudes(energies, amplitudes, dos, bpops, bens)


def coulomb_phase(l: int, energy_au: np.ndarray, Z: float) -> np.ndarray:
    """sigma_l(E) = arg Gamma(l + 1 - iZ/k), k = sqrt(2E)."""
    k = np.sqrt(2.0 * np.asarray(energy_au, dtype=float))
    return np.imag(loggamma(l + 1 - 1j * Z / k))


@dataclass
class PhotoelectronSpectrum:
    """Directional and angle-integrated densities on a common energy grid."""

    energy_grid_ev: np.ndarray
    directional_density: np.ndarray   # |coherent partial-wave sum|^2, per eV per sr
    total_density: np.ndarray         # sum_l |a~_l|^2, per eV
    amplitudes: ChannelAmplitudes = dc_field(repr=False, default=None)


def directional_spectrum(amps: ChannelAmplitudes, Z: float,
                         energy_grid_au: np.ndarray | None = None,
                         n_points: int = 4000,
                         e_max_au: float = 6.0) -> PhotoelectronSpectrum:
    """Spectrum along the polarization direction (theta = 0), m = 0.

    Channel amplitudes are density-of-states normalized and linearly
    interpolated in energy; the coherent sum uses (-i)^l e^{i sigma_l} Y_l0(0).
    """
    if energy_grid_au is None:
        e_max = min(e_max_au, max(E[-1] for E in amps.energies))
        energy_grid_au = np.linspace(1e-4, e_max, n_points)
    coherent = np.zeros(len(energy_grid_au), dtype=complex)
    total = np.zeros(len(energy_grid_au))
    for l in range(amps.l_max + 1):
        E = amps.energies[l]
        a_tilde = amps.amplitudes[l] * np.sqrt(amps.dos[l])
        re = np.interp(energy_grid_au, E, a_tilde.real, left=0.0, right=0.0)
        im = np.interp(energy_grid_au, E, a_tilde.imag, left=0.0, right=0.0)
        a_grid = re + 1j * im
        total += np.abs(a_grid) ** 2
        y_l0 = math.sqrt((2 * l + 1) / (4.0 * math.pi))
        sigma = coulomb_phase(l, energy_grid_au, Z) if Z > 0 else 0.0
        coherent += (-1j) ** l * np.exp(1j * sigma) * y_l0 * a_grid
    ev = au_to_ev(1.0)
    return PhotoelectronSpectrum(
        energy_grid_ev=energy_grid_au * ev,
        directional_density=np.abs(coherent) ** 2 / ev,
        total_density=total / ev,
        amplitudes=amps)


@dataclass
class PeakRecord:
    photon_order: int
    peak_index: int            # 1-based within its order
    expected_energy_ev: float
    centroid_ev: float
    probability: float
    window_ev: tuple
    overlaps_other_order: bool = False


@dataclass
class PeakTable:
    records: list

    def order_records(self, order: int) -> list:
        recs = [r for r in self.records if r.photon_order == order]
        if not recs:
            raise ValueError(f"no peaks of photon order {order}")
        return recs

    def central_record(self, order: int = 2) -> PeakRecord:
        """Middle peak of the order's full comb (index (max+1)//2).

        The highest-index peaks always have positive energy, so the maximum
        observed index equals the comb length even when low-energy peaks
        were dropped.
        """
        recs = self.order_records(order)
        central_idx = (max(r.peak_index for r in recs) + 1) // 2
        for r in recs:
            if r.peak_index == central_idx:
                return r
        raise ValueError(f"central peak of order {order} is below threshold")


def expected_peak_energies(comb: HarmonicComb, ip_au: float, order: int):
    """Energy-conserving final energies for `order`-photon absorption (a.u.)."""
    w = comb.fundamental_au
    q_lo, q_hi = min(comb.orders), max(comb.orders)
    sums = range(order * q_lo, order * q_hi + 1, 2)
    return [s * w - ip_au for s in sums]


def locate_peaks(amps: ChannelAmplitudes, comb: HarmonicComb,
                 spec: HydrogenicSpec, n_orders: int = 3) -> PeakTable:
    """Assign expected peak positions and integrate windows of width 2 hbar w_L."""
    w = comb.fundamental_au
    ip = spec.binding_energy_au
    q_hi = max(comb.orders)
    n_min = 1
    while n_min * q_hi * w - ip <= 0:
        n_min += 1
    records = []
    windows_by_order = {}
    for order in range(n_min, n_min + n_orders):
        expected = expected_peak_energies(comb, ip, order)
        wins = []
        for idx, e_exp in enumerate(expected, start=1):
            if e_exp <= 0:
                continue
            lo, hi = e_exp - w, e_exp + w
            wins.append((lo, hi))
            records.append(PeakRecord(
                photon_order=order,
                peak_index=idx,
                expected_energy_ev=au_to_ev(e_exp),
                centroid_ev=au_to_ev(amps.window_centroid(lo, hi)),
                probability=amps.window_probability(lo, hi),
                window_ev=(au_to_ev(lo), au_to_ev(hi))))
        windows_by_order[order] = wins
        for (lo1, hi1), (lo2, hi2) in zip(wins, wins[1:]):
            if hi1 > lo2 + 1e-12:
                raise RuntimeError(
                    f"window collision within photon order {order}")
    for rec in records:
        lo, hi = rec.window_ev
        for other, wins in windows_by_order.items():
            if other == rec.photon_order:
                continue
            if any(lo < au_to_ev(h) and au_to_ev(l2) < hi for l2, h in wins):
                rec.overlaps_other_order = True
                break
    return PeakTable(records)


def integrate_order_subset(table: PeakTable, order: int) -> float:
    """Total probability in the union of the order's windows."""
    return float(sum(r.probability for r in table.order_records(order)))


def central_peak_probability(table: PeakTable, order: int = 2) -> float:
    return float(table.central_record(order).probability)
