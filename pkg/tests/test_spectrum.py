import math

import numpy as np
import pytest

from harmion.basis import HydrogenicSpec, initial_state, solve_channel
from harmion.field import HarmonicComb, LockedPhases, PulseEnvelope
from harmion.propagator import Propagator, propagate_pulse
from harmion.spectrum import (ChannelAmplitudes, central_peak_probability,
                              coulomb_phase, directional_spectrum,
                              expected_peak_energies, integrate_order_subset,
                              locate_peaks, project_continuum)
from harmion.units import ev_to_au

H_ATOM = HydrogenicSpec(1, 1, 0)
H_2S = HydrogenicSpec(1, 2, 0)


def empty_amplitudes(l_max=2, e_max=4.0, n=2000):
    """Synthetic continuum with no population, for window bookkeeping tests."""
    E = np.linspace(0.01, e_max, n)
    rho = np.full(n, 2.0 / (E[2] - E[0]))
    return ChannelAmplitudes([E.copy() for _ in range(l_max + 1)],
                             [np.zeros(n, complex) for _ in range(l_max + 1)],
                             [rho.copy() for _ in range(l_max + 1)],
                             [np.zeros(0) for _ in range(l_max + 1)],
                             [np.zeros(0) for _ in range(l_max + 1)])


@pytest.fixture(scope="module")
def single_harmonic_run(mid_basis):
    """H(1s) under a single weak H15 pulse: one dominant 1-photon line."""
    eigensystems = [solve_channel(mid_basis, H_ATOM, l) for l in range(3)]
    prop = Propagator(mid_basis, H_ATOM, 2, 0.08)
    _, c0 = initial_state(eigensystems[0], H_ATOM)
    comb = HarmonicComb.build(1.5, [15], 1e12, LockedPhases())
    final, _ = propagate_pulse(prop, prop.make_initial_state(c0), comb,
                               PulseEnvelope(2.0))
    amps = project_continuum(final, eigensystems, mid_basis.overlap())
    return prop, final, amps, comb


class TestProjection:
    def test_stationary_state_has_no_continuum(self, mid_basis):
        eigensystems = [solve_channel(mid_basis, H_ATOM, l) for l in range(2)]
        prop = Propagator(mid_basis, H_ATOM, 1, 0.08)
        _, c0 = initial_state(eigensystems[0], H_ATOM)
        state = prop.make_initial_state(c0)
        amps = project_continuum(state, eigensystems, mid_basis.overlap())
        assert all(np.max(np.abs(a)) < 1e-10 for a in amps.amplitudes)
        assert amps.bound_total() == pytest.approx(1.0, abs=1e-12)

    def test_closure(self, single_harmonic_run):
        prop, final, amps, _ = single_harmonic_run
        total = amps.bound_total() + amps.continuum_total()
        assert total == pytest.approx(prop.norm(final), abs=1e-10)

    def test_single_photon_line_position(self, single_harmonic_run):
        _, _, amps, _ = single_harmonic_run
        p = np.abs(amps.amplitudes[1]) ** 2
        e_line = amps.energies[1][np.argmax(p)]
        assert e_line == pytest.approx(ev_to_au(15 * 1.5 - 13.6), abs=ev_to_au(0.8))

    def test_p_channel_dominates_one_photon(self, single_harmonic_run):
        _, _, amps, _ = single_harmonic_run
        per_l = [float(np.sum(np.abs(a) ** 2)) for a in amps.amplitudes]
        assert per_l[1] > 10.0 * (per_l[0] + per_l[2])

    def test_too_few_continuum_states(self):
        from harmion.basis import build_basis
        from harmion.propagator import WavefunctionState
        tiny = build_basis(400.0, 12, 7, "linear")
        eigensystems = [solve_channel(tiny, H_ATOM, 0)]
        state = WavefunctionState(np.zeros((1, tiny.n_basis), complex))
        if np.count_nonzero(eigensystems[0].energies > 0) < 3:
            with pytest.raises(RuntimeError):
                project_continuum(state, eigensystems, tiny.overlap())


class TestCoulombPhase:
    def test_recurrence(self):
        # arg Gamma(l+2-ix) - arg Gamma(l+1-ix) = arg(l+1-ix)
        E = np.array([0.1, 0.5, 1.0, 3.0])
        k = np.sqrt(2 * E)
        for Z in (1.0, 2.0):
            for l in range(4):
                d = coulomb_phase(l + 1, E, Z) - coulomb_phase(l, E, Z)
                assert d == pytest.approx(np.angle((l + 1) - 1j * Z / k), abs=1e-12)

    def test_neutral_limit(self):
        assert np.all(coulomb_phase(2, np.array([0.5, 1.0]), 0.0) == 0.0)


class TestDirectionalSpectrum:
    def test_single_channel_proportionality(self):
        amps = empty_amplitudes(l_max=1)
        amps.amplitudes[1][:] = 0.01
        spec = directional_spectrum(amps, Z=0.0)
        y = 3.0 / (4.0 * math.pi)
        good = spec.total_density > 0
        ratio = spec.directional_density[good] / (spec.total_density[good] * y)
        assert np.allclose(ratio, 1.0, atol=1e-9)

    def test_density_nonnegative(self, single_harmonic_run):
        _, _, amps, _ = single_harmonic_run
        spec = directional_spectrum(amps, Z=1.0)
        assert np.all(spec.directional_density >= 0.0)
        assert np.all(np.diff(spec.energy_grid_ev) > 0)


class TestPeakTable:
    def test_expected_energies_h1s_n5(self):
        comb = HarmonicComb.build(1.5, [11, 13, 15, 17, 19], 1e13, LockedPhases())
        e2 = expected_peak_energies(comb, ev_to_au(13.6), 2)
        assert len(e2) == 9
        central_ev = e2[4] / ev_to_au(1.0)
        assert central_ev == pytest.approx(2 * 15 * 1.5 - 13.6, abs=1e-9)

    def test_peak_spacing_two_photons(self):
        comb = HarmonicComb.build(1.5, [11, 13, 15, 17, 19], 1e13, LockedPhases())
        for order in (1, 2, 3):
            e = expected_peak_energies(comb, ev_to_au(13.6), order)
            spacing = np.diff(e) / ev_to_au(1.0)
            assert np.allclose(spacing, 2 * 1.5, rtol=1e-9)

    def test_h2s_two_photon_span(self):
        comb = HarmonicComb.build(1.5, [15, 17, 19, 21, 23, 25, 27], 1e10,
                                  LockedPhases())
        e2 = np.array(expected_peak_energies(comb, ev_to_au(3.4), 2))
        ev = e2 / ev_to_au(1.0)
        assert ev[0] == pytest.approx(41.6, abs=0.05)
        assert ev[-1] == pytest.approx(77.6, abs=0.05)

    def test_subset_sizes_and_flags(self):
        comb = HarmonicComb.build(1.5, [11, 13, 15, 17, 19], 1e13, LockedPhases())
        table = locate_peaks(empty_amplitudes(e_max=4.0), comb, H_ATOM)
        assert len(table.order_records(1)) == 5
        assert len(table.order_records(2)) == 9
        assert len(table.order_records(3)) == 13
        # 3-photon subset starts at 35.9 eV, inside the 2-photon range
        two = table.order_records(2)
        flagged = [r.expected_energy_ev for r in two if r.overlaps_other_order]
        assert flagged and min(flagged) > 34.0
        assert not any(r.overlaps_other_order
                       for r in two if r.expected_energy_ev < 33.0)

    def test_single_harmonic_one_peak_per_order(self):
        comb = HarmonicComb.build(1.5, [15], 1e13, LockedPhases())
        table = locate_peaks(empty_amplitudes(e_max=4.0), comb, H_ATOM)
        for order in (1, 2, 3):
            assert len(table.order_records(order)) == 1

    def test_central_record_index(self):
        comb = HarmonicComb.build(1.5, [11, 13, 15, 17, 19], 1e13, LockedPhases())
        table = locate_peaks(empty_amplitudes(e_max=4.0), comb, H_ATOM)
        rec = table.central_record(2)
        assert rec.peak_index == 5
        assert rec.expected_energy_ev == pytest.approx(2 * 15 * 1.5 - 13.6057,
                                                       abs=0.01)

    def test_central_record_robust_to_dropped_peaks(self):
        # H(2s) threshold drops no 2-photon peaks, but the 2-photon comb of a
        # deeply bound ion loses low peaks; the central index must not shift
        comb = HarmonicComb.build(1.55, [19, 21, 23, 25], 1.2e12, LockedPhases())
        table = locate_peaks(empty_amplitudes(e_max=4.0), comb,
                             HydrogenicSpec(2, 1, 0))
        rec = table.central_record(2)
        assert rec.peak_index == 4
        assert rec.expected_energy_ev == pytest.approx(2 * 22 * 1.55 - 54.4227,
                                                       abs=0.01)

    def test_missing_order_raises(self):
        comb = HarmonicComb.build(1.5, [15], 1e13, LockedPhases())
        table = locate_peaks(empty_amplitudes(), comb, H_ATOM)
        with pytest.raises(ValueError):
            table.order_records(7)

    def test_integrated_subsets_on_real_run(self, single_harmonic_run):
        _, _, amps, comb = single_harmonic_run
        table = locate_peaks(amps, comb, H_ATOM)
        p1 = integrate_order_subset(table, 1)
        p2 = integrate_order_subset(table, 2)
        assert p1 > 100.0 * p2 > 0.0
        assert central_peak_probability(table, 1) == pytest.approx(p1)
