import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import kstest

from harmion.field import (ExplicitPhases, HarmonicComb, LockedPhases,
                           PulseEnvelope, RandomPhases, intensity_to_amplitude,
                           make_phases, orders_centered, orders_from_lowest,
                           sample_field)
from harmion.units import ev_to_au

TWO_PI = 2.0 * math.pi


class TestIntensityConversion:
    def test_atomic_unit_of_intensity(self):
        assert intensity_to_amplitude(3.50944758e16) == pytest.approx(1.0, abs=1e-12)

    def test_1e13(self):
        assert intensity_to_amplitude(1.0e13) == pytest.approx(1.688e-2, abs=1e-5)

    def test_1e10(self):
        assert intensity_to_amplitude(1.0e10) == pytest.approx(5.338e-4, abs=1e-7)

    @pytest.mark.parametrize("bad", [0.0, -1.0, -3.5e16])
    def test_rejects_non_positive(self, bad):
        with pytest.raises(ValueError):
            intensity_to_amplitude(bad)


class TestPhaseSchemes:
    def test_locked_zero_gives_zeros(self):
        phases = make_phases(LockedPhases(0.0, 0.0), [11, 13, 15, 17, 19])
        assert np.all(phases == 0.0)

    @given(beta=st.floats(-5, 5), zeta=st.floats(-10, 10),
           lowest=st.integers(1, 30).map(lambda i: 2 * i + 1),
           n=st.integers(3, 9))
    def test_locked_triple_identity(self, beta, zeta, lowest, n):
        w = ev_to_au(1.5)
        orders = orders_from_lowest(lowest, n)
        raw = np.array([beta * q * w + zeta for q in orders])
        for a, b, c in zip(raw, raw[1:], raw[2:]):
            assert a + c - 2 * b == pytest.approx(0.0, abs=1e-9)

    def test_random_deterministic(self):
        orders = [11, 13, 15, 17, 19]
        p1 = make_phases(RandomPhases(42), orders)
        p2 = make_phases(RandomPhases(42), orders)
        assert np.array_equal(p1, p2)

    def test_random_seeds_differ(self):
        orders = [11, 13, 15]
        assert not np.array_equal(make_phases(RandomPhases(1), orders),
                                  make_phases(RandomPhases(2), orders))

    def test_phases_in_range(self):
        phases = make_phases(RandomPhases(3), orders_from_lowest(1, 50))
        assert np.all((phases >= 0.0) & (phases < TWO_PI))

    def test_random_uniformity_ks(self):
        orders = orders_from_lowest(1, 10_000)
        phases = make_phases(RandomPhases(7), orders)
        stat = kstest(phases / TWO_PI, "uniform").statistic
        assert stat < 1.63 / math.sqrt(len(phases))   # 1% critical value

    def test_explicit_length_mismatch(self):
        with pytest.raises(ValueError):
            make_phases(ExplicitPhases((0.0, 1.0)), [11, 13, 15])


class TestCombInvariants:
    def test_rejects_even_order(self):
        with pytest.raises(ValueError):
            HarmonicComb.build(1.5, [11, 12], 1e13, LockedPhases())

    def test_rejects_non_consecutive(self):
        with pytest.raises(ValueError):
            HarmonicComb.build(1.5, [11, 15], 1e13, LockedPhases())

    def test_rejects_descending(self):
        with pytest.raises(ValueError):
            HarmonicComb.build(1.5, [15, 13], 1e13, LockedPhases())

    def test_orders_centered_growth(self):
        assert orders_centered(15, 2) == [13, 15]
        assert orders_centered(15, 3) == [13, 15, 17]
        assert orders_centered(15, 4) == [11, 13, 15, 17]
        assert orders_centered(15, 5) == [11, 13, 15, 17, 19]


class TestEnvelope:
    def test_total_duration_default(self):
        env = PulseEnvelope(5.0)
        assert env.total_duration_fs == 10.0

    def test_bounds_and_peak(self):
        env = PulseEnvelope(5.0)
        t = np.linspace(-10.0, env.total_duration_au + 10.0, 5001)
        f = env(t)
        assert np.all((f >= 0.0) & (f <= 1.0))
        assert env(0.5 * env.total_duration_au) == pytest.approx(1.0)
        assert env(-1.0) == 0.0
        assert env(env.total_duration_au + 1.0) == 0.0


class TestSampleField:
    def _aligned_comb(self, orders, intensity=1e13):
        """Comb whose carriers all peak at the envelope center."""
        env = PulseEnvelope(5.0)
        tc = 0.5 * env.total_duration_au
        w = ev_to_au(1.5)
        phases = [(-q * w * tc) % TWO_PI for q in orders]
        comb = HarmonicComb.build(1.5, orders, intensity, ExplicitPhases(tuple(phases)))
        return comb, env, tc

    def test_single_order_maximum(self):
        comb, env, tc = self._aligned_comb([11])
        assert sample_field(comb, env, tc) == pytest.approx(
            comb.amplitude_per_order, rel=1e-12)

    def test_constructive_sum(self):
        comb, env, tc = self._aligned_comb([11, 13, 15, 17, 19])
        assert sample_field(comb, env, tc) == pytest.approx(
            5.0 * comb.amplitude_per_order, rel=1e-12)

    def test_burst_spacing_half_fundamental_period(self):
        comb = HarmonicComb.build(1.5, [11, 13, 15, 17, 19], 1e13, LockedPhases())
        env = PulseEnvelope(5.0)
        tc = 0.5 * env.total_duration_au
        t = np.linspace(tc - 150.0, tc + 150.0, 60_000)
        e2 = sample_field(comb, env, t) ** 2
        # average out the carrier (period 2 pi / (15 w)) to get burst envelopes
        dt = t[1] - t[0]
        win = int(round(2 * math.pi / (15 * comb.fundamental_au) / dt))
        smooth = np.convolve(e2, np.ones(win) / win, mode="same")
        # cluster above-threshold samples into bursts (gaps > 10 a.u. split)
        idx = np.flatnonzero(smooth > 0.5 * smooth.max())
        splits = np.flatnonzero(np.diff(t[idx]) > 10.0) + 1
        centers = [np.average(t[grp], weights=smooth[grp])
                   for grp in np.split(idx, splits)]
        spacings = np.diff(centers)
        expected = math.pi / comb.fundamental_au
        assert np.all(np.abs(spacings - expected) < 0.05 * expected)

    def test_parseval_flat_region(self):
        comb = HarmonicComb.build(1.5, [11, 13, 15, 17, 19], 1e13,
                                  RandomPhases(5))
        env = PulseEnvelope(5.0)
        tc = 0.5 * env.total_duration_au
        period = TWO_PI / comb.fundamental_au
        t = np.linspace(tc - period / 2, tc + period / 2, 40_001)
        carrier = sample_field(comb, env, t) / env(t)
        mean_sq = np.trapezoid(carrier**2, t) / period
        expected = comb.n_harmonics * comb.amplitude_per_order**2 / 2.0
        assert mean_sq == pytest.approx(expected, rel=0.01)

    def test_zero_outside_pulse(self):
        comb = HarmonicComb.build(1.5, [11, 13], 1e13, LockedPhases())
        env = PulseEnvelope(5.0)
        assert sample_field(comb, env, -5.0) == 0.0
        assert sample_field(comb, env, env.total_duration_au + 5.0) == 0.0
