"""Polychromatic harmonic-comb electric field.

The field is a sum of consecutive odd harmonics of a fundamental laser
frequency, all with the same peak amplitude, under a cos^2 envelope:

    E(t) = E_o f(t) sum_q cos(q w_L t + phi_q)

Phases are generated by one of three schemes: locked (linear in the order),
explicit, or independent uniform random draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .units import ATOMIC_INTENSITY_W_CM2, ev_to_au, fs_to_au

TWO_PI = 2.0 * math.pi


def intensity_to_amplitude(intensity_w_cm2: float) -> float:
    """Peak field amplitude in a.u. for a given intensity in W/cm^2."""
    if intensity_w_cm2 <= 0:
        raise ValueError(f"intensity must be positive, got {intensity_w_cm2}")
    return math.sqrt(intensity_w_cm2 / ATOMIC_INTENSITY_W_CM2)


def _check_orders(orders) -> list[int]:
    orders = [int(q) for q in orders]
    if not orders:
        raise ValueError("orders must be non-empty")
    for q in orders:
        if q <= 0 or q % 2 == 0:
            raise ValueError(f"orders must be odd positive integers, got {q}")
    for a, b in zip(orders, orders[1:]):
        if b != a + 2:
            raise ValueError(f"orders must be consecutive odd integers, got {orders}")
    return orders


@dataclass(frozen=True)
class LockedPhases:
    """phi_q = beta * q * w_L + zeta; every triple difference vanishes."""

    beta: float = 0.0
    zeta: float = 0.0


@dataclass(frozen=True)
class ExplicitPhases:
    phases: tuple = ()


@dataclass(frozen=True)
class RandomPhases:
    """Independent uniform phases on [0, 2pi), reproducible from the seed."""

    seed: int = 0


PhaseScheme = LockedPhases | ExplicitPhases | RandomPhases


def make_phases(scheme: PhaseScheme, orders, fundamental_au: float = 0.0) -> np.ndarray:
    """Expand a phase scheme into one phase per harmonic order, in [0, 2pi)."""
    orders = _check_orders(orders)
    if isinstance(scheme, LockedPhases):
        raw = np.array([scheme.beta * q * fundamental_au + scheme.zeta for q in orders])
    elif isinstance(scheme, ExplicitPhases):
        if len(scheme.phases) != len(orders):
            raise ValueError("explicit phase list length must match orders")
        raw = np.asarray(scheme.phases, dtype=float)
    elif isinstance(scheme, RandomPhases):
        rng = np.random.default_rng(scheme.seed)
        raw = rng.uniform(0.0, TWO_PI, size=len(orders))
    else:
        raise TypeError(f"unknown phase scheme {scheme!r}")
    if not np.all(np.isfinite(raw)):
        raise ValueError("phases must be finite")
    return np.mod(raw, TWO_PI)


@dataclass(frozen=True)
class HarmonicComb:
    """Comb of consecutive odd harmonics with equal peak amplitudes.

    fundamental_photon_energy_ev : photon energy of the fundamental (eV)
    orders                       : ascending consecutive odd integers
    amplitude_per_order          : peak field amplitude E_o per harmonic (a.u.)
    phases                       : one phase per order, radians in [0, 2pi)
    """

    fundamental_photon_energy_ev: float
    orders: tuple
    amplitude_per_order: float
    phases: tuple

    def __post_init__(self):
        orders = tuple(_check_orders(self.orders))
        object.__setattr__(self, "orders", orders)
        if self.amplitude_per_order <= 0:
            raise ValueError("amplitude_per_order must be positive")
        phases = tuple(float(p) for p in self.phases)
        if len(phases) != len(orders):
            raise ValueError("phases must have the same length as orders")
        if not all(math.isfinite(p) for p in phases):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "phases", tuple(p % TWO_PI for p in phases))

    @property
    def n_harmonics(self) -> int:
        return len(self.orders)

    @property
    def fundamental_au(self) -> float:
        return ev_to_au(self.fundamental_photon_energy_ev)

    @property
    def frequencies_au(self) -> np.ndarray:
        return self.fundamental_au * np.asarray(self.orders, dtype=float)

    @classmethod
    def build(cls, fundamental_ev: float, orders, intensity_w_cm2: float,
              scheme: PhaseScheme) -> "HarmonicComb":
        orders = _check_orders(orders)
        amp = intensity_to_amplitude(intensity_w_cm2)
        phases = make_phases(scheme, orders, ev_to_au(fundamental_ev))
        return cls(fundamental_ev, tuple(orders), amp, tuple(phases))


def orders_from_lowest(lowest: int, n: int) -> list[int]:
    """n consecutive odd harmonics starting at `lowest`."""
    return _check_orders([lowest + 2 * i for i in range(n)])


def orders_centered(center: int, n: int) -> list[int]:
    """n consecutive odd harmonics around `center`, extending below first.

    Matches the growth pattern H13-H15, H13-H17, H11-H17, H11-H19 for a
    center at H15: each added harmonic alternates below, above, below, ...
    """
    lo = hi = int(center)
    below = True
    for _ in range(n - 1):
        if below:
            lo -= 2
        else:
            hi += 2
        below = not below
    return orders_from_lowest(lo, n)


@dataclass(frozen=True)
class PulseEnvelope:
    """cos^2 field envelope; FWHM refers to the field envelope itself.

    total_duration = 2 * FWHM, so f(0) = f(T) = 0 and f(T/2) = 1.
    """

    fwhm_fs: float
    total_duration_fs: float = dc_field(default=0.0)

    def __post_init__(self):
        if self.fwhm_fs <= 0:
            raise ValueError("fwhm must be positive")
        if self.total_duration_fs == 0.0:
            object.__setattr__(self, "total_duration_fs", 2.0 * self.fwhm_fs)

    @property
    def total_duration_au(self) -> float:
        return fs_to_au(self.total_duration_fs)

    def __call__(self, t_au) -> np.ndarray:
        """Envelope value(s) at time t (a.u.); zero outside [0, T]."""
        t = np.asarray(t_au, dtype=float)
        T = self.total_duration_au
        inside = (t >= 0.0) & (t <= T)
        f = np.where(inside, np.cos(math.pi * (t / T - 0.5)) ** 2, 0.0)
        return f if f.ndim else float(f)


def sample_field(comb: HarmonicComb, env: PulseEnvelope, t_au) -> np.ndarray:
    """E(t) in a.u.; vectorized over t."""
    t = np.atleast_1d(np.asarray(t_au, dtype=float))
    w = comb.frequencies_au
    phases = np.asarray(comb.phases)
    carrier = np.cos(np.outer(t, w) + phases).sum(axis=1)
    out = comb.amplitude_per_order * env(t) * carrier
    return out if np.ndim(t_au) else float(out[0])
