"""Path-counting model for two-photon ionization by a comb of N harmonics.

Electrons at the k-th final energy (k = 1..2N-1) can be produced by any
ordered pair of harmonics (i, j) with i + j = k + 1.  With equal field
amplitudes and equal two-photon matrix elements the per-peak probability in
units of alpha^2 = (M E^2)^2 is

    locked:  m^2            (m = number of ordered paths)
    random:  2m - 1 if m odd, 2m if m even

and the totals over all peaks close to 2N^3/3 + N/3 (locked) and
2N^2 - N (random).  A Monte-Carlo phase-average oracle is included for
checking the random-phase counting independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CombinatorialParams:
    """alpha = M E^2 sets the overall scale; N is the number of harmonics."""

    alpha: float
    N: int

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")


@dataclass(frozen=True)
class PeakPathSet:
    """Ordered harmonic-index pairs (i, j), i + j = k + 1, feeding peak k."""

    peak_index: int
    ordered_pairs: tuple


def n_peaks(N: int) -> int:
    return 2 * N - 1


def enumerate_paths(N: int, k: int) -> PeakPathSet:
    """All ordered pairs (i, j), 1 <= i, j <= N, with i + j = k + 1."""
    if not 1 <= k <= 2 * N - 1:
        raise ValueError(f"peak index k={k} out of range [1, {2 * N - 1}]")
    pairs = tuple((i, k + 1 - i) for i in range(1, N + 1) if 1 <= k + 1 - i <= N)
    return PeakPathSet(k, pairs)


def path_count(N: int, k: int) -> int:
    if not 1 <= k <= 2 * N - 1:
        raise ValueError(f"peak index k={k} out of range [1, {2 * N - 1}]")
    return k if k <= N else 2 * N - k


def peak_probability(params: CombinatorialParams, k: int, scheme: str) -> float:
    """Model probability of peak k, in units alpha^2 * (integer)."""
    m = path_count(params.N, k)
    if scheme == "locked":
        value = m * m
    elif scheme == "random":
        value = 2 * m - 1 if m % 2 else 2 * m
    else:
        raise ValueError(f"scheme must be 'locked' or 'random', got {scheme!r}")
    return params.alpha**2 * value


def total_probability(params: CombinatorialParams, scheme: str) -> float:
    """Closed-form total over all 2N-1 peaks."""
    N = params.N
    if scheme == "locked":
        value = (2 * N**3 + N) / 3
    elif scheme == "random":
        value = 2 * N**2 - N
    else:
        raise ValueError(f"scheme must be 'locked' or 'random', got {scheme!r}")
    return params.alpha**2 * value


def peak_probability_explicit(params: CombinatorialParams, k: int, phases) -> float:
    """|sum over paths of e^{i(phi_i + phi_j)}|^2 for explicit phases."""
    phases = np.asarray(phases, dtype=float)
    if len(phases) != params.N:
        raise ValueError("need one phase per harmonic")
    pairs = enumerate_paths(params.N, k).ordered_pairs
    amp = sum(np.exp(1j * (phases[i - 1] + phases[j - 1])) for i, j in pairs)
    return params.alpha**2 * abs(amp) ** 2


def rp_average_oracle(N: int, k: int, runs: int, seed: int = 0) -> float:
    """Monte-Carlo estimate of the random-phase peak value, in alpha^2 units.

    Averages |sum_{(i,j)} e^{i(phi_i+phi_j)}|^2 over uniform phase vectors.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    pairs = enumerate_paths(N, k).ordered_pairs
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(runs, N))
    amp = np.zeros(runs, dtype=complex)
    for i, j in pairs:
        amp += np.exp(1j * (phases[:, i - 1] + phases[:, j - 1]))
    return float(np.mean(np.abs(amp) ** 2))


def rp_total_oracle(N: int, runs: int, seed: int = 0) -> float:
    """Monte-Carlo estimate of the random-phase total, in alpha^2 units."""
    return sum(rp_average_oracle(N, k, runs, seed=seed + k) for k in range(1, 2 * N))


def model_table(n_max: int, alpha: float = 1.0):
    """Rows (N, scheme, P_total, P_central) for N = 1..n_max, both schemes."""
    rows = []
    for N in range(1, n_max + 1):
        params = CombinatorialParams(alpha, N)
        for scheme in ("locked", "random"):
            rows.append((N, scheme,
                         total_probability(params, scheme),
                         peak_probability(params, N, scheme)))
    return rows
