"""Ensembles of TDSE runs over harmonic counts and phase configurations.

A campaign sweeps the number of harmonics N, runs one (locked) or many
(random-phase) pulse propagations per N, aggregates per-observable statistics
in a fixed run order, and fits power laws P ~ N^s on the log-log points.
Every run's seed derives from (master_seed, N, run_index) through a stable
hash, so any run can be replayed bit-exactly from the manifest and results
do not depend on execution order.  Results persist as one JSON object per
line; resume skips (N, run_index) pairs already on disk.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .basis import HydrogenicSpec, get_basis, initial_state, solve_channel
from .field import (ExplicitPhases, HarmonicComb, LockedPhases, PulseEnvelope,
                    RandomPhases, make_phases, orders_centered,
                    orders_from_lowest)
from .propagator import Propagator, propagate_pulse
from .spectrum import (central_peak_probability, integrate_order_subset,
                       locate_peaks, project_continuum)


@dataclass(frozen=True)
class NumericalParams:
    box_radius_au: float = 400.0
    n_breakpoints: int = 500
    spline_order: int = 7
    grid_law: str = "two_zone"
    l_max: int = 4
    dt_au: float = 0.08


@dataclass(frozen=True)
class CampaignSpec:
    atom: HydrogenicSpec
    fundamental_ev: float
    intensity_w_cm2: float
    fwhm_fs: float
    anchor_order: int                 # lowest or central harmonic
    comb_growth: str = "from_lowest"  # or "centered"
    n_range: tuple = (2, 3, 4, 5)
    scheme: str = "locked"            # or "random"
    runs_per_n: int = 1
    master_seed: int = 0
    numerics: NumericalParams = dc_field(default_factory=NumericalParams)

    def __post_init__(self):
        if self.runs_per_n < 1:
            raise ValueError("runs_per_n must be >= 1")
        if self.scheme not in ("locked", "random"):
            raise ValueError("scheme must be 'locked' or 'random'")
        if self.comb_growth not in ("from_lowest", "centered"):
            raise ValueError("comb_growth must be 'from_lowest' or 'centered'")

    def orders_for(self, n: int) -> list:
        if self.comb_growth == "from_lowest":
            return orders_from_lowest(self.anchor_order, n)
        return orders_centered(self.anchor_order, n)


def derive_seed(master_seed: int, n: int, run_index: int) -> int:
    """Stable 63-bit per-run seed, independent of execution order."""
    digest = hashlib.sha256(f"{master_seed}:{n}:{run_index}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


# per-process caches shared across runs of one campaign
_ENGINE_CACHE: dict = {}


def _engine(cspec: CampaignSpec):
    num = cspec.numerics
    key = (num, cspec.atom)
    if key not in _ENGINE_CACHE:
        basis = get_basis(num.box_radius_au, num.n_breakpoints,
                          num.spline_order, num.grid_law)
        eigensystems = [solve_channel(basis, cspec.atom, l)
                        for l in range(num.l_max + 1)]
        prop = Propagator(basis, cspec.atom, num.l_max, num.dt_au)
        _, c0 = initial_state(eigensystems[cspec.atom.initial_l], cspec.atom)
        _ENGINE_CACHE[key] = (basis, eigensystems, prop, c0)
    return _ENGINE_CACHE[key]


def run_single(cspec: CampaignSpec, n: int, phases) -> dict:
    """One pulse propagation; returns the observables record."""
    basis, eigensystems, prop, c0 = _engine(cspec)
    orders = cspec.orders_for(n)
    comb = HarmonicComb.build(cspec.fundamental_ev, orders,
                              cspec.intensity_w_cm2, ExplicitPhases(tuple(phases)))
    env = PulseEnvelope(cspec.fwhm_fs)
    initial = prop.make_initial_state(c0, cspec.atom.initial_l)
    final, diag = propagate_pulse(prop, initial, comb, env)
    amps = project_continuum(final, eigensystems, basis.overlap())
    table = locate_peaks(amps, comb, cspec.atom)
    two_photon = [r for r in table.records if r.photon_order == 2]
    return {
        "total_order2": integrate_order_subset(table, 2),
        "central_order2": central_peak_probability(table, 2),
        "per_peak_order2": [r.probability for r in two_photon],
        "bound_total": amps.bound_total(),
        "norm": amps.bound_total() + amps.continuum_total(),
        "boundary_population": diag.boundary_population,
        "norm_drift": diag.norm_drift,
    }


def _run_record(cspec: CampaignSpec, n: int, run_index: int) -> dict:
    if cspec.scheme == "locked":
        seed = 0
        scheme = LockedPhases()
    else:
        seed = derive_seed(cspec.master_seed, n, run_index)
        scheme = RandomPhases(seed)
    orders = cspec.orders_for(n)
    phases = make_phases(scheme, orders)
    record = {"N": n, "run_index": run_index, "seed": seed,
              "phases": [float(p) for p in phases]}
    try:
        record["observables"] = run_single(cspec, n, phases)
    except Exception as exc:   # campaign must survive single-run failures
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


@dataclass
class ObservableStats:
    mean: float
    minimum: float
    maximum: float
    std: float
    runs: int


@dataclass
class EnsembleStats:
    """Per-N distribution summaries plus the reproducibility manifest."""

    n_values: list
    stats: dict          # (N, observable) -> ObservableStats
    records: list
    failures: int = 0

    def series(self, observable: str, statistic: str = "mean"):
        values = [getattr(self.stats[(n, observable)], statistic)
                  for n in self.n_values]
        return np.asarray(self.n_values, dtype=float), np.asarray(values)


_SCALAR_OBSERVABLES = ("total_order2", "central_order2")


def aggregate(records: list) -> EnsembleStats:
    """Deterministic fixed-order fold of per-run records into statistics."""
    ok = [r for r in records if "observables" in r]
    failures = len(records) - len(ok)
    n_values = sorted({r["N"] for r in ok})
    stats = {}
    for n in n_values:
        group = sorted((r for r in ok if r["N"] == n), key=lambda r: r["run_index"])
        for obs in _SCALAR_OBSERVABLES:
            vals = np.array([r["observables"][obs] for r in group])
            stats[(n, obs)] = ObservableStats(
                mean=float(np.mean(vals)), minimum=float(np.min(vals)),
                maximum=float(np.max(vals)), std=float(np.std(vals)),
                runs=len(vals))
    return EnsembleStats(n_values, stats, records, failures)


def _planned_runs(cspec: CampaignSpec):
    runs = 1 if cspec.scheme == "locked" else cspec.runs_per_n
    for n in cspec.n_range:
        for i in range(runs):
            yield n, i


def load_records(path: str) -> list:
    records = []
    if not os.path.exists(path):
        return records
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                print(f"warning: skipping corrupt line {lineno} in {path}")
    return records


def run_ensemble(cspec: CampaignSpec, results_path: str | None = None,
                 resume: bool = True, workers: int = 1,
                 progress=None) -> EnsembleStats:
    """Execute all planned runs, persisting each as one JSON line."""
    done: dict = {}
    if results_path and resume:
        for rec in load_records(results_path):
            done[(rec["N"], rec["run_index"])] = rec
    pending = [(n, i) for n, i in _planned_runs(cspec) if (n, i) not in done]

    sink = None
    if results_path:
        os.makedirs(os.path.dirname(results_path) or ".", exist_ok=True)
        sink = open(results_path, "a")
    def commit(rec):
        done[(rec["N"], rec["run_index"])] = rec
        if sink:
            sink.write(json.dumps(rec) + "\n")
            sink.flush()

    try:
        if workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for rec in pool.map(_run_record, [cspec] * len(pending),
                                    [n for n, _ in pending],
                                    [i for _, i in pending]):
                    commit(rec)
        else:
            for count, (n, i) in enumerate(pending, start=1):
                commit(_run_record(cspec, n, i))
                if progress:
                    progress(count, len(pending))
    finally:
        if sink:
            sink.close()

    ordered = [done[key] for key in sorted(done)]
    return aggregate(ordered)


@dataclass
class PowerLawFit:
    exponent: float
    prefactor: float
    r_squared: float
    n_range: tuple
    excluded: tuple = ()


def fit_power_law(n_values, observable_values) -> PowerLawFit:
    """Least squares on (log N, log P); non-positive points are excluded."""
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(observable_values, dtype=float)
    keep = values > 0
    excluded = tuple(int(n) for n in n_values[~keep])
    n_values, values = n_values[keep], values[keep]
    if len(n_values) < 3:
        raise ValueError("need at least 3 distinct positive points to fit")
    x, y = np.log(n_values), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), math.exp(intercept), r2,
                       (int(n_values.min()), int(n_values.max())), excluded)


def summary_rows(stats: EnsembleStats, scheme: str):
    """CSV-ready rows: N, scheme, mean, min, max, std, runs (total_order2)."""
    rows = []
    for n in stats.n_values:
        s = stats.stats[(n, "total_order2")]
        rows.append((n, scheme, s.mean, s.minimum, s.maximum, s.std, s.runs))
    return rows


def write_summary_csv(path: str, stats: EnsembleStats, scheme: str) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "scheme", "mean", "min", "max", "std", "runs"])
        for row in summary_rows(stats, scheme):
            writer.writerow(row)
