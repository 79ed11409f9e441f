"""Command-line driver: config files in, analysis-ready CSV/JSON out.

Subcommands:

    combinatorial   path-counting model table (no config needed)
    matelem         two-photon matrix-element grid over a harmonic comb
    spectrum        one pulse propagation and its peak table
    campaign        ensemble of runs over N with statistics and fits

Configs are TOML with sections [atom], [field], [numerics], [campaign],
[output]; every physical key carries its unit as a suffix (intensity_w_cm2,
photon_energy_ev, fwhm_fs, ...).  Unknown keys are rejected.  Outputs land in
a directory named by the config hash, so re-running an identical config never
overwrites anything.  Exit codes: 0 success, 1 numerical failure, 2 config
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib

from . import __version__
from .basis import HydrogenicSpec, get_basis
from .campaign import (CampaignSpec, NumericalParams, fit_power_law,
                       run_ensemble, write_summary_csv)
from .combinatorial import model_table
from .field import (ExplicitPhases, HarmonicComb, LockedPhases, PulseEnvelope,
                    RandomPhases, orders_centered, orders_from_lowest)
from .perturbation import table_grid
from .propagator import Propagator, propagate_pulse
from .spectrum import directional_spectrum, locate_peaks, project_continuum
from .units import ev_to_au


class ConfigError(Exception):
    pass


# section -> key -> (type, required)
_SCHEMA = {
    "atom": {
        "nuclear_charge": (int, True),
        "initial_n": (int, False),
        "initial_l": (int, False),
    },
    "field": {
        "photon_energy_ev": (float, True),
        "intensity_w_cm2": (float, True),
        "fwhm_fs": (float, False),
        "orders": (list, False),
        "anchor_order": (int, False),
        "n_harmonics": (int, False),
        "comb_growth": (str, False),
        "phase_scheme": (str, False),
        "phases_rad": (list, False),
        "beta_au": (float, False),
        "zeta_rad": (float, False),
        "seed": (int, False),
        "pathway": (str, False),
    },
    "numerics": {
        "box_radius_au": (float, False),
        "n_breakpoints": (int, False),
        "spline_order": (int, False),
        "grid_law": (str, False),
        "l_max": (int, False),
        "dt_au": (float, False),
    },
    "campaign": {
        "n_range": (list, False),
        "scheme": (str, False),
        "runs_per_n": (int, False),
        "master_seed": (int, False),
    },
    "output": {
        "dir": (str, False),
    },
}


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        # tomllib messages carry line and column numbers
        raise ConfigError(f"{path}: {exc}") from exc
    for section, content in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"{path}: [{section}] must be a table")
        for key, value in content.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            want, _ = _SCHEMA[section][key]
            if want is float and isinstance(value, int):
                value = float(value)
                content[key] = value
            if not isinstance(value, want) or isinstance(value, bool):
                raise ConfigError(
                    f"{path}: key {key!r} in [{section}] must be "
                    f"{want.__name__}, got {type(value).__name__}")
    for section, keys in _SCHEMA.items():
        required = [k for k, (_, req) in keys.items() if req]
        if required and section not in raw:
            raise ConfigError(f"{path}: missing section [{section}]")
        for k in required:
            if k not in raw.get(section, {}):
                raise ConfigError(f"{path}: missing key {k!r} in [{section}]")
    return raw


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _atom(cfg: dict) -> HydrogenicSpec:
    a = cfg["atom"]
    return HydrogenicSpec(a["nuclear_charge"], a.get("initial_n", 1),
                          a.get("initial_l", 0))


def _numerics(cfg: dict) -> NumericalParams:
    return NumericalParams(**cfg.get("numerics", {}))


def _orders(cfg: dict, n: int | None = None) -> list:
    f = cfg["field"]
    if "orders" in f:
        if n is not None and n != len(f["orders"]):
            raise ConfigError("explicit orders conflict with requested N")
        return [int(q) for q in f["orders"]]
    if "anchor_order" not in f:
        raise ConfigError("field needs either 'orders' or 'anchor_order'")
    n = n if n is not None else f.get("n_harmonics")
    if n is None:
        raise ConfigError("field needs 'n_harmonics' with 'anchor_order'")
    if f.get("comb_growth", "from_lowest") == "centered":
        return orders_centered(f["anchor_order"], n)
    return orders_from_lowest(f["anchor_order"], n)


def _phase_scheme(cfg: dict, seed_override: int | None = None):
    f = cfg["field"]
    name = f.get("phase_scheme", "locked")
    if name == "locked":
        return LockedPhases(f.get("beta_au", 0.0), f.get("zeta_rad", 0.0))
    if name == "explicit":
        if "phases_rad" not in f:
            raise ConfigError("explicit phase scheme needs 'phases_rad'")
        return ExplicitPhases(tuple(f["phases_rad"]))
    if name == "random":
        seed = seed_override if seed_override is not None else f.get("seed", 0)
        return RandomPhases(seed)
    raise ConfigError(f"unknown phase_scheme {name!r}")


def _out_dir(cfg: dict, args, chash: str) -> str:
    base = args.out_dir or cfg.get("output", {}).get("dir", "out")
    path = os.path.join(base, chash)
    os.makedirs(path, exist_ok=True)
    return path


def _stamp(cfg: dict, chash: str, extra: dict | None = None) -> dict:
    meta = {"config_hash": chash, "version": __version__, "config": cfg}
    if extra:
        meta.update(extra)
    return meta


def _write_json(path: str, payload: dict) -> None:
    if os.path.exists(path):
        return          # content-addressed directory: never overwrite
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, default=float)


# -- subcommands -------------------------------------------------------------

def cmd_combinatorial(args) -> int:
    writer = csv.writer(sys.stdout)
    writer.writerow(["N", "scheme", "total_alpha2", "central_alpha2"])
    for row in model_table(args.n_max):
        if args.scheme in ("both", row[1]):
            writer.writerow(row)
    return 0


def cmd_matelem(args) -> int:
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    out = _out_dir(cfg, args, chash)
    atom = _atom(cfg)
    num = _numerics(cfg)
    basis = get_basis(num.box_radius_au, num.n_breakpoints, num.spline_order,
                      num.grid_law)
    orders = _orders(cfg)
    pathway = cfg["field"].get("pathway", "spd")
    grid = table_grid(atom, basis, orders, cfg["field"]["photon_energy_ev"],
                      pathway)

    grid_path = os.path.join(out, "matelem_grid.csv")
    if not os.path.exists(grid_path):
        with open(grid_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"# config_hash={chash} version={__version__}"])
            writer.writerow(["first\\second"] + [str(q) for q in orders])
            for q1, row in zip(orders, grid.elements):
                writer.writerow([q1] + [f"{e.value:.6e}" for e in row])

    rows = {}
    for q1, row in zip(orders, grid.elements):
        labels, detunings = zip(*(e.nearest_resonance for e in row))
        rows[str(q1)] = {
            "signs": grid.sign_pattern()[q1],
            "monotone_decreasing": grid.row_monotone_report()[q1],
            "nearest_resonance": labels[0],
            "detuning_ev": detunings[0],
            "post_resonance": detunings[0] > 0,
        }
    report = _stamp(cfg, chash, {
        "pathway": pathway,
        "rows": rows,
        "max_cross_check_error": grid.max_cross_check_error(),
    })
    _write_json(os.path.join(out, "matelem_report.json"), report)
    print(grid_path)
    if grid.max_cross_check_error() > args.tolerance:
        print(f"cross-check error {grid.max_cross_check_error():.3e} exceeds "
              f"tolerance {args.tolerance:.1e}", file=sys.stderr)
        return 1
    return 0


def _single_run(cfg, atom, num, orders, scheme):
    from .basis import initial_state, solve_channel

    basis = get_basis(num.box_radius_au, num.n_breakpoints, num.spline_order,
                      num.grid_law)
    eigensystems = [solve_channel(basis, atom, l) for l in range(num.l_max + 1)]
    comb = HarmonicComb.build(cfg["field"]["photon_energy_ev"], orders,
                              cfg["field"]["intensity_w_cm2"], scheme)
    env = PulseEnvelope(cfg["field"].get("fwhm_fs", 5.0))
    prop = Propagator(basis, atom, num.l_max, num.dt_au)
    _, c0 = initial_state(eigensystems[atom.initial_l], atom)
    final, diag = propagate_pulse(prop, prop.make_initial_state(c0, atom.initial_l),
                                  comb, env)
    amps = project_continuum(final, eigensystems, basis.overlap())
    return comb, amps, diag


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    out = _out_dir(cfg, args, chash)
    atom = _atom(cfg)
    num = _numerics(cfg)
    orders = _orders(cfg)
    scheme = _phase_scheme(cfg, args.seed_override)
    comb, amps, diag = _single_run(cfg, atom, num, orders, scheme)

    table = locate_peaks(amps, comb, atom)
    peaks_path = os.path.join(out, "peaks.csv")
    if not os.path.exists(peaks_path):
        with open(peaks_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"# config_hash={chash} version={__version__}"])
            writer.writerow(["photon_order", "peak_index", "expected_ev",
                             "centroid_ev", "probability", "overlaps_other_order"])
            for r in table.records:
                writer.writerow([r.photon_order, r.peak_index,
                                 f"{r.expected_energy_ev:.4f}",
                                 f"{r.centroid_ev:.4f}",
                                 f"{r.probability:.6e}",
                                 int(r.overlaps_other_order)])

    spec = directional_spectrum(amps, atom.nuclear_charge)
    dens_path = os.path.join(out, "spectrum.csv")
    if not os.path.exists(dens_path):
        with open(dens_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"# config_hash={chash} version={__version__}"])
            writer.writerow(["energy_ev", "directional_density_per_ev_sr",
                             "total_density_per_ev"])
            for e, d, t in zip(spec.energy_grid_ev, spec.directional_density,
                               spec.total_density):
                writer.writerow([f"{e:.5f}", f"{d:.6e}", f"{t:.6e}"])

    _write_json(os.path.join(out, "diagnostics.json"), _stamp(cfg, chash, {
        "phases": list(comb.phases),
        "norm_drift": diag.norm_drift,
        "boundary_population": diag.boundary_population,
        "boundary_warning": diag.boundary_warning,
        "bound_total": amps.bound_total(),
        "continuum_total": amps.continuum_total(),
    }))
    print(out)
    return 0


def cmd_campaign(args) -> int:
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    out = _out_dir(cfg, args, chash)
    camp = cfg.get("campaign", {})
    scheme = camp.get("scheme", "locked")
    master_seed = camp.get("master_seed", 0)
    if args.seed_override is not None:
        master_seed = args.seed_override
    f = cfg["field"]
    if "anchor_order" not in f:
        raise ConfigError("campaign configs need field.anchor_order")
    cspec = CampaignSpec(
        atom=_atom(cfg),
        fundamental_ev=f["photon_energy_ev"],
        intensity_w_cm2=f["intensity_w_cm2"],
        fwhm_fs=f.get("fwhm_fs", 5.0),
        anchor_order=f["anchor_order"],
        comb_growth=f.get("comb_growth", "from_lowest"),
        n_range=tuple(camp.get("n_range", [2, 3, 4, 5])),
        scheme=scheme,
        runs_per_n=camp.get("runs_per_n", 1),
        master_seed=master_seed,
        numerics=_numerics(cfg))

    stats = run_ensemble(cspec, os.path.join(out, "runs.jsonl"),
                         resume=args.resume, workers=args.threads)
    write_summary_csv(os.path.join(out, "summary.csv"), stats, scheme)
    fits = {}
    for obs in ("total_order2", "central_order2"):
        try:
            n, v = stats.series(obs)
            fit = fit_power_law(n, v)
            fits[obs] = {"exponent": fit.exponent, "prefactor": fit.prefactor,
                         "r_squared": fit.r_squared, "n_range": fit.n_range,
                         "excluded": fit.excluded}
        except ValueError as exc:
            fits[obs] = {"error": str(exc)}
    _write_json(os.path.join(out, "fits.json"), _stamp(cfg, chash, {
        "fits": fits, "failures": stats.failures}))
    print(out)
    if stats.failures > 0.05 * len(stats.records):
        print(f"{stats.failures} failed runs out of {len(stats.records)}",
              file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmion")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("combinatorial", help="path-counting model table")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--scheme", choices=["locked", "random", "both"],
                   default="both")
    p.set_defaults(func=cmd_combinatorial)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--seed-override", type=int, default=None)

    p = sub.add_parser("matelem", parents=[common],
                       help="two-photon matrix-element grid")
    p.add_argument("--tolerance", type=float, default=5e-3,
                   help="max spectral-sum vs linear-solve relative error")
    p.set_defaults(func=cmd_matelem)

    p = sub.add_parser("spectrum", parents=[common],
                       help="single-pulse photoelectron spectrum")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("campaign", parents=[common],
                       help="ensemble over harmonic counts")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
