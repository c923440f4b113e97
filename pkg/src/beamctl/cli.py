"""Command-line front end: config ingestion, experiment dispatch, file reports.

Five subcommands wrap the library: `spectrum` (eigenvalue tables and
collision detection), `synthesize` (moment solve, control emission),
`verify` (the full null-control experiment with the independent integrator),
`condensation` (Diophantine tail analysis of the overdamped rate families)
and `cost-sweep` (minimum cost across horizons with a blow-up fit).

Everything a run produces lands in --out as CSV (plot-ready: '.' decimal,
',' separator, LF newlines, header row) and JSON (decimal-string numbers,
fixed field order, so identical configs reproduce byte-identical files).
A config file named by --config overrides command-line flags; its schema is
INI-style sections with the exact keys documented in CONFIG_SCHEMA, and
unknown sections or keys are rejected rather than ignored.

Exit codes: 0 success, 2 configuration or domain error, 3 uncontrollable
data or failed verification verdict, 4 numerical infeasibility at the
allowed precision.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from fractions import Fraction
from typing import Optional

import mpmath as mp
import numpy as np

from ._numutil import decimal_str, to_mpf
from .condensation import (
    condensation_estimate,
    ratio_from_quotients,
    ratio_from_sqrt,
    write_condensation_csv,
)
from .errors import (
    NumericalRankDeficiency,
    RationalResonance,
    ResonanceDefect,
    StepSizeError,
    UncontrollableMode,
)
from .modal_dynamics import ModalState, write_trajectory_csv
from .moment_problem import assemble
from .spectrum import (
    BeamConfig,
    Boundary,
    DampingRegime,
    branch_ratio,
    branch_ratio_exact,
    gap_statistics,
    mode_eigenvalues,
)
from .synthesis import solve_min_norm, write_control_csv
from .verification import Verdict, cost_sweep, null_control_experiment

__all__ = ["main", "CONFIG_SCHEMA", "build_initial_state"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNCONTROLLABLE = 3
EXIT_NUMERICAL = 4

_GUARD_BITS = 64

# (section, key) -> (args attribute, converter); the whole config-file schema
CONFIG_SCHEMA = {
    ("beam", "rho"): ("rho", str),
    ("beam", "modes"): ("modes", int),
    ("beam", "horizon"): ("horizon", str),
    ("beam", "boundary"): ("boundary", str),
    ("beam", "precision_bits"): ("precision_bits", int),
    ("beam", "regularization"): ("regularization", float),
    ("data", "initial"): ("data", str),
    ("data", "seed"): ("seed", int),
    ("output", "dir"): ("out", str),
    ("synthesize", "autoscale"): ("autoscale", "bool"),
    ("synthesize", "ridge_fallback"): ("ridge_fallback", "bool"),
    ("verify", "tolerance"): ("tolerance", float),
    ("verify", "steps"): ("steps", int),
    ("verify", "samples"): ("samples", int),
    ("sweep", "horizons"): ("horizons", str),
    ("condensation", "nmax"): ("nmax", int),
    ("condensation", "tail_start"): ("tail_start", int),
    ("condensation", "ratio_sqrt"): ("ratio_sqrt", int),
    ("condensation", "ratio_cf"): ("ratio_cf", str),
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--rho", default="1",
                        help="damping coefficient, exact decimal or fraction (default 1)")
    shared.add_argument("--modes", type=int, default=6,
                        help="number of controlled modes (default 6)")
    shared.add_argument("--horizon", default="1",
                        help="control horizon T, exact decimal or fraction (default 1)")
    shared.add_argument("--boundary", choices=["dirichlet", "neumann"],
                        default="dirichlet")
    shared.add_argument("--precision-bits", dest="precision_bits", type=int, default=256)
    shared.add_argument("--regularization", type=float, default=0.0,
                        help="explicit ridge weight on the Gram solve (default 0)")
    shared.add_argument("--seed", type=int, default=0,
                        help="seed for the 'random' data fixture")
    shared.add_argument("--data", default="mode1",
                        help="initial data: 'mode1', 'random', 'random-seeded:<k>', "
                             "or triples 'mode:value:velocity,...'")
    shared.add_argument("--out", default=".", help="output directory (default .)")
    shared.add_argument("--config", default=None,
                        help="INI config file; its values override flags")

    parser = argparse.ArgumentParser(
        prog="beamctl",
        description="Boundary null control of a structurally damped beam: "
                    "synthesis, verification and spectral diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[shared],
                       help="eigenvalue table, gaps and collision pairs")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("synthesize", parents=[shared],
                       help="solve the moment system and emit the control")
    p.add_argument("--no-autoscale", dest="autoscale", action="store_false",
                   help="fail instead of retrying at doubled precision")
    p.add_argument("--ridge-fallback", dest="ridge_fallback", action="store_true",
                   help="ridged solve instead of failure at the precision ceiling")
    p.set_defaults(func=cmd_synthesize, autoscale=True, ridge_fallback=False)

    p = sub.add_parser("verify", parents=[shared],
                       help="synthesize, then verify along both evaluation routes")
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="relative final-norm threshold for the verdict (default 1e-6)")
    p.add_argument("--steps", type=int, default=None,
                   help="integrator step count (default: stiffness-based)")
    p.add_argument("--samples", type=int, default=201,
                   help="trajectory samples written to CSV (default 201)")
    p.add_argument("--no-autoscale", dest="autoscale", action="store_false")
    p.add_argument("--ridge-fallback", dest="ridge_fallback", action="store_true")
    p.set_defaults(func=cmd_verify, autoscale=True, ridge_fallback=False)

    p = sub.add_parser("condensation", parents=[shared],
                       help="Diophantine condensation estimate of the rate families")
    p.add_argument("--nmax", type=int, default=200)
    p.add_argument("--tail-start", dest="tail_start", type=int, default=10)
    p.add_argument("--ratio-sqrt", dest="ratio_sqrt", type=int, default=None,
                   help="branch ratio sqrt(D) for a positive integer D")
    p.add_argument("--ratio-cf", dest="ratio_cf", default=None,
                   help="branch ratio from continued-fraction quotients 'a0,a1,...'")
    p.set_defaults(func=cmd_condensation)

    p = sub.add_parser("cost-sweep", parents=[shared],
                       help="minimum control cost across horizons, with blow-up fit")
    p.add_argument("--horizons", default="0.25,0.5,1,2",
                   help="comma-separated horizons (default 0.25,0.5,1,2)")
    p.set_defaults(func=cmd_cost_sweep)
    return parser


def apply_config_file(args: argparse.Namespace) -> None:
    """Overlay --config values onto parsed flags; unknown keys are errors."""
    if not args.config:
        return
    if not os.path.exists(args.config):
        raise ValueError(f"config file not found: {args.config}")
    ini = configparser.ConfigParser()
    try:
        with open(args.config) as fh:
            ini.read_file(fh)
    except configparser.Error as exc:
        raise ValueError(f"config file {args.config} is not valid INI: {exc}") from exc
    for section in ini.sections():
        for key in ini[section]:
            try:
                dest, conv = CONFIG_SCHEMA[(section, key)]
            except KeyError:
                raise ValueError(
                    f"unknown config key [{section}] {key}; "
                    f"known keys: {sorted(f'[{s}] {k}' for s, k in CONFIG_SCHEMA)}")
            if not hasattr(args, dest):
                # key belongs to a different subcommand
                raise ValueError(
                    f"config key [{section}] {key} does not apply to '{args.command}'")
            raw = ini[section][key]
            if conv == "bool":
                value = ini[section].getboolean(key)
            else:
                try:
                    value = conv(raw)
                except ValueError as exc:
                    raise ValueError(
                        f"config key [{section}] {key} has invalid value {raw!r}") from exc
            setattr(args, dest, value)


def beam_config(args: argparse.Namespace) -> BeamConfig:
    return BeamConfig(
        boundary=Boundary(args.boundary),
        rho=args.rho,
        n_modes=args.modes,
        horizon=args.horizon,
        precision_bits=args.precision_bits,
        regularization=args.regularization,
    )


def build_initial_state(descriptor: str, config: BeamConfig, seed: int = 0) -> ModalState:
    """Initial data from a fixture name or explicit mode:value:velocity triples.

    'mode1' puts unit displacement on the first oscillatory mode.  'random'
    (or 'random-seeded:<k>') draws Gaussian data with a 1/n^2 amplitude decay
    on every controllable mode, which keeps Neumann fixtures admissible by
    construction.  Triples may name mode 0 under Neumann, e.g. to probe the
    admissibility screening on purpose.
    """
    descriptor = descriptor.strip()
    neumann = config.boundary is Boundary.NEUMANN
    size = config.n_modes + (1 if neumann else 0)
    off = 1 if neumann else 0
    values = [Fraction(0)] * size
    velocities = [Fraction(0)] * size

    if descriptor == "mode1":
        values[off] = Fraction(1)
        triples = None
    elif descriptor == "random" or descriptor.startswith("random-seeded:"):
        if descriptor.startswith("random-seeded:"):
            try:
                seed = int(descriptor.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad seed in data fixture {descriptor!r}")
        rng = np.random.default_rng(seed)
        with mp.workprec(config.precision_bits + _GUARD_BITS):
            vals, vels = [mp.mpf(0)] * size, [mp.mpf(0)] * size
            for n in range(1, config.n_modes + 1):
                if neumann and n % 2 == 0:
                    continue
                vals[n - 1 + off] = mp.mpf(float(rng.standard_normal())) / n ** 2
                vels[n - 1 + off] = mp.mpf(float(rng.standard_normal())) / n ** 2
            return ModalState(config.boundary, tuple(vals), tuple(vels))
    else:
        triples = []
        for chunk in descriptor.split(","):
            parts = chunk.strip().split(":")
            if len(parts) != 3:
                raise ValueError(
                    f"bad data triple {chunk!r}; expected mode:value:velocity")
            try:
                mode = int(parts[0])
                val = Fraction(parts[1])
                vel = Fraction(parts[2])
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"bad data triple {chunk!r}")
            triples.append((mode, val, vel))
        seen = set()
        for mode, val, vel in triples:
            if mode in seen:
                raise ValueError(f"mode {mode} appears twice in the data descriptor")
            seen.add(mode)
            if mode == 0:
                if not neumann:
                    raise ValueError("mode 0 only exists under Neumann control")
                values[0], velocities[0] = val, vel
            elif 1 <= mode <= config.n_modes:
                values[mode - 1 + off] = val
                velocities[mode - 1 + off] = vel
            else:
                raise ValueError(
                    f"mode {mode} outside the configured range 1..{config.n_modes}")

    with mp.workprec(config.precision_bits + _GUARD_BITS):
        return ModalState(config.boundary,
                          tuple(to_mpf(v) for v in values),
                          tuple(to_mpf(v) for v in velocities))


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _error_doc(command: str, exc: Exception) -> dict:
    info = {"type": type(exc).__name__, "message": str(exc)}
    for field in ("mode", "amplitude", "data_scale", "rate", "defect", "data_norm",
                  "pair", "ratio", "pivot_index", "pivot_ratio", "precision_bits",
                  "attempted_bits", "steps", "growth"):
        if hasattr(exc, field):
            value = getattr(exc, field)
            if isinstance(value, float):
                value = repr(value)
            elif isinstance(value, tuple):
                value = list(value)
            info[field] = value
    return {"command": command, "error": info}


def _out_path(args: argparse.Namespace, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_spectrum(args: argparse.Namespace) -> int:
    config = beam_config(args)
    bits = config.precision_bits
    import csv as _csv

    csv_path = _out_path(args, "spectrum.csv")
    with open(csv_path, "w", newline="") as fh:
        w = _csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "regime", "lambda_plus_re", "lambda_plus_im",
                    "lambda_minus_re", "lambda_minus_im"])
        for n in range(1, config.n_modes + 1):
            e = mode_eigenvalues(config.rho, n, bits)
            w.writerow([n, e.regime.value,
                        decimal_str(mp.re(e.lambda_plus), bits),
                        decimal_str(mp.im(e.lambda_plus), bits),
                        decimal_str(mp.re(e.lambda_minus), bits),
                        decimal_str(mp.im(e.lambda_minus), bits)])

    stats = gap_statistics(config.rho, config.n_modes, bits)
    doc = {
        "command": "spectrum",
        "rho": str(config.rho),
        "n_modes": config.n_modes,
        "regime": config.regime.value,
        "min_gap_plus": repr(stats.min_gap_plus),
        "min_gap_minus": repr(stats.min_gap_minus),
        "merged_min_gap": repr(stats.merged_min_gap),
        "collisions": [list(pair) for pair in stats.collisions],
    }
    if config.regime is DampingRegime.OVERDAMPED:
        exact = branch_ratio_exact(config.rho)
        doc["branch_ratio"] = decimal_str(branch_ratio(config.rho, bits), bits)
        doc["branch_ratio_exact"] = None if exact is None else str(exact)
    _write_json(_out_path(args, "spectrum.json"), doc)
    msg = (f"spectrum: {config.n_modes} modes, regime {config.regime.value}, "
           f"{len(stats.collisions)} collision pair(s)")
    print(msg)
    return EXIT_OK


def cmd_synthesize(args: argparse.Namespace) -> int:
    config = beam_config(args)
    state0 = build_initial_state(args.data, config, args.seed)
    try:
        system = assemble(config, state0)
        report = solve_min_norm(system, autoscale=args.autoscale,
                                ridge_fallback=args.ridge_fallback)
    except (UncontrollableMode, ResonanceDefect, RationalResonance) as exc:
        _write_json(_out_path(args, "synthesis.json"), _error_doc("synthesize", exc))
        print(f"synthesize: uncontrollable: {exc}", file=sys.stderr)
        return EXIT_UNCONTROLLABLE
    except (NumericalRankDeficiency, StepSizeError) as exc:
        _write_json(_out_path(args, "synthesis.json"), _error_doc("synthesize", exc))
        print(f"synthesize: numerically infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    doc = {"command": "synthesize"}
    doc.update(report.to_json_dict())
    _write_json(_out_path(args, "synthesis.json"), doc)
    write_control_csv(report.control, _out_path(args, "control.csv"))
    print(f"synthesize: cost {report.cost:.6g}, condition ~{report.condition_estimate:.3g}, "
          f"{report.precision_bits_used} bits")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = beam_config(args)
    state0 = build_initial_state(args.data, config, args.seed)
    try:
        report = null_control_experiment(
            config, state0, tolerance=args.tolerance, steps=args.steps,
            autoscale=args.autoscale, ridge_fallback=args.ridge_fallback,
            samples=args.samples)
    except (UncontrollableMode, ResonanceDefect, RationalResonance) as exc:
        _write_json(_out_path(args, "verification.json"), _error_doc("verify", exc))
        print(f"verify: uncontrollable: {exc}", file=sys.stderr)
        return EXIT_UNCONTROLLABLE
    except (NumericalRankDeficiency, StepSizeError) as exc:
        _write_json(_out_path(args, "verification.json"), _error_doc("verify", exc))
        print(f"verify: numerically infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    doc = {"command": "verify"}
    doc.update(report.to_json_dict())
    _write_json(_out_path(args, "verification.json"), doc)
    write_control_csv(report.synthesis.control, _out_path(args, "control.csv"))
    write_trajectory_csv(report.trajectory, _out_path(args, "trajectory.csv"))
    rel = report.final_norm / max(report.initial_norm, 1e-300)
    print(f"verify: verdict {report.verdict.value}, final/initial {rel:.3e}, "
          f"route deviation {report.oracle_deviation:.3e}")
    return EXIT_OK if report.verdict is Verdict.CONTROLLED else EXIT_UNCONTROLLABLE


def cmd_condensation(args: argparse.Namespace) -> int:
    bits = args.precision_bits
    if args.ratio_cf is not None:
        try:
            quotients = [int(a) for a in args.ratio_cf.split(",")]
        except ValueError:
            raise ValueError(f"bad continued-fraction quotients {args.ratio_cf!r}")
        r = ratio_from_quotients(quotients, bits)
        source = f"cf:{args.ratio_cf}"
    elif args.ratio_sqrt is not None:
        r = ratio_from_sqrt(args.ratio_sqrt, bits)
        source = f"sqrt:{args.ratio_sqrt}"
    else:
        rho = Fraction(args.rho)
        if rho <= 2:
            raise ValueError(
                "condensation analysis needs rho > 2 (or an explicit "
                "--ratio-sqrt / --ratio-cf branch ratio)")
        exact = branch_ratio_exact(rho)
        r = exact if exact is not None else branch_ratio(rho, bits)
        source = f"rho:{rho}"
    try:
        est = condensation_estimate(r, args.nmax, tail_start=args.tail_start,
                                    precision_bits=bits)
    except RationalResonance as exc:
        _write_json(_out_path(args, "condensation.json"),
                    _error_doc("condensation", exc))
        print(f"condensation: {exc}", file=sys.stderr)
        return EXIT_UNCONTROLLABLE
    doc = {"command": "condensation", "ratio_source": source}
    doc.update(est.to_json_dict())
    _write_json(_out_path(args, "condensation.json"), doc)
    write_condensation_csv(est, _out_path(args, "condensation.csv"))
    print(f"condensation: estimate {est.estimate:.6g} "
          f"(slow {est.sup_slow:.6g}, fast {est.sup_fast:.6g}, "
          f"tail {args.tail_start}..{args.nmax})")
    return EXIT_OK


def cmd_cost_sweep(args: argparse.Namespace) -> int:
    config = beam_config(args)
    state0 = build_initial_state(args.data, config, args.seed)
    horizons = [h.strip() for h in args.horizons.split(",") if h.strip()]
    if not horizons:
        raise ValueError("at least one horizon is required")
    try:
        sweep = cost_sweep(config, state0, horizons)
    except (UncontrollableMode, ResonanceDefect, RationalResonance) as exc:
        _write_json(_out_path(args, "cost_sweep.json"), _error_doc("cost-sweep", exc))
        print(f"cost-sweep: uncontrollable: {exc}", file=sys.stderr)
        return EXIT_UNCONTROLLABLE
    except (NumericalRankDeficiency, StepSizeError) as exc:
        _write_json(_out_path(args, "cost_sweep.json"), _error_doc("cost-sweep", exc))
        print(f"cost-sweep: numerically infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    import csv as _csv

    with open(_out_path(args, "cost_sweep.csv"), "w", newline="") as fh:
        w = _csv.writer(fh, lineterminator="\n")
        w.writerow(["horizon", "cost"])
        for T, c in zip(sweep.horizons, sweep.costs):
            w.writerow([str(float(T)), repr(c)])
    doc = {"command": "cost-sweep"}
    doc.update(sweep.to_json_dict())
    _write_json(_out_path(args, "cost_sweep.json"), doc)
    fit = "n/a" if sweep.fit_r_squared is None else f"{sweep.fit_r_squared:.4f}"
    print(f"cost-sweep: {len(sweep.costs)} horizons, monotone "
          f"{sweep.monotone_nonincreasing}, fit r^2 {fit}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        apply_config_file(args)
        return args.func(args)
    except (ValueError, TypeError) as exc:
        print(f"beamctl {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UncontrollableMode, ResonanceDefect, RationalResonance) as exc:
        print(f"beamctl {args.command}: uncontrollable: {exc}", file=sys.stderr)
        return EXIT_UNCONTROLLABLE
    except (NumericalRankDeficiency, StepSizeError) as exc:
        print(f"beamctl {args.command}: numerically infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
