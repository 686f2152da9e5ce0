"""Command-line interface.

Subcommands: ``denoise``, ``certify``, ``flow``, ``check-conditions``,
``conjugate-table``.  Every option can also be given in a ``--config`` file
(one ``key = value`` per line); command-line values win.  All commands are
deterministic given the configuration and seed.

Exit codes: 0 success, 2 certificate failure, 64 usage error, 65 data or
configuration error, 70 internal failure.  Failures print a one-line JSON
error object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .calculus import ScalarImage, gradient
from .certificate import CertificateTolerances, certify
from .config import ConfigError, RunConfig, build_phi_field, parse_config_file
from .flow import run_flow
from .gridio import ParseError, load_image, save_image
from .noise import add_noise
from .phi import (Condition, Family, check_a0, check_almost_monotone,
                  check_double_phase_holder, check_log_holder,
                  check_strong_holder_a, check_strong_holder_p, conjugate_eval,
                  phi_total)
from .solver import SolverConfig, SolverError, solve_rof

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_CERT_FAIL = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70

COMMANDS = ("denoise", "certify", "flow", "check-conditions", "conjugate-table")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit_error(code: int, exc_type: str, message: str):
    sys.stderr.write(json.dumps(
        {"error": {"code": code, "type": exc_type, "message": message}}) + "\n")


def _solver_config(cfg: RunConfig) -> SolverConfig:
    return SolverConfig(
        lam=cfg.lam, tau=cfg.tau, sigma=cfg.sigma, theta=cfg.theta,
        max_iters=cfg.max_iters, gap_tol=cfg.gap_tol, newton_tol=cfg.newton_tol,
        newton_max=cfg.newton_max, seed=cfg.seed, check_every=cfg.check_every)


def _tolerances(cfg: RunConfig) -> CertificateTolerances:
    return CertificateTolerances(gap_rel=cfg.tol_gap_rel, div_rel=cfg.tol_div_rel)


def _require(cfg: RunConfig, *attrs):
    for attr in attrs:
        if not getattr(cfg, attr):
            raise ConfigError(f"missing required key {attr!r}")


def _cmd_denoise(cfg: RunConfig) -> int:
    _require(cfg, "input", "output_u")
    f = load_image(cfg.input, h=cfg.h)
    if cfg.noise_sigma > 0:
        f = add_noise(f, cfg.noise_sigma, cfg.seed)
    field = build_phi_field(cfg, shape=f.shape, h=f.h)
    result = solve_rof(f, field, _solver_config(cfg),
                       metrics_path=cfg.metrics or None)
    save_image(result.u, cfg.output_u)
    if cfg.output_xi_x:
        save_image(ScalarImage(result.xi.x, f.h), cfg.output_xi_x)
    if cfg.output_xi_y:
        save_image(ScalarImage(result.xi.y, f.h), cfg.output_xi_y)
    report = certify(result.u, result.xi, f, field, cfg.lam, _tolerances(cfg))
    if cfg.certificate:
        with open(cfg.certificate, "w", encoding="utf-8") as handle:
            handle.write(report.to_json() + "\n")
    if cfg.young_map_out:
        save_image(ScalarImage(report.young_residual_map, f.h), cfg.young_map_out)
    return EXIT_OK if report.verdict else EXIT_CERT_FAIL


def _cmd_certify(cfg: RunConfig) -> int:
    _require(cfg, "input_u", "input_xi_x", "input_xi_y", "input_f")
    u = load_image(cfg.input_u, h=cfg.h)
    f = load_image(cfg.input_f, h=u.h)
    xix = load_image(cfg.input_xi_x, h=u.h)
    xiy = load_image(cfg.input_xi_y, h=u.h)
    from .calculus import VectorField

    xi = VectorField(xix.data, xiy.data, u.h)
    field = build_phi_field(cfg, shape=u.shape, h=u.h)
    report = certify(u, xi, f, field, cfg.lam, _tolerances(cfg))
    payload = report.to_json()
    if cfg.certificate:
        with open(cfg.certificate, "w", encoding="utf-8") as handle:
            handle.write(payload + "\n")
    else:
        sys.stdout.write(payload + "\n")
    if cfg.young_map_out:
        save_image(ScalarImage(report.young_residual_map, u.h), cfg.young_map_out)
    return EXIT_OK if report.verdict else EXIT_CERT_FAIL


def _cmd_flow(cfg: RunConfig) -> int:
    _require(cfg, "input", "output")
    u0 = load_image(cfg.input, h=cfg.h)
    field = build_phi_field(cfg, shape=u0.shape, h=u0.h)
    trajectory = run_flow(u0, cfg.dt, cfg.n_steps, field, _solver_config(cfg))
    with open(cfg.output, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "time", "energy", "gap"])
        for k, (t, e) in enumerate(zip(trajectory.times, trajectory.energies)):
            gap = "" if k == 0 else repr(trajectory.step_gaps[k - 1])
            writer.writerow([k, repr(t), repr(e), gap])
    if cfg.snapshot_every > 0:
        prefix = cfg.snapshot_prefix or cfg.output
        for k, state in enumerate(trajectory.states):
            if k % cfg.snapshot_every == 0:
                save_image(state, f"{prefix}.state{k:05d}.fgrid")
    return EXIT_OK


def _condition_battery(cfg: RunConfig):
    field = build_phi_field(cfg)
    reports = [check_a0(field),
               check_almost_monotone(field, 1.0, "inc")]
    fam = field.family
    if fam is Family.VARIABLE_EXPONENT:
        reports.append(check_almost_monotone(field, float(np.max(field.p_field)), "dec"))
        reports.append(check_log_holder(field.p_field, field.h))
        reports.append(check_strong_holder_p(field.p_field, field.h))
    elif fam is Family.DOUBLE_PHASE:
        reports.append(check_almost_monotone(field, field.q, "dec"))
        reports.append(check_double_phase_holder(field.a_field, field.q, 2, field.h))
        reports.append(check_strong_holder_a(field.a_field, field.q, 2, field.h))
    else:
        reports.append(check_almost_monotone(field, 1.0, "dec"))
    return reports


def _cmd_check_conditions(cfg: RunConfig) -> int:
    reports = _condition_battery(cfg)
    sys.stdout.write(json.dumps([r.to_dict() for r in reports], indent=1,
                                sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_conjugate_table(cfg: RunConfig) -> int:
    field = build_phi_field(cfg)
    pixel = (cfg.pixel_i, cfg.pixel_j)
    lines = ["s,conjugate"]
    for s in np.linspace(0.0, cfg.s_max, cfg.s_samples):
        value = conjugate_eval(field, pixel, float(s))
        lines.append(f"{s!r},{'inf' if value == float('inf') else repr(value)}")
    text = "\n".join(lines) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_HANDLERS = {
    "denoise": _cmd_denoise,
    "certify": _cmd_certify,
    "flow": _cmd_flow,
    "check-conditions": _cmd_check_conditions,
    "conjugate-table": _cmd_conjugate_table,
}

# (key, help) pairs exposed as --key options on every subcommand
_OPTIONS = [
    ("input", "input image or grid"),
    ("input_u", "primal candidate (certify)"),
    ("input_xi_x", "dual field x component (certify)"),
    ("input_xi_y", "dual field y component (certify)"),
    ("input_f", "datum image (certify)"),
    ("output_u", "denoised image output path"),
    ("output_xi_x", "dual field x output path"),
    ("output_xi_y", "dual field y output path"),
    ("certificate", "certificate JSON output path"),
    ("metrics", "per-check metrics CSV output path"),
    ("output", "generic output path (flow CSV, conjugate table)"),
    ("young_map_out", "Young residual map output path"),
    ("snapshot_prefix", "flow snapshot path prefix"),
    ("family", "integrand family"),
    ("p_path", "exponent grid file"), ("p_const", "constant exponent"),
    ("a_path", "double-phase weight grid file"), ("a_const", "constant weight"),
    ("w_path", "TV weight grid file"), ("w_const", "constant TV weight"),
    ("q", "double-phase upper exponent"),
    ("h", "grid spacing override"),
    ("height", "grid rows (no input image)"),
    ("width", "grid cols (no input image)"),
    ("lambda", "fidelity weight"),
    ("tau", "primal step"), ("sigma", "dual step"), ("theta", "extrapolation"),
    ("max_iters", "iteration cap"), ("gap_tol", "relative duality gap stop"),
    ("newton_tol", "scalar prox tolerance"), ("newton_max", "scalar prox iterations"),
    ("check_every", "gap check period"),
    ("seed", "PRNG seed"), ("noise_sigma", "added Gaussian noise level"),
    ("tol_gap_rel", "certificate gap tolerance"),
    ("tol_div_rel", "certificate divergence tolerance"),
    ("dt", "flow time step"), ("n_steps", "flow step count"),
    ("snapshot_every", "flow snapshot period (0 = none)"),
    ("pixel_i", "pixel row (conjugate table)"),
    ("pixel_j", "pixel column (conjugate table)"),
    ("s_max", "largest dual argument (conjugate table)"),
    ("s_samples", "sample count (conjugate table)"),
]


def _build_parser() -> _Parser:
    parser = _Parser(prog="vgtv",
                     description="Variable-growth TV denoising with optimality certificates")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        cmd = sub.add_parser(name, add_help=True)
        cmd.add_argument("--config", default=None, help="key = value config file")
        for key, help_text in _OPTIONS:
            cmd.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                             metavar="V", help=help_text)
    return parser


def run(cfg: RunConfig) -> int:
    """Dispatch a fully built configuration; returns the exit code."""
    if cfg.command not in _HANDLERS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    return _HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        _emit_error(EXIT_USAGE, "usage", str(exc))
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if ns.command is None:
        _emit_error(EXIT_USAGE, "usage", "missing command")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        file_values = parse_config_file(ns.config) if ns.config else {}
        cli_values = {key: getattr(ns, key) for key, _ in _OPTIONS}
        cli_values["command"] = ns.command
        cfg = RunConfig.from_mappings(file_values, cli_values)
        cfg.command = ns.command
        return run(cfg)
    except (ConfigError, ParseError, FileNotFoundError, IsADirectoryError,
            PermissionError, ValueError) as exc:
        _emit_error(EXIT_DATA, type(exc).__name__, str(exc))
        return EXIT_DATA
    except SolverError as exc:
        _emit_error(EXIT_INTERNAL, type(exc).__name__, str(exc))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
