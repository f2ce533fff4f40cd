"""``flexbeam`` command line entry point.

Exit codes: 0 ok / certified, 1 constraint violation, 2 parse or usage
error, 3 uncontrollable mode found, 4 indeterminate (near-multiple
frequencies), 5 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .certify import certify_placement, decay_rate_estimate
from .config import ConfigError, RunConfig
from .dynamics import ModalState, assemble, project_profile, simulate, spectral_abscissa
from .export import (
    certification_summary,
    key_value_text,
    write_certification,
    write_csv,
    write_modes,
    write_trajectory,
)
from .model import validate_system
from .spectral import (
    MultipleRootWarning,
    build_basis,
    default_grid_step,
    eigenvalue_growth_check,
    find_roots,
    full_roots,
    pair_nearest,
    truncated_period,
    truncated_frequency,
    rational_ratio,
    roots_per_period,
)

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_UNCONTROLLABLE, EXIT_INDETERMINATE, EXIT_NUMERIC = 0, 1, 2, 3, 4, 5
STATUS_EXIT = {"certified": EXIT_OK, "uncontrollable": EXIT_UNCONTROLLABLE, "indeterminate": EXIT_INDETERMINATE}


class UsageError(Exception):
    pass


def _comments(cfg: RunConfig, command: str) -> list[str]:
    return [f"flexbeam {__version__} {command}", f"config-sha256 {cfg.digest}"]


def _outdir(cfg: RunConfig, args) -> Path:
    d = Path(args.out if args.out is not None else cfg.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(path: Path, text: str) -> None:
    path.write_text(text)
    sys.stdout.write(text)


def _mu_max(cfg: RunConfig) -> float:
    if cfg.mu_max is not None:
        return cfg.mu_max
    return (cfg.n_modes + 2) * math.pi / cfg.system.l


def _basis(cfg: RunConfig):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MultipleRootWarning)
        basis = build_basis(cfg.system, cfg.n_modes, grid_step=cfg.grid_step, xtol=cfg.root_tol)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if len(basis) < cfg.n_modes:
        raise ArithmeticError(f"only {len(basis)} of {cfg.n_modes} modes could be built")
    return basis


def _require_valid(cfg: RunConfig) -> int:
    report = validate_system(cfg.system, cfg.actuators)
    for v in report.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INVALID


# ---------------------------------------------------------------------------


def cmd_validate(cfg: RunConfig, args) -> int:
    report = validate_system(cfg.system, cfg.actuators)
    sys.stdout.write(f"# config-sha256 {cfg.digest}\n")
    sys.stdout.write(cfg.to_ini())
    sys.stdout.write(f"\nvalid = {'true' if report.ok else 'false'}\n")
    for v in report.violations:
        sys.stdout.write(f"violation = {v}\n")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_spectrum(cfg: RunConfig, args) -> int:
    if (rc := _require_valid(cfg)) != EXIT_OK:
        return rc
    s, out, p = cfg.system, _outdir(cfg, args), cfg.precision
    mu_max = _mu_max(cfg)
    ratio = cfg.ratio or rational_ratio(s.l, s.l0)
    period = None
    if ratio is not None:
        if 2 * ratio[0] == ratio[1]:
            period = 2 * math.pi / s.l
        else:
            period = truncated_period(s.l, s.l0, *ratio)
    h = cfg.grid_step or default_grid_step(s.l, period)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MultipleRootWarning)
        r0 = find_roots(lambda t: truncated_frequency(t, s.l, s.l0), 0.5 * h, mu_max, h) if mu_max > 0.5 * h else np.array([])
        scan = full_roots(s, mu_max, h)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rf = scan.roots

    near, gap = pair_nearest(rf, r0)
    rows = [(j, mu, float(s.omega(mu)), near[j - 1], gap[j - 1]) for j, mu in enumerate(rf, start=1)]
    cm = _comments(cfg, "spectrum")
    write_csv(out / "spectrum.csv", ["j", "mu_full", "omega", "mu_truncated_nearest", "gap"], rows, cm, p)
    write_csv(out / "truncated_roots.csv", ["j", "mu"], list(enumerate(r0, start=1)), cm, p)

    items = [("mu_max", mu_max), ("grid_step", h), ("n_full_roots", len(rf)), ("n_truncated_roots", len(r0))]
    if len(rf) >= 10:
        fit = eigenvalue_growth_check(rf)
        items += [("growth_slope", fit.slope), ("growth_intercept", fit.intercept), ("growth_residual", fit.residual)]
    else:
        items.append(("growth_fit", "skipped (fewer than 10 roots)"))
    if period is not None:
        items += [("ratio", f"{ratio[0]}/{ratio[1]}"), ("period", period),
                  ("roots_per_period", len(roots_per_period(s.l, s.l0, period)))]
    items += [("tangential_roots", list(scan.tangential)),
              ("clustered_pairs", [f"{i + 1}-{j + 1}" for i, j in scan.clustered])]
    if not len(rf):
        items.append(("notice", "no roots below mu_max"))
        print("notice: no roots below mu_max", file=sys.stderr)
    _emit(out / "spectrum.txt", key_value_text(items, cm, p))
    return EXIT_OK


def cmd_modes(cfg: RunConfig, args) -> int:
    if (rc := _require_valid(cfg)) != EXIT_OK:
        return rc
    out = _outdir(cfg, args)
    basis = _basis(cfg)
    cm = _comments(cfg, "modes")
    write_modes(out / "modes.csv", basis, cm, cfg.precision)
    _emit(out / "modes.txt", key_value_text(
        [("n_modes", len(basis)), ("mu_max", basis.mu_max), ("excluded_roots", list(basis.excluded))],
        cm, cfg.precision))
    return EXIT_OK


def _certify(cfg: RunConfig):
    basis = _basis(cfg)
    sys_ = assemble(basis, cfg.actuators, cfg.system.alpha0, cfg.n_modes)
    report = certify_placement(basis, cfg.actuators, cfg.system.alpha0, cfg.n_modes, sys=sys_)
    return basis, sys_, report, spectral_abscissa(sys_)[0]


def cmd_certify(cfg: RunConfig, args) -> int:
    if (rc := _require_valid(cfg)) != EXIT_OK:
        return rc
    out = _outdir(cfg, args)
    _, _, report, absc = _certify(cfg)
    cm = _comments(cfg, "certify")
    write_certification(out / "certification.csv", report, cm, cfg.precision)
    _emit(out / "certification.txt", key_value_text(certification_summary(report, absc), cm, cfg.precision))
    return STATUS_EXIT[report.status]


def _initial_state(cfg, basis):
    n = cfg.n_modes
    if cfg.initial == "first_mode_displacement":
        l = cfg.system.l
        return project_profile(basis, n, u=lambda x: np.sin(np.pi * np.asarray(x) / l))
    amps = np.zeros(n)
    vals = np.asarray(cfg.initial, dtype=float)[:n]
    amps[: vals.size] = vals
    return ModalState(amps, np.zeros(n)), 0.0


def cmd_simulate(cfg: RunConfig, args) -> int:
    if (rc := _require_valid(cfg)) != EXIT_OK:
        return rc
    out = _outdir(cfg, args)
    basis = _basis(cfg)
    sys_ = assemble(basis, cfg.actuators, cfg.system.alpha0, cfg.n_modes)
    x0, resid = _initial_state(cfg, basis)
    traj = simulate(sys_, x0, cfg.t_end, cfg.dt, every=cfg.every)
    cm = _comments(cfg, "simulate")
    write_trajectory(out / "trajectory.csv", traj, cm, cfg.precision)
    V0, V1 = float(traj.V[0]), float(traj.V[-1])
    if V0 > 0:
        fit = decay_rate_estimate(traj)
        sigma, fit_res, degenerate = fit.sigma, fit.residual, fit.degenerate
    else:
        sigma, fit_res, degenerate = 0.0, 0.0, True
    items = [
        ("V0", V0),
        ("V_end", V1),
        ("relative_change", (V1 / V0 - 1.0) if V0 > 0 else 0.0),
        ("sigma_hat", sigma),
        ("fit_residual", fit_res),
        ("fit_degenerate", degenerate),
        ("spectral_abscissa", spectral_abscissa(sys_)[0]),
        ("max_step_increase", traj.max_energy_increase),
        ("projection_residual", resid),
        ("samples", len(traj.t)),
    ]
    _emit(out / "simulation.txt", key_value_text(items, cm, cfg.precision))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    if args.param is None or args.lo is None or args.hi is None or args.steps is None:
        raise UsageError("sweep needs --param, --from, --to and --steps")
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    try:
        cfg.with_param(args.param, 0.0)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    out = _outdir(cfg, args)
    rows = []
    for v in np.linspace(args.lo, args.hi, args.steps):
        c = cfg.with_param(args.param, float(v))
        if not validate_system(c.system, c.actuators).ok:
            rows.append((float(v), float("nan"), "invalid"))
            continue
        _, _, report, absc = _certify(c)
        rows.append((float(v), absc, report.status))
    cm = _comments(cfg, f"sweep {args.param} {args.lo!r} {args.hi!r} {args.steps}")
    write_csv(out / "sweep.csv", ["param", "abscissa", "verdict"], rows, cm, cfg.precision)
    for row in rows:
        print(",".join(str(v) for v in row))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "modes": cmd_modes,
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flexbeam", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="INI run configuration")
    p.add_argument("--out", default=None, help="output directory (overrides [output] directory)")
    p.add_argument("--n-modes", type=int, default=None, help="override spectral.n_modes")
    p.add_argument("--param", default=None, help="sweep parameter, e.g. shaker.alpha0, actuator.1.center")
    p.add_argument("--from", dest="lo", type=float, default=None)
    p.add_argument("--to", dest="hi", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = RunConfig.load(args.config)
        if args.n_modes is not None:
            if args.n_modes <= 0:
                raise ConfigError("--n-modes must be positive")
            cfg = replace(cfg, n_modes=args.n_modes)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
