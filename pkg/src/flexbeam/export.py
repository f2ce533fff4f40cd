"""Comma-separated exports with ``#`` comment headers.

Floats are written with ``repr`` (shortest round-trip form) unless a
precision is given, so files are byte-identical across runs.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .certify import CertificationReport
from .dynamics import Trajectory
from .spectral import ModalBasis, mode_table

MODE_HEADER = ["j", "mu", "omega", "phi_l0", "a1", "a2", "a3", "a4"]


def fmt(x, precision: int | None = None) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if precision is None:
        return repr(x)
    return f"{x:.{precision}g}"


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    comments: Sequence[str] = (),
    precision: int | None = None,
) -> Path:
    path = Path(path)
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v, precision) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and float data of a file written by :func:`write_csv`."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    data = [[_parse(v) for v in ln.split(",")] for ln in lines[1:]]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def _parse(v: str) -> float:
    if v in ("true", "false"):
        return float(v == "true")
    return float(v)


def write_modes(path, basis: ModalBasis, comments=(), precision=None) -> Path:
    return write_csv(path, MODE_HEADER, mode_table(basis), comments, precision)


def trajectory_header(n: int, k: int) -> list[str]:
    return (
        ["t", "V", "w_l0", "v_l0"]
        + [f"q_{i}" for i in range(1, n + 1)]
        + [f"qdot_{i}" for i in range(1, n + 1)]
        + [f"M_{j}" for j in range(1, k + 1)]
        + ["F"]
    )


def write_trajectory(path, traj: Trajectory, comments=(), precision=None) -> Path:
    n = traj.q.shape[1]
    k = traj.controls.shape[1] - 1
    data = np.column_stack([traj.t, traj.V, traj.w_l0, traj.v_l0, traj.q, traj.qdot, traj.controls])
    return write_csv(path, trajectory_header(n, k), data.tolist(), comments, precision)


def certification_header(k: int) -> list[str]:
    return ["j", "omega", "c_j"] + [f"B_j{i}" for i in range(1, k + 1)] + ["controllable"]


def write_certification(path, report: CertificationReport, comments=(), precision=None) -> Path:
    k = len(report.alphas)
    rows = [(r.j, r.omega, r.c, *r.B, r.controllable) for r in report.modes]
    return write_csv(path, certification_header(k), rows, comments, precision)


def key_value_text(items: Iterable[tuple[str, object]], comments=(), precision=None) -> str:
    lines = [f"# {c}" for c in comments]
    for key, val in items:
        if isinstance(val, (list, tuple)):
            val = " ".join(fmt(v, precision) for v in val)
        elif val is None:
            val = "none"
        else:
            val = fmt(val, precision)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def certification_summary(report: CertificationReport, abscissa: float | None = None) -> list[tuple[str, object]]:
    return [
        ("status", report.status),
        ("verdict", report.verdict),
        ("n_modes", report.n),
        ("tol_c", report.tol_c),
        ("tol_b", report.tol_b),
        ("freq_tol", report.freq_tol),
        ("alpha0", report.alpha0),
        ("alphas", list(report.alphas)),
        ("uncontrollable_modes", list(report.uncontrollable)),
        ("near_multiple_pairs", [f"{i}-{j}" for i, j in report.near_multiple]),
        ("excluded_roots", list(report.excluded_roots)),
        ("spectral_abscissa", abscissa),
    ]
