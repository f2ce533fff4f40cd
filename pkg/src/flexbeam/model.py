"""Domain types, parameter checks and breakpoint-aware quadrature.

Every integral over the beam in this package goes through a
:class:`QuadratureRule`: composite Gauss-Legendre on panels that are split at
the shaker attachment point and at every actuator support edge, so integrands
that are only piecewise smooth are integrated panel-wise smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class BeamSystem:
    """Simply supported beam with a spring-mass shaker attached at ``l0``.

    All quantities are SI. ``alpha0`` is the shaker velocity-feedback gain;
    zero means the shaker is passive.
    """

    E: float
    I: float
    rho: float
    l: float
    l0: float
    m: float
    kappa: float
    alpha0: float = 0.0

    @property
    def EI(self) -> float:
        return self.E * self.I

    @property
    def wave_speed(self) -> float:
        """sqrt(EI/rho), the factor mapping mu**2 to omega."""
        return math.sqrt(self.EI / self.rho)

    def omega(self, mu):
        return self.wave_speed * np.asarray(mu) ** 2

    def mu(self, omega):
        return np.sqrt(np.asarray(omega) / self.wave_speed)


@dataclass(frozen=True)
class Actuator:
    """Piezo actuator described directly by its curvature profile.

    The profile is a raised-cosine bump of peak ``height`` supported on
    ``[center - width/2, center + width/2]``.
    """

    center: float
    width: float
    height: float = 1.0
    alpha: float = 1.0

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - 0.5 * self.width, self.center + 0.5 * self.width)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _finite_positive(name, value, out, allow_zero=False):
    if not np.isfinite(value):
        out.append(f"{name} is not finite")
    elif allow_zero and value < 0:
        out.append(f"{name} must be >= 0")
    elif not allow_zero and value <= 0:
        out.append(f"{name} must be > 0")


def validate_system(system: BeamSystem, actuators: Sequence[Actuator] = ()) -> ValidationReport:
    """Collect every violated constraint; never raises and never mutates."""
    out: list[str] = []
    for name in ("E", "I", "rho", "l", "m", "kappa"):
        _finite_positive(name, getattr(system, name), out)
    _finite_positive("alpha0", system.alpha0, out, allow_zero=True)
    if not np.isfinite(system.l0) or not (0.0 < system.l0 < system.l):
        out.append("l0 outside (0,l)")
    for j, a in enumerate(actuators, start=1):
        tag = f"actuator {j}"
        _finite_positive(f"{tag} width", a.width, out)
        _finite_positive(f"{tag} height", a.height, out)
        _finite_positive(f"{tag} alpha", a.alpha, out, allow_zero=True)
        lo, hi = a.support
        if not (lo > 0.0 and hi < system.l):
            out.append(f"{tag}: support [{lo:g}, {hi:g}] not inside (0,l)")
        if lo <= system.l0 <= hi:
            out.append(f"{tag}: support contains l0")
    return ValidationReport(tuple(out))


def require_valid(system: BeamSystem, actuators: Sequence[Actuator] = ()) -> None:
    report = validate_system(system, actuators)
    if not report.ok:
        raise ValueError("invalid system: " + "; ".join(report.violations))


def actuator_profile(a: Actuator, x):
    """Curvature influence of actuator ``a`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    r = x - a.center
    inside = np.abs(r) <= 0.5 * a.width
    bump = 0.5 * a.height * (1.0 + np.cos(2.0 * np.pi * r / a.width))
    out = np.where(inside, bump, 0.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on ``[breakpoints[0], breakpoints[-1]]``.

    Each interval between consecutive breakpoints is split into equal panels
    no wider than ``max_panel``; every panel gets an ``order``-point rule.
    """

    breakpoints: tuple[float, ...]
    order: int = 16
    max_panel: float | None = None
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    panels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bp = np.unique(np.asarray(self.breakpoints, dtype=float))
        if bp.size < 2:
            raise ValueError("need at least two distinct breakpoints")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        edges = [bp[:1]]
        for a, b in zip(bp[:-1], bp[1:]):
            n = 1 if self.max_panel is None else max(1, math.ceil((b - a) / self.max_panel - 1e-12))
            edges.append(np.linspace(a, b, n + 1)[1:])
        panels = np.concatenate(edges)
        t, w = np.polynomial.legendre.leggauss(self.order)
        lo, hi = panels[:-1, None], panels[1:, None]
        half = 0.5 * (hi - lo)
        nodes = (0.5 * (hi + lo) + half * t).ravel()
        weights = (half * w).ravel()
        object.__setattr__(self, "breakpoints", tuple(bp.tolist()))
        object.__setattr__(self, "panels", panels)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)
        self.panels.setflags(write=False)

    @property
    def length(self) -> float:
        return self.breakpoints[-1] - self.breakpoints[0]

    @classmethod
    def for_system(
        cls,
        system: BeamSystem,
        actuators: Sequence[Actuator] = (),
        order: int = 16,
        max_panel: float | None = None,
    ) -> "QuadratureRule":
        """Rule on ``[0, l]`` split at ``l0`` and at all actuator edges.

        ``max_panel`` defaults to ``l/24``, enough to resolve the first few
        dozen mode shapes with the default order.
        """
        pts = [0.0, system.l0, system.l]
        for a in actuators:
            pts.extend(a.support)
        pts = [p for p in pts if 0.0 <= p <= system.l]
        if max_panel is None:
            max_panel = system.l / 24.0
        return cls(tuple(pts), order=order, max_panel=max_panel)


def integrate(f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule):
    """Integrate ``f`` with ``rule``.

    ``f`` receives the full node array. If it returns an array whose leading
    axis matches the nodes, the trailing axes are integrated elementwise.
    """
    vals = np.asarray(f(rule.nodes), dtype=float)
    if vals.ndim == 0:
        vals = np.full(rule.nodes.shape, float(vals))
    return np.tensordot(rule.weights, vals, axes=(0, 0))[()]
