"""Energy functional, actuator-placement certification and analytic oracles.

A mode that neither moves the shaker attachment point nor couples to any
active actuator is invisible to the velocity feedback, so its energy is never
dissipated. :func:`certify_placement` flags such modes in a truncated basis;
:func:`flexbeam.dynamics.spectral_abscissa` gives the same answer by brute
force, which is how the two are cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import ClosedLoopSystem, ModalState, Trajectory, assemble, spectral_abscissa
from .model import Actuator, BeamSystem, QuadratureRule, integrate
from .spectral import ModalBasis, mode_rule, window_bound, window_count


# ---------------------------------------------------------------------------
# Lyapunov functional


def lyapunov_energy(state: ModalState, omega2) -> float:
    """Modal energy ``0.5 (q'^T q' + q^T Omega^2 q)``."""
    omega2 = np.asarray(omega2, dtype=float)
    return 0.5 * float(state.qdot @ state.qdot + omega2 @ state.q**2)


def lyapunov_energy_physical(
    system: BeamSystem,
    rule: QuadratureRule,
    v: Callable,
    u_xx: Callable,
    p: float,
    q: float,
) -> float:
    """Energy from physical fields.

    ``v`` is the velocity profile, ``u_xx`` the curvature profile, ``p`` the
    shaker displacement and ``q`` the shaker velocity.
    """
    beam = integrate(lambda x: system.rho * v(x) ** 2 + system.EI * u_xx(x) ** 2, rule)
    return 0.5 * (beam + system.m * q**2 + system.kappa * p**2)


def lyapunov_energy_from_modes(basis: ModalBasis, state: ModalState, rule: QuadratureRule | None = None) -> float:
    """Synthesize the physical fields of a modal state and integrate them."""
    n = state.q.size
    rule = mode_rule(basis.system, basis[n - 1].mu, rule or basis.rule)
    c = basis.at_l0(n)
    return lyapunov_energy_physical(
        basis.system,
        rule,
        v=lambda x: basis.values(x, n) @ state.qdot,
        u_xx=lambda x: basis.values(x, n, deriv=2) @ state.q,
        p=float(c @ state.q),
        q=float(c @ state.qdot),
    )


# ---------------------------------------------------------------------------
# placement certification


@dataclass(frozen=True)
class ModeRecord:
    j: int
    omega: float
    c: float
    B: tuple[float, ...]
    shaker_coupled: bool
    actuator_couplings: tuple[bool, ...]
    controllable: bool


@dataclass(frozen=True)
class CertificationReport:
    """Per-mode coupling flags for the first ``n`` modes.

    ``status`` is ``"certified"``, ``"uncontrollable"`` or ``"indeterminate"``
    (near-multiple frequencies, where a coupled eigenspace can hide an
    undamped direction). ``verdict`` is the conjunction of the per-mode
    flags regardless of status.
    """

    modes: tuple[ModeRecord, ...]
    n: int
    tol_c: float
    tol_b: float
    freq_tol: float
    alpha0: float
    alphas: tuple[float, ...]
    status: str
    near_multiple: tuple[tuple[int, int], ...] = ()
    excluded_roots: tuple[float, ...] = ()

    @property
    def verdict(self) -> bool:
        return all(r.controllable for r in self.modes)

    @property
    def uncontrollable(self) -> list[int]:
        return [r.j for r in self.modes if not r.controllable]


def _near_multiple(omegas, freq_tol):
    pairs = []
    for i in range(len(omegas)):
        for j in range(i + 1, len(omegas)):
            if abs(omegas[i] - omegas[j]) < freq_tol * omegas[i]:
                pairs.append((i + 1, j + 1))
    return tuple(pairs)


def certify_placement(
    basis: ModalBasis,
    actuators: Sequence[Actuator] = (),
    alpha0: float | None = None,
    n: int | None = None,
    tol_c: float = 1e-8,
    tol_b: float = 1e-8,
    freq_tol: float = 1e-6,
    sys: ClosedLoopSystem | None = None,
) -> CertificationReport:
    """Check that each of the first ``n`` modes couples to an active control.

    Mode i counts as controllable when ``alpha0 > 0`` and ``|phi_i(l0)| > tol_c``,
    or when some actuator with ``alpha_j > 0`` has ``|B[i, j]| > tol_b``.
    Couplings are in mass-normalized units. Pass ``sys`` to reuse an
    already assembled system.
    """
    n = len(basis) if n is None else n
    alpha0 = basis.system.alpha0 if alpha0 is None else alpha0
    if sys is None:
        sys = assemble(basis, actuators, alpha0, n)
    records = []
    for i in range(n):
        c = float(sys.c[i])
        row = tuple(float(b) for b in sys.B[i])
        shaker = abs(c) > tol_c
        acts = tuple(abs(b) > tol_b for b in row)
        ok = (alpha0 > 0 and shaker) or any(f and a > 0 for f, a in zip(acts, sys.alphas))
        records.append(ModeRecord(i + 1, float(sys.omegas[i]), c, row, shaker, acts, ok))

    near = _near_multiple(sys.omegas, freq_tol)
    top = basis[n - 1].mu if n <= len(basis) else basis.mu_max
    excluded = tuple(r for r in basis.excluded if r <= top * (1 + 1e-9))
    if near or excluded:
        status = "indeterminate"
    elif all(r.controllable for r in records):
        status = "certified"
    else:
        status = "uncontrollable"
    return CertificationReport(
        tuple(records), n, tol_c, tol_b, freq_tol, float(alpha0),
        tuple(float(a) for a in sys.alphas), status, near, excluded,
    )


def certify_and_abscissa(basis, actuators=(), alpha0=None, n=None, **tols):
    """Run :func:`certify_placement` and the eigen-solve on one assembly."""
    n = len(basis) if n is None else n
    alpha0 = basis.system.alpha0 if alpha0 is None else alpha0
    sys = assemble(basis, actuators, alpha0, n)
    report = certify_placement(basis, actuators, alpha0, n, sys=sys, **tols)
    return report, spectral_abscissa(sys)[0]


# ---------------------------------------------------------------------------
# analytic oracles


@dataclass(frozen=True)
class InterfaceDetCheck:
    numeric: float
    closed_form: float
    ratio: float


def interface_matrix(system: BeamSystem) -> np.ndarray:
    """4x4 matrix of the static interface conditions for cubic beam halves."""
    l, l0, k, EI = system.l, system.l0, system.kappa, system.EI
    r = l - l0
    return np.array(
        [
            [l0, l0**3, r, r**3],
            [1.0, 3 * l0**2, -1.0, -3 * r**2],
            [0.0, 1.0, 0.0, r],
            [-k * l0, 6 * EI - k * l0**3, 0.0, -6 * EI],
        ]
    )


def interface_det_closed_form(system: BeamSystem) -> float:
    l, l0, k, EI = system.l, system.l0, system.kappa, system.EI
    return -EI * l * (l - l0 + 1) - k / 3 * l0 * (l - l0) ** 2 * (l - l0 + l0**2)


def interface_det_check(system: BeamSystem) -> InterfaceDetCheck:
    """Numeric determinant of :func:`interface_matrix` versus the reference closed form.

    The two differ by a constant factor of 6 (cofactor expansion of the
    matrix gives ``-6 EI l (1 + l - l0) - 2 kappa l0 (l-l0)^2 ((l-l0) + l0^2)``).
    """
    numeric = float(np.linalg.det(interface_matrix(system)))
    closed = interface_det_closed_form(system)
    if not numeric < 0:
        raise ArithmeticError(f"interface determinant {numeric} is not negative")
    return InterfaceDetCheck(numeric, closed, numeric / closed)


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool


def poincare_check(coeffs: Sequence[float], l: float, rule: QuadratureRule | None = None) -> InequalityCheck:
    """``int u'^2 <= (l^2/2) int u''^2`` for ``u = sum_n b_n sin(n pi x / l)``."""
    b = np.asarray(coeffs, dtype=float)
    if b.size > 20:
        raise ValueError("at most 20 sine modes")
    k = np.arange(1, b.size + 1) * math.pi / l
    if rule is None:
        rule = QuadratureRule((0.0, l), order=16, max_panel=l / 8)

    def du(x):
        return np.cos(np.outer(x, k)) @ (b * k)

    def d2u(x):
        return -np.sin(np.outer(x, k)) @ (b * k**2)

    lhs = float(integrate(lambda x: du(x) ** 2, rule))
    rhs = float(0.5 * l**2 * integrate(lambda x: d2u(x) ** 2, rule))
    return InequalityCheck(lhs, rhs, lhs <= rhs)


@dataclass(frozen=True)
class BoundCheck:
    count: int
    bound: float
    holds: bool


def root_density_bound_check(mus: Sequence[float], y: float, z: float, period: float, k: int) -> BoundCheck:
    """Root count in ``[y, y+z)`` (in mu^2) against ``(k/P)(sqrt(y+z)-sqrt(y)+P) + 2``."""
    count = window_count(mus, y, z)
    bound = window_bound(y, z, period, k)
    return BoundCheck(count, bound, count <= bound)


# ---------------------------------------------------------------------------
# decay rate


@dataclass(frozen=True)
class DecayFit:
    sigma: float
    residual: float
    degenerate: bool = False


def decay_rate_estimate(traj: Trajectory, floor: float = 1e-12) -> DecayFit:
    """Fit ``log V(t) ~ a + 2 sigma t`` over samples with ``V > floor * V(0)``.

    ``residual`` is the RMS misfit of log V. A (numerically) constant V
    returns ``sigma = 0`` with ``degenerate=True``.
    """
    V = np.asarray(traj.V, dtype=float)
    t = np.asarray(traj.t, dtype=float)
    if V.size < 2 or not V[0] > 0:
        raise ValueError("decay fit needs a trajectory with V(0) > 0")
    keep = V > floor * V[0]
    t, V = t[keep], V[keep]
    if V.size < 3 or (V.max() - V.min()) <= 1e-9 * V[0]:
        return DecayFit(0.0, 0.0, True)
    A = np.column_stack([np.ones_like(t), 2.0 * (t - t[0])])
    coef, *_ = np.linalg.lstsq(A, np.log(V), rcond=None)
    resid = float(np.sqrt(np.mean((np.log(V) - A @ coef) ** 2)))
    return DecayFit(min(float(coef[1]), 0.0), resid, False)
