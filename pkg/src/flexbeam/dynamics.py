"""Modal truncation of the closed-loop beam and its time integration.

Projecting onto the first ``n`` mass-normalized open-loop modes gives

    q'' + Omega^2 q = B M + c F

with ``B[i, j] = int chi_j phi_i dx`` and ``c[i] = phi_i(l0)``. Under the
velocity feedback ``M_j = -alpha_j (B^T q')_j``, ``F = -alpha0 c^T q'`` this
closes to ``q'' = -Omega^2 q - D q'`` with ``D = B diag(alpha) B^T + alpha0 c c^T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .model import Actuator, QuadratureRule, actuator_profile, require_valid
from .spectral import ModalBasis, mode_rule


@dataclass(frozen=True)
class ClosedLoopSystem:
    """Truncated closed-loop model.

    ``omega2`` holds the diagonal of Omega^2. ``D`` is derived from the
    couplings and gains and is never stored independently.
    """

    omega2: np.ndarray
    B: np.ndarray
    c: np.ndarray
    alphas: np.ndarray
    alpha0: float
    D: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        omega2 = np.asarray(self.omega2, dtype=float).ravel()
        n = omega2.size
        B = np.asarray(self.B, dtype=float).reshape(n, -1)
        c = np.asarray(self.c, dtype=float).ravel()
        alphas = np.asarray(self.alphas, dtype=float).ravel()
        if c.size != n or alphas.size != B.shape[1]:
            raise ValueError("inconsistent dimensions in closed-loop system")
        if np.any(alphas < 0) or self.alpha0 < 0:
            raise ValueError("feedback gains must be nonnegative")
        D = (B * alphas) @ B.T + self.alpha0 * np.outer(c, c)
        D = 0.5 * (D + D.T)
        for name, val in (("omega2", omega2), ("B", B), ("c", c), ("alphas", alphas), ("D", D)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "alpha0", float(self.alpha0))

    @property
    def n(self) -> int:
        return self.omega2.size

    @property
    def k(self) -> int:
        return self.B.shape[1]

    @property
    def omegas(self) -> np.ndarray:
        return np.sqrt(self.omega2)

    @property
    def A(self) -> np.ndarray:
        """First-order matrix ``[[0, I], [-Omega^2, -D]]`` acting on ``(q, q')``."""
        n = self.n
        A = np.zeros((2 * n, 2 * n))
        A[:n, n:] = np.eye(n)
        A[n:, :n] = -np.diag(self.omega2)
        A[n:, n:] = -self.D
        return A

    def energy(self, q, qdot):
        """``0.5 (q'^T q' + q^T Omega^2 q)``; broadcasts over leading axes."""
        q, qdot = np.asarray(q), np.asarray(qdot)
        return 0.5 * (np.sum(qdot**2, axis=-1) + np.sum(self.omega2 * q**2, axis=-1))


@dataclass(frozen=True)
class ModalState:
    q: np.ndarray
    qdot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        q = np.array(self.q, dtype=float).ravel()
        qdot = np.array(self.qdot, dtype=float).ravel()
        if q.shape != qdot.shape:
            raise ValueError("q and qdot must have the same length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot))):
            raise ValueError("state has non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qdot)

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.q, self.qdot])

    @classmethod
    def from_x(cls, x, t=0.0) -> "ModalState":
        n = len(x) // 2
        return cls(x[:n], x[n:], t)

    @classmethod
    def zeros(cls, n: int) -> "ModalState":
        return cls(np.zeros(n), np.zeros(n))


def assemble(
    basis: ModalBasis,
    actuators: Sequence[Actuator] = (),
    alpha0: float | None = None,
    n: int | None = None,
    rule: QuadratureRule | None = None,
    orth_tol: float = 1e-6,
) -> ClosedLoopSystem:
    """Project the controlled beam onto the first ``n`` modes of ``basis``.

    ``alpha0`` defaults to the gain stored on ``basis.system``. Refuses a
    basis whose generalized mass or stiffness matrices are off by more than
    ``orth_tol``.
    """
    system = basis.system
    require_valid(system, actuators)
    n = len(basis) if n is None else n
    if not 1 <= n <= len(basis):
        raise ValueError(f"n={n} outside 1..{len(basis)}")
    alpha0 = system.alpha0 if alpha0 is None else alpha0
    if rule is None:
        rule = QuadratureRule.for_system(system, actuators)
    rule = mode_rule(system, basis[n - 1].mu, rule)

    M = basis.gram(n, rule)
    if np.abs(M - np.eye(n)).max() > orth_tol:
        raise ValueError(f"basis fails generalized orthogonality (err {np.abs(M - np.eye(n)).max():.2e})")
    K = basis.stiffness(n, rule)
    w2 = basis.omegas[:n] ** 2
    if np.abs(K - np.diag(w2)).max() > orth_tol * w2.max():
        raise ValueError("basis fails the stiffness identity")

    if actuators:
        P = basis.values(rule.nodes, n)
        chi = np.stack([actuator_profile(a, rule.nodes) for a in actuators], axis=-1)
        B = (P.T * rule.weights) @ chi
    else:
        B = np.zeros((n, 0))
    alphas = np.array([a.alpha for a in actuators], dtype=float)
    return ClosedLoopSystem(w2, B, basis.at_l0(n), alphas, alpha0)


def feedback(sys: ClosedLoopSystem, state: ModalState) -> np.ndarray:
    """Control vector ``(M_1, ..., M_k, F)`` for the current velocities."""
    if state.qdot.size != sys.n:
        raise ValueError("state dimension does not match system")
    M = -sys.alphas * (sys.B.T @ state.qdot)
    F = -sys.alpha0 * (sys.c @ state.qdot)
    return np.append(M, F)


class MidpointStepper:
    """Implicit midpoint map ``x+ = (I - h/2 A)^-1 (I + h/2 A) x``.

    The one-step map is formed once, in the energy-scaled coordinates
    ``(Omega q, q')`` where it is orthogonal for ``D = 0``.
    """

    def __init__(self, sys: ClosedLoopSystem, dt: float):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.sys, self.dt = sys, float(dt)
        if np.any(sys.omega2 <= 0):
            raise ValueError("modal frequencies must be positive")
        S = _scaled_generator(sys)
        eye = np.eye(S.shape[0])
        lu = lu_factor(eye - 0.5 * dt * S, check_finite=True)
        if np.any(np.diag(lu[0]) == 0):
            raise np.linalg.LinAlgError("singular midpoint system")
        # x+ - x = (I - h/2 S)^-1 h S x; storing the small increment map keeps
        # rounding in the propagator from accumulating as energy drift
        self._inc = lu_solve(lu, dt * S)
        w = sys.omegas
        self._scale = np.concatenate([w, np.ones_like(w)])

    def advance_scaled(self, y: np.ndarray) -> np.ndarray:
        return y + self._inc @ y

    def advance(self, x: np.ndarray) -> np.ndarray:
        return self.advance_scaled(x * self._scale) / self._scale

    def __call__(self, state: ModalState) -> ModalState:
        return ModalState.from_x(self.advance(state.x), state.t + self.dt)


def _scaled_generator(sys: ClosedLoopSystem) -> np.ndarray:
    """``[[0, Omega], [-Omega, -D]]``, similar to ``sys.A`` via ``(Omega q, q')``."""
    n = sys.n
    w = sys.omegas
    S = np.zeros((2 * n, 2 * n))
    S[:n, n:] = np.diag(w)
    S[n:, :n] = -np.diag(w)
    S[n:, n:] = -sys.D
    return S


def step(sys: ClosedLoopSystem, state: ModalState, dt: float) -> ModalState:
    """One implicit-midpoint step. A-stable; conserves energy exactly when D = 0."""
    return MidpointStepper(sys, dt)(state)


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    q: np.ndarray  # (N, n)
    qdot: np.ndarray  # (N, n)
    V: np.ndarray
    controls: np.ndarray  # (N, k+1), last column is the shaker force
    w_l0: np.ndarray
    v_l0: np.ndarray

    @property
    def max_energy_increase(self) -> float:
        """Largest sample-to-sample increase of V (0 if V never rises)."""
        if self.V.size < 2:
            return 0.0
        return float(max(0.0, np.diff(self.V).max()))

    def state(self, i: int) -> ModalState:
        return ModalState(self.q[i], self.qdot[i], float(self.t[i]))


def simulate(
    sys: ClosedLoopSystem,
    x0: ModalState,
    t_end: float,
    dt: float,
    every: int = 1,
) -> Trajectory:
    """Integrate from ``x0`` to ``x0.t + t_end`` with the implicit midpoint rule.

    The step is shrunk to ``t_end / ceil(t_end / dt)`` so the horizon is hit
    exactly. Every ``every``-th step is recorded, plus the final one; the
    first sample is ``x0``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if x0.q.size != sys.n:
        raise ValueError("initial state dimension does not match system")
    nsteps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / nsteps
    stepper = MidpointStepper(sys, h)
    nrec = nsteps // every + 2
    X = np.empty((nrec, 2 * sys.n))
    t = np.empty(nrec)
    scale = stepper._scale
    y = x0.x * scale
    X[0], t[0] = x0.x, x0.t
    r = 1
    for i in range(1, nsteps + 1):
        y = stepper.advance_scaled(y)
        if i % every == 0 or i == nsteps:
            X[r], t[r] = y / scale, x0.t + i * h
            r += 1
    X, t = X[:r], t[:r]
    q, qd = X[:, : sys.n], X[:, sys.n :]
    M = -(qd @ sys.B) * sys.alphas
    F = -sys.alpha0 * (qd @ sys.c)
    return Trajectory(
        t=t,
        q=q,
        qdot=qd,
        V=sys.energy(q, qd),
        controls=np.column_stack([M, F]),
        w_l0=q @ sys.c,
        v_l0=qd @ sys.c,
    )


def spectral_abscissa(sys: ClosedLoopSystem) -> tuple[float, np.ndarray]:
    """Maximum real part of the closed-loop eigenvalues, plus all 2n of them.

    The eigen-solve runs on ``[[0, Omega], [-Omega, -D]]``, which is similar
    to :attr:`ClosedLoopSystem.A` (state ``(Omega q, q')``) and nearly
    normal, so undamped pairs come out with real parts at roundoff level.
    """
    lam = np.linalg.eigvals(_scaled_generator(sys))
    lam = lam[np.lexsort((lam.imag, lam.real))]
    return float(lam.real.max()), lam


def project_profile(
    basis: ModalBasis,
    n: int,
    u: Callable[[np.ndarray], np.ndarray] | None = None,
    v: Callable[[np.ndarray], np.ndarray] | None = None,
    rule: QuadratureRule | None = None,
) -> tuple[ModalState, float]:
    """Project displacement/velocity profiles onto the first ``n`` modes.

    Coefficients use the generalized inner product
    ``rho int f phi_i + m f(l0) phi_i(l0)``. Returns the state and the
    relative projection residual in the same norm (worst of u and v).
    """
    system = basis.system
    rule = mode_rule(system, basis[n - 1].mu, rule or basis.rule)
    P = basis.values(rule.nodes, n)
    c = basis.at_l0(n)
    resid = 0.0
    coeffs = []
    for f in (u, v):
        if f is None:
            coeffs.append(np.zeros(n))
            continue
        fx = np.asarray(f(rule.nodes), dtype=float)
        f0 = float(np.asarray(f(np.array([system.l0])))[0])
        a = system.rho * (P.T * rule.weights) @ fx + system.m * f0 * c
        r = fx - P @ a
        r0 = f0 - c @ a
        norm2 = system.rho * rule.weights @ fx**2 + system.m * f0**2
        rn2 = system.rho * rule.weights @ r**2 + system.m * r0**2
        if norm2 > 0:
            resid = max(resid, math.sqrt(max(rn2, 0.0) / norm2))
        coeffs.append(a)
    return ModalState(coeffs[0], coeffs[1]), resid
