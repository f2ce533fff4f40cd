"""Open-loop eigenstructure of the beam with attached shaker.

Mode shapes use the piecewise ansatz

    u(x) = a1 sin(mu x) + a2 sinh(mu x)              on [0, l0]
    u(x) = a3 sin(mu (l-x)) + a4 sinh(mu (l-x))      on [l0, l]

which satisfies the simply supported end conditions identically. The four
coefficients are tied together by continuity of u, u', u'' at ``l0`` and by
the shear jump produced by the shaker, giving a 4x4 system ``G(mu) a = 0``.

Internally the sinh coefficients are stored scaled by ``exp(mu*l0)`` and
``exp(mu*(l-l0))`` respectively, so nothing overflows for large ``mu``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import BeamSystem, QuadratureRule, integrate, require_valid


class MultipleRootWarning(UserWarning):
    """A root scan found a suspected even-multiplicity or clustered root."""


class MultipleRootError(ValueError):
    """The frequency matrix has a null space of dimension > 1."""


# ---------------------------------------------------------------------------
# frequency equations


def truncated_frequency(mu, l: float, l0: float):
    """Simplified frequency function ``2 sin(mu(l-l0)) sin(mu l0) - sin(mu l)``."""
    mu = np.asarray(mu, dtype=float)
    out = 2.0 * np.sin(mu * (l - l0)) * np.sin(mu * l0) - np.sin(mu * l)
    return out[()] if out.ndim == 0 else out


def _hyp_scaled(z):
    """sinh(z) e^-z and cosh(z) e^-z for z >= 0."""
    e = np.exp(-2.0 * z)
    return 0.5 * (1.0 - e), 0.5 * (1.0 + e)


def frequency_matrix(mu, system: BeamSystem, scaled: bool = True):
    """The 4x4 matrix ``G(mu)`` acting on ``(a1, a2, a3, a4)``.

    Rows are continuity of u, u', u'' at ``l0`` and the shaker jump
    condition ``(kappa - m w^2) u(l0) = EI (u'''(l0-) - u'''(l0+))``, with
    ``w^2 = (EI/rho) mu^4``.

    With ``scaled=True`` the sinh columns are multiplied by the positive
    factors ``exp(-mu*l0)``, ``exp(-mu*(l-l0))`` and every row is normalized
    to unit Euclidean length. Neither operation moves roots or flips the
    sign of the determinant. Accepts an array of ``mu`` and returns a stack.
    """
    mu = np.asarray(mu, dtype=float)
    L, R = system.l0, system.l - system.l0
    sL, cL = np.sin(mu * L), np.cos(mu * L)
    sR, cR = np.sin(mu * R), np.cos(mu * R)
    if scaled:
        shL, chL = _hyp_scaled(mu * L)
        shR, chR = _hyp_scaled(mu * R)
    else:
        shL, chL = np.sinh(mu * L), np.cosh(mu * L)
        shR, chR = np.sinh(mu * R), np.cosh(mu * R)
    # jump row divided through by EI mu^3
    beta = system.kappa / (system.EI * mu**3) - system.m * mu / system.rho
    G = np.stack(
        [
            np.stack([sL, shL, -sR, -shR], axis=-1),
            np.stack([cL, chL, cR, chR], axis=-1),
            np.stack([-sL, shL, sR, -shR], axis=-1),
            np.stack([beta * sL + cL, beta * shL - chL, cR, -chR], axis=-1),
        ],
        axis=-2,
    )
    if scaled:
        G = G / np.linalg.norm(G, axis=-1, keepdims=True)
    return G


def full_frequency(mu, system: BeamSystem, scaled: bool = True, max_unscaled_arg: float = 700.0):
    """Full frequency function: ``det G(mu)``.

    The scaled form (default) is bounded by 1 in magnitude and safe for any
    ``mu``. The unscaled form raises ``OverflowError`` once ``mu*l`` exceeds
    ``max_unscaled_arg``.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 0):
        raise ValueError("full_frequency requires mu > 0")
    if not scaled and np.any(mu * system.l > max_unscaled_arg):
        raise OverflowError(
            f"mu*l exceeds {max_unscaled_arg}; use the scaled determinant"
        )
    d = np.linalg.det(frequency_matrix(mu, system, scaled=scaled))
    return d[()] if np.ndim(d) == 0 else d


# ---------------------------------------------------------------------------
# root scanning


@dataclass(frozen=True)
class RootScan:
    """Result of a sign-change scan.

    ``tangential`` holds locations where |f| nearly touches zero without a
    sign change (suspected double roots); ``clustered`` holds index pairs of
    returned roots closer than the multiple-root tolerance.
    """

    roots: np.ndarray
    tangential: tuple[float, ...] = ()
    clustered: tuple[tuple[int, int], ...] = ()
    grid_step: float = float("nan")

    @property
    def suspicious(self) -> bool:
        return bool(self.tangential or self.clustered)


def scan_roots(
    f: Callable,
    mu_lo: float,
    mu_hi: float,
    grid_step: float,
    xtol: float = 1e-12,
    multiple_tol: float | None = None,
    tangential_tol: float = 1e-8,
) -> RootScan:
    """Bracket sign changes of ``f`` on a uniform grid and refine each one.

    ``f`` must accept an array. Exact zeros on grid points are returned as
    roots. ``multiple_tol`` defaults to ``1e-6 * (mu_hi - mu_lo)``.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    if not mu_lo < mu_hi:
        raise ValueError("need mu_lo < mu_hi")
    if multiple_tol is None:
        multiple_tol = 1e-6 * (mu_hi - mu_lo)
    n = max(1, math.ceil((mu_hi - mu_lo) / grid_step - 1e-9))
    x = np.linspace(mu_lo, mu_hi, n + 1)
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float)

    def fs(t):
        return float(f(np.asarray(t, dtype=float)))

    roots = [float(t) for t in x[y == 0.0]]
    brackets = np.nonzero(y[:-1] * y[1:] < 0)[0]
    for i in brackets:
        roots.append(brentq(fs, x[i], x[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))

    # |f| local minima without a sign change on either side
    tangential = []
    a = np.abs(y)
    for i in range(1, n):
        if y[i] == 0.0 or y[i - 1] * y[i] < 0 or y[i] * y[i + 1] < 0:
            continue
        if a[i] <= a[i - 1] and a[i] <= a[i + 1] and (a[i] < a[i - 1] or a[i] < a[i + 1]):
            res = minimize_scalar(
                lambda t: abs(fs(t)), bounds=(x[i - 1], x[i + 1]), method="bounded",
                options={"xatol": xtol},
            )
            scale = max(a[i - 1], a[i + 1])
            if res.fun <= tangential_tol * scale:
                tangential.append(float(res.x))

    roots = np.array(sorted(roots))
    clustered = tuple(
        (int(i), int(i + 1)) for i in np.nonzero(np.diff(roots) < multiple_tol)[0]
    )
    if tangential or clustered:
        warnings.warn(
            f"suspected multiple roots: tangential at {tangential}, clustered pairs {clustered}",
            MultipleRootWarning,
            stacklevel=2,
        )
    return RootScan(roots, tuple(tangential), clustered, grid_step)


def find_roots(f: Callable, mu_lo: float, mu_hi: float, grid_step: float, **kwargs) -> np.ndarray:
    """Sorted roots of ``f`` on ``[mu_lo, mu_hi]``; see :func:`scan_roots`."""
    return scan_roots(f, mu_lo, mu_hi, grid_step, **kwargs).roots


def default_grid_step(l: float, period: float | None = None) -> float:
    """Scan step: at most ``pi/(10 l)``, and at most ``period/50`` when known."""
    h = math.pi / (10.0 * l)
    if period is not None:
        h = min(h, period / 50.0)
    return h


# ---------------------------------------------------------------------------
# periodicity of truncated_frequency


def truncated_period(l: float, l0: float, p1: int, p2: int) -> float:
    """Period of :func:`truncated_frequency` for the rational ratio ``l0/l = p1/p2``."""
    if p1 <= 0 or p2 <= 0:
        raise ValueError("p1, p2 must be positive integers")
    if not math.isclose(l0 / l, p1 / p2, rel_tol=1e-12):
        raise ValueError(f"l0/l = {l0 / l!r} does not equal {p1}/{p2}")
    if 2 * p1 == p2:
        raise ValueError("degenerate period formula: l0 = l/2")
    q = 2 * p1 - p2
    return 2.0 * math.pi / abs(2.0 * l0 - l) * abs(q) / math.gcd(p2, abs(q))


def rational_ratio(l: float, l0: float, max_denominator: int = 1000) -> tuple[int, int] | None:
    """``(p1, p2)`` with ``l0/l == p1/p2`` to 1e-12, or None."""
    fr = Fraction(l0 / l).limit_denominator(max_denominator)
    if math.isclose(fr.numerator / fr.denominator, l0 / l, rel_tol=1e-12):
        return fr.numerator, fr.denominator
    return None


def roots_per_period(l: float, l0: float, period: float, grid_step: float | None = None) -> np.ndarray:
    """Roots of :func:`truncated_frequency` in one period window ``[0, period)``.

    The mu = 0 root is included. The scan is shifted off the grid so the
    window edges never coincide with a grid point.
    """
    h = grid_step or default_grid_step(l, period)
    off = 0.3711 * h
    r = find_roots(lambda t: truncated_frequency(t, l, l0), -off, period - off, h)
    r = np.where(np.abs(r) < 1e-12, 0.0, r)
    return r


# ---------------------------------------------------------------------------
# mode shapes


@dataclass(frozen=True)
class ModeShape:
    """One open-loop mode.

    ``scaled`` holds ``(a1, a2*e^{mu l0}, a3, a4*e^{mu (l-l0)})``; use
    :attr:`coeffs` for the raw coefficients of the piecewise form.
    """

    mu: float
    omega: float
    scaled: tuple[float, float, float, float]
    l: float
    l0: float

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        a1, b2, a3, b4 = self.scaled
        return (
            a1,
            b2 * math.exp(-self.mu * self.l0),
            a3,
            b4 * math.exp(-self.mu * (self.l - self.l0)),
        )

    def __call__(self, x, deriv: int = 0):
        """Value of the ``deriv``-th x-derivative (0..4) at ``x``."""
        x = np.asarray(x, dtype=float)
        mu, L, R = self.mu, self.l0, self.l - self.l0
        a1, b2, a3, b4 = self.scaled
        left = x <= L
        s = np.where(left, x, self.l - x)  # distance from the nearer support
        own = np.where(left, L, R)
        trig = np.sin(mu * s + deriv * math.pi / 2)
        # sinh(mu s) or cosh(mu s), times e^{-mu*own}; s <= own so no overflow
        ep = np.exp(mu * (s - own))
        em = np.exp(-mu * (s + own))
        hyp = 0.5 * (ep - em) if deriv % 2 == 0 else 0.5 * (ep + em)
        ca = np.where(left, a1, a3)
        cb = np.where(left, b2, b4)
        sign = np.where(left, 1.0, (-1.0) ** deriv)
        out = sign * mu**deriv * (ca * trig + cb * hyp)
        return out[()] if out.ndim == 0 else out

    def one_sided(self, deriv: int, side: str) -> float:
        """Derivative at ``l0`` from the left (``"L"``) or right (``"R"``) piece."""
        mu, L, R = self.mu, self.l0, self.l - self.l0
        a1, b2, a3, b4 = self.scaled
        sh, ch = _hyp_scaled(mu * (L if side == "L" else R))
        hyp = sh if deriv % 2 == 0 else ch
        if side == "L":
            return mu**deriv * (a1 * math.sin(mu * L + deriv * math.pi / 2) + b2 * hyp)
        return (-1) ** deriv * mu**deriv * (a3 * math.sin(mu * R + deriv * math.pi / 2) + b4 * hyp)

    def residuals(self, system: BeamSystem) -> dict[str, float]:
        """Relative interface residuals (continuity of u, u', u'' and shear jump)."""
        cmax = max(abs(c) for c in self.scaled)
        out = {}
        for d, name in enumerate(("u", "du", "d2u")):
            out[name] = abs(self.one_sided(d, "L") - self.one_sided(d, "R")) / (self.mu**d * cmax)
        w2 = self.omega**2
        u0 = self.one_sided(0, "L")
        tL, tR = self.one_sided(3, "L"), self.one_sided(3, "R")
        lhs = (system.kappa - system.m * w2) * u0
        rhs = system.EI * (tL - tR)
        denom = abs(system.kappa - system.m * w2) * abs(u0) + system.EI * (abs(tL) + abs(tR))
        out["jump"] = abs(lhs - rhs) / max(denom, np.finfo(float).tiny)
        return out


def mode_rule(system: BeamSystem, mu: float, base: QuadratureRule | None = None) -> QuadratureRule:
    """Quadrature rule fine enough for products of modes up to wavenumber ``mu``."""
    max_panel = min(system.l / 24.0, 4.0 / max(mu, 1e-300))
    if base is not None:
        if base.max_panel is not None and base.max_panel <= max_panel:
            return base
        return QuadratureRule(base.breakpoints, order=base.order, max_panel=max_panel)
    return QuadratureRule.for_system(system, max_panel=max_panel)


def mode_shape(
    mu: float,
    system: BeamSystem,
    rule: QuadratureRule | None = None,
    rank_tol: float = 1e-6,
) -> ModeShape:
    """Mass-normalized mode shape at a root ``mu`` of :func:`full_frequency`.

    The null direction comes from the SVD of the scaled frequency matrix.
    Raises :class:`MultipleRootError` when the two smallest singular values
    are both below ``rank_tol`` (relative to the largest).
    """
    G = frequency_matrix(mu, system)
    _, s, vt = np.linalg.svd(G)
    if s[-2] < rank_tol * s[0]:
        raise MultipleRootError(
            f"near rank-2 frequency matrix at mu={mu!r} (singular values {s})"
        )
    v = vt[-1]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    omega = float(system.omega(mu))
    shape = ModeShape(float(mu), omega, tuple(float(c) for c in v), system.l, system.l0)
    rule = mode_rule(system, mu, rule)
    mass = system.rho * integrate(lambda x: shape(x) ** 2, rule) + system.m * shape(system.l0) ** 2
    k = 1.0 / math.sqrt(mass)
    return ModeShape(shape.mu, omega, tuple(k * c for c in v), system.l, system.l0)


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class ModalBasis:
    """The first few open-loop modes, sorted by wavenumber.

    ``excluded`` lists wavenumbers of suspected multiple roots that were
    found during the scan but kept out of ``modes``.
    """

    system: BeamSystem
    modes: tuple[ModeShape, ...]
    mu_max: float
    excluded: tuple[float, ...] = ()
    rule: QuadratureRule | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def mus(self) -> np.ndarray:
        return np.array([md.mu for md in self.modes])

    @property
    def omegas(self) -> np.ndarray:
        return np.array([md.omega for md in self.modes])

    def values(self, x, n: int | None = None, deriv: int = 0) -> np.ndarray:
        """Array ``(len(x), n)`` of mode values (or derivatives) at ``x``."""
        modes = self.modes[: n if n is not None else len(self.modes)]
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.stack([md(x, deriv) for md in modes], axis=-1)

    def at_l0(self, n: int | None = None) -> np.ndarray:
        modes = self.modes[: n if n is not None else len(self.modes)]
        return np.array([md.one_sided(0, "L") for md in modes])

    def gram(self, n: int | None = None, rule: QuadratureRule | None = None) -> np.ndarray:
        """Generalized mass matrix ``rho int phi_i phi_j + m phi_i(l0) phi_j(l0)``."""
        n = len(self.modes) if n is None else n
        rule = mode_rule(self.system, self.modes[n - 1].mu, rule or self.rule)
        P = self.values(rule.nodes, n)
        c = self.at_l0(n)
        return self.system.rho * (P.T * rule.weights) @ P + self.system.m * np.outer(c, c)

    def stiffness(self, n: int | None = None, rule: QuadratureRule | None = None) -> np.ndarray:
        """``EI int phi_i'' phi_j'' + kappa phi_i(l0) phi_j(l0)``; equals diag(omega^2)."""
        n = len(self.modes) if n is None else n
        rule = mode_rule(self.system, self.modes[n - 1].mu, rule or self.rule)
        P2 = self.values(rule.nodes, n, deriv=2)
        c = self.at_l0(n)
        return self.system.EI * (P2.T * rule.weights) @ P2 + self.system.kappa * np.outer(c, c)


def full_roots(
    system: BeamSystem,
    mu_max: float,
    grid_step: float | None = None,
    mu_lo: float | None = None,
    **kwargs,
) -> RootScan:
    """Scan :func:`full_frequency` on ``(0, mu_max]``."""
    h = grid_step or default_grid_step(system.l)
    lo = mu_lo if mu_lo is not None else 1e-3 * h
    if mu_max <= lo:
        return RootScan(np.array([]), grid_step=h)
    return scan_roots(lambda t: full_frequency(t, system), lo, mu_max, h, **kwargs)


def build_basis(
    system: BeamSystem,
    n_modes: int = 10,
    mu_max: float | None = None,
    grid_step: float | None = None,
    rule: QuadratureRule | None = None,
    multiple_tol: float | None = None,
    xtol: float = 1e-12,
) -> ModalBasis:
    """Scan the full frequency equation and build up to ``n_modes`` modes.

    Without ``mu_max`` the scan ceiling grows until ``n_modes`` simple roots
    are found. Suspected multiple roots (tangential touches, clustered pairs
    or rank-2 null spaces) are excluded from the basis and reported in
    ``excluded``.
    """
    require_valid(system)
    auto = mu_max is None
    ceiling = mu_max if mu_max is not None else (n_modes + 2) * math.pi / system.l
    while True:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MultipleRootWarning)
            scan = full_roots(system, ceiling, grid_step, multiple_tol=multiple_tol, xtol=xtol)
        bad = set()
        for i, j in scan.clustered:
            bad.update((i, j))
        roots = [r for i, r in enumerate(scan.roots) if i not in bad]
        if not auto or len(roots) >= n_modes:
            break
        ceiling *= 1.5
    excluded = [float(scan.roots[i]) for i in sorted(bad)] + list(scan.tangential)
    modes = []
    for r in roots:
        if len(modes) == n_modes:
            break
        try:
            modes.append(mode_shape(r, system, rule))
        except MultipleRootError:
            excluded.append(float(r))
    if excluded:
        warnings.warn(f"excluded suspected multiple roots {sorted(excluded)}", MultipleRootWarning, stacklevel=2)
    if auto and modes:
        ceiling = min(ceiling, modes[-1].mu)
    return ModalBasis(system, tuple(modes), float(ceiling), tuple(sorted(excluded)), rule)


# ---------------------------------------------------------------------------
# growth and counting diagnostics


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    residual: float  # ||mu - fit|| / ||mu||
    n: int


def eigenvalue_growth_check(mus: Sequence[float] | ModalBasis) -> GrowthFit:
    """Least-squares fit ``mu_j ~ slope*j + intercept`` (j = 1, 2, ...).

    Linear growth of the wavenumbers is quadratic growth of the
    frequencies, since omega_j = sqrt(EI/rho) mu_j**2.
    """
    mus = np.asarray(mus.mus if isinstance(mus, ModalBasis) else mus, dtype=float)
    if mus.size < 10:
        raise ValueError("eigenvalue growth check needs at least 10 roots")
    j = np.arange(1, mus.size + 1, dtype=float)
    A = np.column_stack([j, np.ones_like(j)])
    coef, *_ = np.linalg.lstsq(A, mus, rcond=None)
    r = mus - A @ coef
    return GrowthFit(float(coef[0]), float(coef[1]), float(np.linalg.norm(r) / np.linalg.norm(mus)), mus.size)


def counting_function(mus: Sequence[float], x: float) -> int:
    """Number of roots with ``mu**2 < x``."""
    mus = np.asarray(mus, dtype=float)
    return int(np.count_nonzero(mus**2 < x))


def window_count(mus: Sequence[float], y: float, z: float) -> int:
    """Number of roots with ``y <= mu**2 < y + z``."""
    return counting_function(mus, y + z) - counting_function(mus, y)


def window_bound(y: float, z: float, period: float, k: int) -> float:
    """Upper bound ``(k/P)(sqrt(y+z) - sqrt(y) + P) + 2`` on :func:`window_count`."""
    return k / period * (math.sqrt(y + z) - math.sqrt(y) + period) + 2.0


def pair_nearest(full: Sequence[float], truncated: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Nearest truncated root for each full root, and the absolute gap."""
    full = np.asarray(full, dtype=float)
    truncated = np.asarray(truncated, dtype=float)
    if truncated.size == 0:
        nan = np.full(full.shape, np.nan)
        return nan, nan
    idx = np.abs(full[:, None] - truncated[None, :]).argmin(axis=1)
    near = truncated[idx]
    return near, np.abs(full - near)


def residue_classes(mus: Sequence[float], period: float, tol: float = 1e-6) -> np.ndarray:
    """Label each root by its residue mod ``period``; equal labels share a family."""
    r = np.mod(np.asarray(mus, dtype=float), period)
    r = np.where(period - r < tol * period, 0.0, r)
    labels = np.empty(r.size, dtype=int)
    reps: list[float] = []
    for i, v in enumerate(r):
        for k, rep in enumerate(reps):
            if abs(v - rep) < tol * period:
                labels[i] = k
                break
        else:
            reps.append(v)
            labels[i] = len(reps) - 1
    return labels


def gaps_shrink(gaps: Sequence[float], families: Sequence[int], jitter: float = 0.1, atol: float = 1e-9) -> bool:
    """True if within every family each gap is at most ``(1+jitter)`` times the previous.

    ``atol`` absorbs root-finding noise on gaps that are exactly zero.
    """
    gaps = np.asarray(gaps, dtype=float)
    families = np.asarray(families)
    for f in np.unique(families):
        g = gaps[families == f]
        if np.any(g[1:] > (1.0 + jitter) * g[:-1] + atol):
            return False
    return True


def mode_table(basis: ModalBasis) -> list[tuple]:
    """Rows ``(j, mu, omega, phi_l0, a1, a2, a3, a4)`` for export."""
    return [
        (j, md.mu, md.omega, md.one_sided(0, "L"), *md.coeffs)
        for j, md in enumerate(basis.modes, start=1)
    ]
