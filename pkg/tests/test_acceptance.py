"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np
import pytest
import sympy as sp

sys.path.insert(0, str(Path(__file__).parent))

from flexbeam import Actuator, BeamSystem, ModalState, assemble, build_basis, simulate, spectral_abscissa
from flexbeam.certify import (
    certify_and_abscissa,
    decay_rate_estimate,
    interface_det_check,
    lyapunov_energy,
    lyapunov_energy_from_modes,
    poincare_check,
    root_density_bound_check,
)
from flexbeam.spectral import (
    MultipleRootWarning,
    eigenvalue_growth_check,
    find_roots,
    full_roots,
    gaps_shrink,
    pair_nearest,
    residue_classes,
    roots_per_period,
    truncated_frequency,
    truncated_period,
    window_count,
)

from cli_matrix import DATA_FILES, MATRIX, run_case

PI = math.pi
TINY = 1e-12


def beam(l0, m, kappa, alpha0=0.0, l=1.0):
    return BeamSystem(E=1.0, I=1.0, rho=1.0, l=l, l0=l0, m=m, kappa=kappa, alpha0=alpha0)


def quiet_basis(system, n):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MultipleRootWarning)
        return build_basis(system, n)


# ---------------------------------------------------------------------------


def criterion_1():
    f = lambda t: truncated_frequency(t, 1.0, 0.5)
    r = find_roots(f, 0.05, 13.0, PI / 50)[:4]
    err_roots = float(np.max(np.abs(r - [PI / 2, 2 * PI, 5 * PI / 2, 4 * PI])))

    l, l0 = 1.0, 1 / 3
    P = truncated_period(l, l0, 1, 3)
    mu = np.random.default_rng(1).uniform(0.0, 3 * P, 100)
    g = lambda t: truncated_frequency(t, l, l0)
    err_period = float(np.max(np.abs(g(mu + P) - g(mu))))

    h = P / 50
    first = roots_per_period(l, l0, P, h)
    second = find_roots(g, P - 0.3711 * h, 2 * P - 0.3711 * h, h)
    err_shift = float(np.max(np.abs(second - P - first))) if second.size == first.size else math.inf

    ok = err_roots < 1e-9 and abs(P - 6 * PI / l) < 1e-12 and err_period < 1e-12 and err_shift < 1e-10
    return ok, f"roots err {err_roots:.1e}, P={P:.6f}, period err {err_period:.1e}, shift err {err_shift:.1e}"


def _gap_monotone(l, l0, m, kappa, p1, p2):
    s = beam(l0, m, kappa, l=l)
    P = truncated_period(l, l0, p1, p2) if 2 * p1 != p2 else 2 * PI / l
    h = min(P / 50, PI / (10 * l))
    rf = full_roots(s, 40 * PI / l, h).roots[:30]
    r0 = find_roots(lambda t: truncated_frequency(t, l, l0), 0.5 * h, rf[-1] + P, h)
    near, gap = pair_nearest(rf, r0)
    fam = residue_classes(near, P)
    return rf.size == 30 and gaps_shrink(gap[-10:], fam[-10:], jitter=0.1), gap[-10:]


def criterion_2():
    ok1, g1 = _gap_monotone(1.0, 1 / 3, 0.2, 50.0, 1, 3)
    ok2, g2 = _gap_monotone(2.0, 0.5, 0.3, 20.0, 1, 4)
    pure = full_roots(beam(1 / 3, TINY, TINY), 30.5 * PI, PI / 10).roots
    err_pure = float(np.max(np.abs(pure - PI * np.arange(1, 31)))) if pure.size == 30 else math.inf
    ok = ok1 and ok2 and err_pure < 1e-6
    return ok, f"gaps shrink per family: {ok1}, {ok2} (last gap {g1[-1]:.3f}); pure-beam err {err_pure:.1e}"


def criterion_3():
    l, l0 = 1.0, 1 / 3
    s = beam(l0, 0.2, 50.0)
    P = truncated_period(l, l0, 1, 3)
    rf = full_roots(s, 40 * PI, P / 50).roots
    fit = eigenvalue_growth_check(rf[:30])

    k = roots_per_period(l, l0, P).size
    r0 = find_roots(lambda t: truncated_frequency(t, l, l0), 0.05, math.sqrt(2e4) + 1.0, P / 50)
    rf_all = full_roots(s, math.sqrt(2e4) + 1.0, P / 50).roots
    ys = (1e2, 1e3, 1e4)
    dens0 = [window_count(r0, y, y) / y for y in ys]
    densf = [window_count(rf_all, y, y) / y for y in ys]
    monotone = all(a > b for a, b in zip(dens0, dens0[1:])) and all(a > b for a, b in zip(densf, densf[1:]))

    windows = [(y, z) for y in np.geomspace(1.0, 1e4, 25) for z in (0.1 * y, y, 3 * y) if y + z <= 2e4]
    bound_ok = all(root_density_bound_check(r0, y, z, P, k).holds for y, z in windows)

    ok = fit.residual < 1e-2 and monotone and bound_ok
    return ok, (
        f"slope {fit.slope:.4f}, rel residual {fit.residual:.4f}; density {['%.4f' % d for d in dens0]}; "
        f"bound holds on {len(windows)} windows: {bound_ok}"
    )


def _cofactor_ratio():
    l, l0, k, EI = sp.symbols("l l0 kappa EI", positive=True)
    r = l - l0
    K = sp.Matrix([
        [l0, l0**3, r, r**3],
        [1, 3 * l0**2, -1, -3 * r**2],
        [0, 1, 0, r],
        [-k * l0, 6 * EI - k * l0**3, 0, -6 * EI],
    ])
    closed = -EI * l * (l - l0 + 1) - k / 3 * l0 * (l - l0) ** 2 * (l - l0 + l0**2)
    return sp.simplify(K.det(method="berkowitz") / closed)


def criterion_4():
    pinned = float(_cofactor_ratio())
    rng = np.random.default_rng(4)
    ratios, negative = [], True
    for _ in range(100):
        l = rng.uniform(0.2, 5.0)
        s = BeamSystem(E=rng.uniform(0.01, 100), I=1.0, rho=1.0, l=l, l0=rng.uniform(0.05, 0.95) * l,
                       m=1.0, kappa=rng.uniform(0.01, 1e3))
        chk = interface_det_check(s)
        negative &= chk.numeric < 0
        ratios.append(chk.ratio)
    ratios = np.array(ratios)
    rel_var = float(np.var(ratios / pinned))
    ok_det = negative and rel_var < 1e-10 and abs(ratios.mean() - pinned) < 1e-8 * pinned

    poincare_ok = True
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        poincare_ok &= poincare_check(rng.normal(size=n) * rng.uniform(0.1, 10), rng.uniform(0.1, 10)).holds
    return ok_det and poincare_ok, (
        f"det negative: {negative}, ratio {ratios.mean():.12f} (cofactor oracle {pinned:g}), "
        f"rel var {rel_var:.1e}; Poincare holds on 1000: {poincare_ok}"
    )


def criterion_5():
    basis = quiet_basis(beam(0.37, 0.2, 50.0), 15)
    orth = float(np.max(np.abs(basis.gram(15) - np.eye(15))))
    rng = np.random.default_rng(5)
    w2 = basis.omegas[:5] ** 2
    worst = 0.0
    for _ in range(20):
        st = ModalState(rng.normal(size=5) / np.sqrt(w2), rng.normal(size=5))
        a = lyapunov_energy(st, w2)
        worst = max(worst, abs(a - lyapunov_energy_from_modes(basis, st)) / a)
    return orth < 1e-6 and worst < 1e-6, f"orthogonality err {orth:.1e}, energy cross-check rel err {worst:.1e}"


DECAY_CASES = [
    (beam(0.37, 0.2, 50.0, 20.0), [Actuator(0.71, 0.17, 1.0, 100.0)], 10),
    (beam(0.42, 0.1, 80.0, 10.0), [Actuator(0.2, 0.1, 1.0, 50.0)], 6),
    (beam(0.6, 0.5, 20.0, 3.0), [Actuator(0.23, 0.12, 1.0, 30.0), Actuator(0.85, 0.08, 1.0, 30.0)], 8),
]


def criterion_6():
    basis = quiet_basis(beam(0.37, 0.2, 50.0), 10)
    rng = np.random.default_rng(6)
    sys0 = assemble(basis, (), alpha0=0.0, n=10)
    x0 = ModalState(rng.normal(size=10) / sys0.omegas, rng.normal(size=10))
    traj = simulate(sys0, x0, 1e4 * 1e-4, 1e-4)
    drift = abs(traj.V[-1] / traj.V[0] - 1)
    ok = drift < 1e-10 and traj.t.size == 10_001

    rel_errs, rises = [], []
    for system, acts, n in DECAY_CASES:
        rep, sigma = certify_and_abscissa(quiet_basis(system, n), acts, n=n)
        ok &= rep.status == "certified"
        sys = assemble(quiet_basis(system, n), acts, n=n)
        x0 = ModalState(rng.normal(size=n) / sys.omegas, rng.normal(size=n))
        T = 10 / abs(sigma)
        dt = min(0.5 / sys.omegas.max(), T / 2000)
        traj = simulate(sys, x0, T, dt)
        rises.append(traj.max_energy_increase / traj.V[0])
        rel_errs.append(abs(decay_rate_estimate(traj).sigma / sigma - 1))
    ok &= max(rises) <= 1e-10 and max(rel_errs) < 0.2
    return ok, (
        f"conservative drift {drift:.1e}; max step rise {max(rises):.1e} V0; "
        f"decay-rate rel err {['%.3f' % e for e in rel_errs]}"
    )


def random_configuration(seed):
    """Seeded configuration; even seeds put the controls on nodes of sin(p pi x)."""
    rng = np.random.default_rng(1000 + seed)
    m, kappa = rng.uniform(0.05, 0.5), rng.uniform(5, 100)
    acts = []
    if seed % 2 == 0:
        p = int(rng.integers(2, 6))
        nodes = np.arange(1, p) / p
        l0 = float(rng.choice(nodes))
        free = [x for x in nodes if abs(x - l0) > 1e-9]
        for c in rng.permutation(free)[: int(rng.integers(0, 3))]:
            w = min(rng.uniform(0.05, 0.15), 2 * min(c, 1 - c) - 1e-3, 2 * abs(c - l0) - 1e-3)
            acts.append(Actuator(float(c), float(w), 1.0, float(rng.uniform(1, 20))))
        alpha0 = float(rng.choice([0.0, rng.uniform(0.5, 10)]))
    else:
        l0 = float(rng.uniform(0.15, 0.85))
        for _ in range(int(rng.integers(0, 3))):
            while True:
                c, w = rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.15)
                if c - w / 2 > 0 and c + w / 2 < 1 and abs(c - l0) > w / 2 + 0.01 and all(
                    abs(c - a.center) > 0.1 for a in acts
                ):
                    break
            acts.append(Actuator(float(c), float(w), 1.0, float(rng.choice([0.0, rng.uniform(1, 20)]))))
        alpha0 = float(rng.uniform(0.5, 10)) if not any(a.alpha > 0 for a in acts) else float(rng.choice([0.0, 5.0]))
    return beam(l0, m, kappa, alpha0), acts


def criterion_7():
    agree, checked, negatives, positives = True, 0, 0, 0
    for seed in range(20):
        system, acts = random_configuration(seed)
        rep, sigma = certify_and_abscissa(quiet_basis(system, 10), acts, n=10)
        if rep.status == "indeterminate":
            continue
        checked += 1
        positives += rep.verdict
        negatives += not rep.verdict
        agree &= rep.verdict == (sigma < -1e-10)

    # shaker alone at the midpoint
    system = beam(0.5, 0.2, 50.0, 5.0)
    basis = quiet_basis(system, 10)
    sys = assemble(basis, (), n=10)
    rep, sigma0 = certify_and_abscissa(basis, (), n=10)
    lam = spectral_abscissa(sys)[1]
    damped = lam.real[lam.real < -1e-10]
    slowest = damped.max()
    w_damped = np.abs(lam.imag[lam.real == slowest]).max()
    T = 10 * max(1 / abs(slowest), 2 * PI / w_damped if w_damped > 0 else 0.0)
    rng = np.random.default_rng(7)
    x0 = ModalState(rng.normal(size=10) / sys.omegas, rng.normal(size=10))
    free = np.array(rep.uncontrollable) - 1
    target = 0.5 * float(np.sum(x0.qdot[free] ** 2 + sys.omega2[free] * x0.q[free] ** 2))
    traj = simulate(sys, x0, T, min(0.5 / sys.omegas.max(), T / 2000))
    plateau = abs(traj.V[-1] / target - 1)
    even = rep.uncontrollable == [2, 4, 6, 8, 10]

    ok = agree and checked >= 15 and negatives > 0 and positives > 0 and abs(sigma0) < 1e-12 and even and plateau < 0.01
    return ok, (
        f"agree on {checked}/20 ({positives} certified, {negatives} not); midpoint shaker: "
        f"undamped {rep.uncontrollable}, abscissa {sigma0:.1e}, plateau err {plateau:.1e} at T={T:.1f}"
    )


def criterion_8():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        identical = True
        for cmd, files in DATA_FILES.items():
            args = [cmd]
            if cmd == "sweep":
                args += ["--param", "shaker.alpha0", "--from", "0", "--to", "10", "--steps", "3"]
            runs = [run_case("good", args, tmp / cmd / str(i)) for i in range(2)]
            identical &= all(r.returncode == 0 for r in runs)
            for f in files:
                identical &= (tmp / cmd / "0" / "out" / f).read_bytes() == (tmp / cmd / "1" / "out" / f).read_bytes()
        bad = []
        for i, (name, args, code) in enumerate(MATRIX):
            rc = run_case(name, args, tmp / f"m{i}").returncode
            if rc != code:
                bad.append(f"{name} {args[0]}: {rc} != {code}")
    return identical and not bad, f"byte-identical reruns: {identical}; exit-code matrix {len(MATRIX) - len(bad)}/{len(MATRIX)}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def report(i):
    ok, detail = CRITERIA[i - 1]()
    line = f"criterion {i}: {'PASS' if ok else 'FAIL'} - {detail}"
    return ok, line


@pytest.mark.parametrize("i", range(1, 9))
def test_criterion(i, capsys):
    ok, line = report(i)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(i) for i in range(1, 9)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
