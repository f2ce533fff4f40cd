# Open-loop spectrum of a pinned beam carrying a spring-mass shaker.
#
# Run from the repository root:  python3 notebooks/01_spectrum.py

import math

import numpy as np

from flexbeam import BeamSystem, build_basis, eigenvalue_growth_check
from flexbeam.spectral import (
    find_roots,
    full_roots,
    pair_nearest,
    roots_per_period,
    truncated_frequency,
    truncated_period,
)

np.set_printoptions(precision=5, suppress=True)

# Unit beam, shaker a third of the way along.
s = BeamSystem(E=1.0, I=1.0, rho=1.0, l=1.0, l0=1 / 3, m=0.2, kappa=50.0)

# The wavenumbers mu are the positive zeros of a 4x4 determinant.
# omega = sqrt(EI/rho) mu^2, so mu grows linearly and omega quadratically.
scan = full_roots(s, 40 * math.pi)
mus = scan.roots[:30]
print("first wavenumbers:", mus[:8])
print("frequencies:      ", s.omega(mus[:8]))

fit = eigenvalue_growth_check(mus)
print(f"mu_j ~ {fit.slope:.4f} j + {fit.intercept:.4f}   (rel. residual {fit.residual:.4f})")

# Dropping the exponentially small terms leaves a trigonometric function
# that is periodic whenever l0/l is rational.
P = truncated_period(s.l, s.l0, 1, 3)
k = roots_per_period(s.l, s.l0, P)
print(f"\nperiod {P:.6f} = 6 pi, {k.size} roots per period:", k)

r0 = find_roots(lambda t: truncated_frequency(t, s.l, s.l0), 0.05, mus[-1] + P, P / 50)
near, gap = pair_nearest(mus, r0)
# Gaps shrink like 1/mu, but only along roots that sit one period apart.
for j in range(18, 30):
    print(f"  j={j + 1:2d}  mu={mus[j]:9.4f}  nearest truncated={near[j]:9.4f}  gap={gap[j]:.5f}")

# Negligible shaker: the classical pinned-beam values j pi come back.
pure = BeamSystem(E=1.0, I=1.0, rho=1.0, l=1.0, l0=1 / 3, m=1e-12, kappa=1e-12)
r = full_roots(pure, 10.5 * math.pi).roots
print("\npure beam mu/pi:", r / math.pi)

# Mode shapes are mass normalized in rho int phi^2 + m phi(l0)^2.
basis = build_basis(s, 6)
print("\nmass matrix of the first 6 modes:\n", basis.gram())
print("phi_j(l0):", basis.at_l0())
