# Velocity feedback through the shaker and one piezo patch.
#
# Run from the repository root:  python3 notebooks/02_closed_loop.py

import numpy as np

from flexbeam import Actuator, BeamSystem, assemble, build_basis, project_profile, simulate, spectral_abscissa
from flexbeam.certify import decay_rate_estimate

np.set_printoptions(precision=4, suppress=True)

s = BeamSystem(E=1.0, I=1.0, rho=1.0, l=1.0, l0=0.37, m=0.2, kappa=50.0, alpha0=20.0)
patch = Actuator(center=0.71, width=0.17, height=1.0, alpha=100.0)

n = 10
basis = build_basis(s, n)
sys = assemble(basis, [patch], n=n)

# Damping in modal coordinates is B diag(alpha) B^T + alpha0 c c^T.
print("diag of the damping matrix:", np.diag(sys.D))

sigma, lam = spectral_abscissa(sys)
print(f"spectral abscissa {sigma:.5f}")
print("slowest eigenvalues:", lam[-4:])

# Start from the first pinned-beam shape, at rest.
x0, resid = project_profile(basis, n, u=lambda x: np.sin(np.pi * x))
print(f"projection residual {resid:.2e}")

T = 10 / abs(sigma)
traj = simulate(sys, x0, T, dt=5e-4)
print(f"V(0) = {traj.V[0]:.5f}, V(T) = {traj.V[-1]:.3e}, T = {T:.2f}")
print("largest step-to-step rise of V:", traj.max_energy_increase)

# The slowest eigenvalue belongs to a high mode that a first-mode shape
# hardly excites, so the fitted rate comes out faster than the abscissa.
fit = decay_rate_estimate(traj)
print(f"fitted decay rate {fit.sigma:.5f} vs abscissa {sigma:.5f}")

# Generic initial data excites everything and recovers the abscissa.
rng = np.random.default_rng(1)
y0 = type(x0)(rng.normal(size=n) / sys.omegas, rng.normal(size=n))
fit = decay_rate_estimate(simulate(sys, y0, T, dt=5e-4))
print(f"random start: fitted {fit.sigma:.5f}")

# Switch the gains off: the midpoint rule keeps V constant.
free = assemble(basis, [Actuator(0.71, 0.17, 1.0, 0.0)], alpha0=0.0, n=n)
tr = simulate(free, x0, 1.0, 1e-4)
print(f"\nno feedback, 1e4 steps: |V(T)/V(0) - 1| = {abs(tr.V[-1] / tr.V[0] - 1):.1e}")
