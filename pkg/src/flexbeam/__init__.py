"""Simply supported Euler-Bernoulli beam with an attached shaker and piezo actuators.

Spectral analysis of the open-loop system, modal simulation of the
velocity-feedback closed loop, and certification of actuator placement.
"""

__version__ = "0.1.0"

from .model import (
    Actuator,
    BeamSystem,
    QuadratureRule,
    ValidationReport,
    actuator_profile,
    integrate,
    validate_system,
)
from .spectral import (
    GrowthFit,
    ModalBasis,
    ModeShape,
    MultipleRootError,
    MultipleRootWarning,
    RootScan,
    build_basis,
    counting_function,
    eigenvalue_growth_check,
    find_roots,
    mode_shape,
    truncated_period,
    truncated_frequency,
    full_frequency,
    scan_roots,
    window_count,
)
from .dynamics import (
    ClosedLoopSystem,
    ModalState,
    Trajectory,
    assemble,
    feedback,
    project_profile,
    simulate,
    spectral_abscissa,
    step,
)
from .certify import (
    CertificationReport,
    certify_placement,
    decay_rate_estimate,
    interface_det_check,
    root_density_bound_check,
    lyapunov_energy,
    lyapunov_energy_from_modes,
    lyapunov_energy_physical,
    poincare_check,
)
