"""Finite-horizon numerical checks of light-cone lower bounds for NLS-type equations.

Modules: :mod:`.grid` (discretised domains and norms), :mod:`.nonlin`
(gauge-invariant nonlinearities), :mod:`.prop` (time steppers),
:mod:`.bounds` (the lower-bound checks), :mod:`.harness` (experiments) and
:mod:`.cli` (command line).
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateWarning,
    FixedPointDivergence,
    GaugeViolation,
    NonFiniteError,
    NumericalError,
    TailMassBreach,
)
from .grid import Boundary, Field, Grid, Region, grad_l2_norm, lp_norm  # noqa: E402
from .nonlin import (  # noqa: E402
    Hartree,
    HartreeKernel,
    NonlinearitySpec,
    Potential,
    Power,
    Saturated,
    Zero,
    energy,
    gauge_defect,
)
from .prop import Scheme, StepperConfig, TrajectoryRecord, evolve, exact_free_step, gaussian_exact  # noqa: E402
from .bounds import (  # noqa: E402
    BoundParams,
    BoundReport,
    bound_rhs,
    bounded_domain_floor,
    decay_quantity,
    m_zero,
    strauss_limit_rhs,
    tent,
    verify_theorem,
    windowed_l2,
)

__all__ = [
    "Boundary", "BoundParams", "BoundReport", "ConfigError", "DegenerateWarning", "Field",
    "FixedPointDivergence", "GaugeViolation", "Grid", "Hartree", "HartreeKernel", "NonFiniteError",
    "NonlinearitySpec", "NumericalError", "Potential", "Power", "Region", "Saturated", "Scheme",
    "StepperConfig", "TailMassBreach", "TrajectoryRecord", "Zero", "bound_rhs", "bounded_domain_floor",
    "decay_quantity", "energy", "evolve", "exact_free_step", "gauge_defect", "gaussian_exact",
    "grad_l2_norm", "lp_norm", "m_zero", "strauss_limit_rhs", "tent", "verify_theorem", "windowed_l2",
]
