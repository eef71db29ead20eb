"""Time integration of ``i u_t + Delta u + f(u) = 0``.

Three schemes:

* ``ExactFree``: the Fourier multiplier ``exp(-i tau |xi|^2)`` (f = 0 only).
* ``SplitStepFourier``: Strang splitting, exact free flow for the two half
  steps and the exact nonlinear phase rotation in between.
* ``ImplicitMidpoint``: ``i (u+ - u)/dt + Delta_h u_mid + g(|u_mid|^2) u_mid = 0``
  solved by fixed-point iteration on ``u_mid``. ``Delta_h`` is spectral on
  periodic grids and the 3/5-point stencil with zero ghosts on Dirichlet
  grids (including masked obstacles).

All three are time-reversible, so negative ``dt`` runs the equation
backwards in time.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import erf

from .errors import FixedPointDivergence, GaugeViolation, NonFiniteError, NumericalError
from .grid import Field, Grid, grad_l2_norm
from .nonlin import NonlinearitySpec, Zero, energy

__all__ = [
    "Scheme",
    "StepperConfig",
    "TrajectoryRecord",
    "exact_free_step",
    "gaussian_exact",
    "gaussian_tail_fraction",
    "strang_step",
    "midpoint_step",
    "make_stepper",
    "evolve",
    "tail_mass",
]

logger = logging.getLogger(__name__)

GAUGE_TOL = 1e-10


class Scheme(str, enum.Enum):
    EXACT_FREE = "ExactFree"
    SPLIT_STEP = "SplitStepFourier"
    MIDPOINT = "ImplicitMidpoint"


REVERSIBLE_SCHEMES = frozenset(Scheme)


@dataclass(frozen=True)
class StepperConfig:
    scheme: Scheme = Scheme.SPLIT_STEP
    dt: float = 1e-3
    fp_tol: float = 1e-12
    fp_max_iters: int = 50

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not math.isfinite(self.dt) or self.dt == 0:
            raise ValueError(f"dt must be finite and nonzero, got {self.dt}")
        if self.dt < 0 and self.scheme not in REVERSIBLE_SCHEMES:
            raise ValueError(f"negative dt requires a time-reversible scheme, {self.scheme.value} is not")
        if not self.fp_tol > 0:
            raise ValueError("fp_tol must be positive")
        if self.fp_max_iters < 1:
            raise ValueError("fp_max_iters must be at least 1")

    def validate_for(self, grid: Grid, spec: NonlinearitySpec) -> None:
        if self.scheme is Scheme.EXACT_FREE:
            if not isinstance(spec, Zero):
                raise ValueError("ExactFree only integrates the free equation (spec = Zero)")
            if not grid.is_periodic:
                raise ValueError("ExactFree needs a periodic grid")
        elif self.scheme is Scheme.SPLIT_STEP and not grid.is_periodic:
            raise ValueError("SplitStepFourier needs a periodic grid")
        spec.check_grid(grid)


def tail_mass(u: Field, fraction: float = 0.1) -> float:
    """Fraction of the charge sitting in the outer shell of the box."""
    rho = u.density
    total = float(rho.sum())
    if total == 0.0:
        return 0.0
    return float(rho[u.grid.shell_mask(fraction)].sum()) / total


@dataclass
class TrajectoryRecord:
    """Diagnostics at the sample times of one run.

    ``mass`` is the charge ``||u||_2^2``. ``grad_max`` is the running maximum
    of ``||grad u||_2`` over every evaluated step, not only the samples.
    """

    times: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    grad_l2: list[float] = field(default_factory=list)
    tail_mass: list[float] = field(default_factory=list)
    gauge_defect: list[float] = field(default_factory=list)
    fields: list[Field] | None = None
    grad_max: float = 0.0
    scheme: str = ""
    dt: float = 0.0
    steps: int = 0

    def columns(self) -> dict[str, list[float]]:
        return {
            "t": self.times,
            "mass": self.mass,
            "energy": self.energy,
            "grad_l2": self.grad_l2,
            "tail_mass": self.tail_mass,
            "gauge_defect": self.gauge_defect,
        }

    @property
    def norm0(self) -> float:
        return math.sqrt(self.mass[0])

    def mass_drift(self) -> float:
        m = np.asarray(self.mass)
        return float(np.abs(m - m[0]).max() / m[0])

    def energy_drift(self) -> float:
        e = np.asarray(self.energy)
        return float(np.abs(e - e[0]).max() / max(abs(e[0]), 1e-300))

    def field_at(self, t: float) -> Field:
        if self.fields is None:
            raise ValueError("trajectory was recorded without retained fields")
        for s, f in zip(self.times, self.fields):
            if abs(s - t) <= 1e-9 * max(1.0, abs(t)):
                return f
        raise KeyError(f"no retained field at t={t}")


# exact free flow ---------------------------------------------------------


def exact_free_step(u: Field, tau: float) -> Field:
    """``exp(i tau Delta) u`` on a periodic box."""
    grid = u.grid
    if not grid.is_periodic:
        raise ValueError("exact_free_step needs a periodic grid")
    if tau == 0:
        return u.replace(time=u.time)
    out = np.fft.ifftn(np.exp(-1j * tau * grid.xi_squared) * np.fft.fftn(u.values))
    return Field(grid, out, u.time + tau)


def gaussian_tail_fraction(t: float, grid: Grid, width: float = 1.0, center=None) -> float:
    """Fraction of the free Gaussian's charge that lies outside the box at time t."""
    center = np.zeros(grid.dim) if center is None else np.atleast_1d(center)
    spread = math.sqrt((width**4 + 4.0 * t * t) / width**2)
    inside = 1.0
    for (a, b), c in zip(grid.extents, center):
        inside *= 0.5 * (erf((b - c) / spread) - erf((a - c) / spread))
    return max(0.0, 1.0 - inside)


def gaussian_exact(t: float, grid: Grid, width: float = 1.0, center=None, check_tail: bool = True) -> Field:
    """Closed-form free evolution of ``exp(-|x - c|^2 / (2 width^2))``.

    ``u(t, x) = (w^2 / (w^2 + 2it))^(N/2) exp(-|x - c|^2 / (2 (w^2 + 2it)))``.
    Raises ``ValueError`` when more than 1e-12 of the charge would lie outside
    the box, since the periodic box then no longer imitates the whole space.
    """
    if check_tail:
        tail = gaussian_tail_fraction(t, grid, width, center)
        if tail > 1e-12:
            raise ValueError(f"box too small: tail fraction {tail:.2e} > 1e-12 at t={t}")
    center = np.zeros(grid.dim) if center is None else np.atleast_1d(center)
    z = width**2 + 2j * t
    r2 = sum((x - c) ** 2 for x, c in zip(grid.coords, center))
    if t == 0:
        values = np.exp(-r2 / (2 * width**2)).astype(np.complex128)
    else:
        values = (width**2 / z) ** (grid.dim / 2) * np.exp(-r2 / (2 * z))
    return Field(grid, values, t)


# steppers ------------------------------------------------------------------


class _Stepper:
    def __init__(self, grid: Grid, spec: NonlinearitySpec, dt: float):
        self.grid = grid
        self.spec = spec
        self.dt = dt
        self.grad_max = 0.0

    def step(self, values: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def advance(self, values: np.ndarray, t: float, n: int, grad_stride: int = 1) -> np.ndarray:
        """Take ``n`` steps, tracking ``max ||grad u||`` every ``grad_stride`` steps."""
        for k in range(n):
            values = self.step(values, t + k * self.dt)
            if k % 64 == 63 and not np.isfinite(values).all():
                raise NonFiniteError(f"non-finite values near t={t + (k + 1) * self.dt}")
            if grad_stride and (k + 1) % grad_stride == 0:
                self.grad_max = max(self.grad_max, grad_l2_norm(Field._trusted(self.grid, values)))
        return values


class ExactFreeStepper(_Stepper):
    def __init__(self, grid, spec, dt):
        super().__init__(grid, spec, dt)
        self.multiplier = np.exp(-1j * dt * grid.xi_squared)

    def step(self, values, t):
        return np.fft.ifftn(self.multiplier * np.fft.fftn(values))

    def advance(self, values, t, n, grad_stride=1):
        # the free flow preserves ||grad u||, nothing to track between samples
        tau = n * self.dt
        return np.fft.ifftn(np.exp(-1j * tau * self.grid.xi_squared) * np.fft.fftn(values))


class SplitStepper(_Stepper):
    """Strang splitting: free half step, exact phase rotation, free half step.

    Consecutive free half steps are fused inside :meth:`advance`.
    """

    def __init__(self, grid, spec, dt, gauge_tol: float = GAUGE_TOL):
        super().__init__(grid, spec, dt)
        self.full = np.exp(-1j * dt * grid.xi_squared)
        self.half = np.exp(-0.5j * dt * grid.xi_squared)
        self.gauge_tol = gauge_tol
        self.linear = isinstance(spec, Zero)

    def _phase(self, values, t):
        g = self.spec.phase(Field._trusted(self.grid, values, t))
        if np.iscomplexobj(g):
            defect = float(np.abs(np.imag(g) * np.abs(values) ** 2).max())
            if defect > self.gauge_tol:
                raise GaugeViolation(defect, self.gauge_tol)
            g = g.real
        out = values * np.exp(1j * self.dt * g)
        out[~self.grid.mask] = 0
        return out

    def step(self, values, t):
        if self.linear:
            return np.fft.ifftn(self.full * np.fft.fftn(values))
        v = np.fft.ifftn(self.half * np.fft.fftn(values))
        v = self._phase(v, t + 0.5 * self.dt)
        return np.fft.ifftn(self.half * np.fft.fftn(v))

    def advance(self, values, t, n, grad_stride=1):
        if self.linear:
            return np.fft.ifftn(np.exp(-1j * n * self.dt * self.grid.xi_squared) * np.fft.fftn(values))
        norm = self.grid.cell_volume / values.size
        xi2 = self.grid.xi_squared
        vk = self.half * np.fft.fftn(values)
        for k in range(n):
            v = self._phase(np.fft.ifftn(vk), t + (k + 0.5) * self.dt)
            if k % 64 == 63 and not np.isfinite(v).all():
                raise NonFiniteError(f"non-finite values near t={t + (k + 1) * self.dt}")
            vk = np.fft.fftn(v)
            if grad_stride and (k + 1) % grad_stride == 0:
                # the free flow commutes with grad, so |vk| already carries ||grad u||
                self.grad_max = max(self.grad_max, math.sqrt(float(np.sum(xi2 * np.abs(vk) ** 2)) * norm))
            vk *= self.full if k < n - 1 else self.half
        return np.fft.ifftn(vk)


def dirichlet_laplacian(grid: Grid) -> sp.csc_matrix:
    """3-point (1D) / 5-point (2D) Laplacian on the masked nodes, zero ghosts."""
    mats = []
    for n, h in zip(grid.points, grid.spacing):
        off = np.ones(n - 1)
        # open chain: node n-1 sees the zero ghost at b, node 0 is masked out
        mats.append(sp.diags([off, -2.0 * np.ones(n), off], [-1, 0, 1]) / h**2)
    if grid.dim == 1:
        full = mats[0]
    else:
        full = sp.kron(mats[0], sp.identity(grid.points[1])) + sp.kron(sp.identity(grid.points[0]), mats[1])
    idx = np.flatnonzero(grid.mask.ravel())
    return sp.csc_matrix(full.tocsr()[idx][:, idx])


class MidpointStepper(_Stepper):
    def __init__(self, grid, spec, dt, fp_tol: float = 1e-12, fp_max_iters: int = 50):
        super().__init__(grid, spec, dt)
        self.fp_tol = fp_tol
        self.fp_max_iters = fp_max_iters
        self.linear = isinstance(spec, Zero)
        self.last_iterations = 0
        if grid.is_periodic:
            self._denom = 1.0 + 0.5j * dt * grid.xi_squared
        else:
            self._idx = np.flatnonzero(grid.mask.ravel())
            lap = dirichlet_laplacian(grid)
            eye = sp.identity(lap.shape[0], dtype=np.complex128, format="csc")
            self._lu = spla.splu(sp.csc_matrix(eye - 0.5j * dt * lap))

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        """Apply ``(I - (i dt/2) Delta_h)^-1``."""
        if self.grid.is_periodic:
            return np.fft.ifftn(np.fft.fftn(rhs) / self._denom)
        out = np.zeros(self.grid.shape, dtype=np.complex128)
        out.ravel()[self._idx] = self._lu.solve(rhs.ravel()[self._idx])
        return out

    def step(self, values, t):
        if self.linear:
            mid = self._solve(values)
            self.last_iterations = 1
            return 2.0 * mid - values
        scale = max(float(np.abs(values).max()), 1e-300)
        t_mid = t + 0.5 * self.dt
        mid = values
        residual = math.inf
        for k in range(1, self.fp_max_iters + 1):
            g = self.spec.phase(Field._trusted(self.grid, mid, t_mid))
            new = self._solve(values + 0.5j * self.dt * g * mid)
            new[~self.grid.mask] = 0
            residual = float(np.abs(new - mid).max()) / scale
            mid = new
            if residual <= self.fp_tol:
                self.last_iterations = k
                return 2.0 * mid - values
        raise FixedPointDivergence(residual, self.fp_max_iters)


def make_stepper(grid: Grid, spec: NonlinearitySpec, config: StepperConfig) -> _Stepper:
    config.validate_for(grid, spec)
    if config.scheme is Scheme.EXACT_FREE:
        return ExactFreeStepper(grid, spec, config.dt)
    if config.scheme is Scheme.SPLIT_STEP:
        return SplitStepper(grid, spec, config.dt)
    return MidpointStepper(grid, spec, config.dt, config.fp_tol, config.fp_max_iters)


def strang_step(u: Field, dt: float, spec: NonlinearitySpec) -> Field:
    """One Strang step: half free flow, exact nonlinear phase rotation, half free flow."""
    stepper = make_stepper(u.grid, spec, StepperConfig(Scheme.SPLIT_STEP, dt))
    return Field(u.grid, stepper.step(u.values, u.time), u.time + dt)


def midpoint_step(u: Field, dt: float, spec: NonlinearitySpec, fp_tol: float = 1e-12, fp_max_iters: int = 50) -> Field:
    stepper = make_stepper(u.grid, spec, StepperConfig(Scheme.MIDPOINT, dt, fp_tol, fp_max_iters))
    return Field(u.grid, stepper.step(u.values, u.time), u.time + dt)


# driver ----------------------------------------------------------------


def _step_counts(sample_times: Sequence[float], dt: float) -> list[int]:
    counts = []
    for a, b in zip(sample_times[:-1], sample_times[1:]):
        gap = b - a
        n = round(gap / dt)
        if n < 1 or abs(n * dt - gap) > 1e-12 * max(1.0, abs(gap)):
            raise ValueError(f"dt={dt} does not divide the sample gap {gap}")
        counts.append(n)
    return counts


def evolve(
    u0: Field,
    config: StepperConfig,
    spec: NonlinearitySpec,
    sample_times: Sequence[float],
    retain_fields: bool = False,
    grad_stride: int = 1,
    tail_fraction: float = 0.1,
    monitor: Callable[[Field], float] | None = None,
) -> TrajectoryRecord:
    """Integrate from ``u0`` and record diagnostics at ``sample_times``.

    Sample times must start at ``u0.time`` (normally 0) and move away from it
    in the direction of ``config.dt``. ``monitor(field)`` is called at every
    sample and its return value is stored as the gauge defect. A
    :class:`NumericalError` raised mid-run carries the samples recorded so
    far as ``exc.partial``.
    """
    from .nonlin import gauge_defect

    times = [float(t) for t in sample_times]
    if not times:
        raise ValueError("need at least one sample time")
    if abs(times[0] - u0.time) > 1e-12:
        raise ValueError(f"first sample time {times[0]} must equal the initial time {u0.time}")
    direction = math.copysign(1.0, config.dt)
    for a, b in zip(times[:-1], times[1:]):
        if not (b - a) * direction > 0:
            raise ValueError("sample times must be strictly monotone in the direction of dt")
    counts = _step_counts(times, config.dt)
    stepper = make_stepper(u0.grid, spec, config)
    monitor = monitor or (lambda f: gauge_defect(spec, f))

    rec = TrajectoryRecord(fields=[] if retain_fields else None, scheme=config.scheme.value, dt=config.dt)
    grid = u0.grid

    def record(values, t):
        if not np.all(np.isfinite(values)):
            raise NonFiniteError(f"non-finite values at t={t}")
        f = Field(grid, values, t)
        g = grad_l2_norm(f)
        rec.times.append(t)
        rec.mass.append(float(np.sum(f.density)) * grid.cell_volume)
        rec.energy.append(energy(spec, f))
        rec.grad_l2.append(g)
        rec.tail_mass.append(tail_mass(f, tail_fraction))
        rec.gauge_defect.append(float(monitor(f)))
        rec.grad_max = max(rec.grad_max, g)
        if retain_fields:
            rec.fields.append(f)

    values = np.asarray(u0.values, dtype=np.complex128)
    t = times[0]
    record(values, t)
    try:
        for n, t_next in zip(counts, times[1:]):
            values = stepper.advance(values, t, n, grad_stride)
            rec.steps += n
            rec.grad_max = max(rec.grad_max, stepper.grad_max)
            t = t_next
            record(values, t)
    except NumericalError as exc:
        exc.partial = rec
        raise
    logger.debug("evolve: %d steps, scheme %s", rec.steps, config.scheme.value)
    return rec
