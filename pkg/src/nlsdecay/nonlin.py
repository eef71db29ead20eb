"""Catalog of gauge-invariant nonlinearities and their energy functionals.

Every member has the form ``f(u) = g(|u|^2, x) * u`` with ``g`` real, which
is what makes ``Im(f(u) conj(u)) = 0`` hold pointwise:

========== ================================ ===================================
variant    f(u)                             potential part of the energy
========== ================================ ===================================
Zero       0                                0
Power      lam |u|^alpha u                  -lam/(alpha+2) ||u||_{alpha+2}^{alpha+2}
Potential  -V u                             1/2 int V |u|^2
Hartree    -(W * |u|^2) u                   1/4 int (W * |u|^2) |u|^2
Saturated  lam (1+|u|^2)^(alpha/2) u        -lam/(alpha+2) int ((1+|u|^2)^((alpha+2)/2) - 1)
========== ================================ ===================================

``lam > 0`` in ``Power`` is attractive (focusing), ``lam < 0`` repulsive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, grad_l2_norm, lp_norm

__all__ = [
    "HartreeKernel",
    "NonlinearitySpec",
    "Zero",
    "Power",
    "Potential",
    "Hartree",
    "Saturated",
    "apply_f",
    "gauge_defect",
    "energy",
    "hartree_convolve",
]

_GL16_NODES, _GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _origin_cell_average(mu: float, gamma: float, spacing: tuple[float, ...]) -> float:
    """Mean of ``mu |x|^-gamma`` over the cell centred at the origin."""
    if len(spacing) == 1:
        half = spacing[0] / 2
        return mu * half ** (-gamma) / (1.0 - gamma)
    hx, hy = spacing
    # Split the rectangle into triangles with a vertex at the origin and
    # integrate exactly in the radius; the angular integral is smooth.
    total = 0.0
    for half_a, half_b in ((hx / 2, hy / 2), (hy / 2, hx / 2)):
        theta_max = math.atan2(half_b, half_a)
        theta = 0.5 * theta_max * (_GL16_NODES + 1.0)
        rho_max = half_a / np.cos(theta)
        vals = rho_max ** (2.0 - gamma) / (2.0 - gamma)
        total += 4.0 * 0.5 * theta_max * float(np.dot(_GL16_WEIGHTS, vals))
    return mu * total / (hx * hy)


def _reflect(values: np.ndarray) -> np.ndarray:
    """``K[-m]`` for an array in FFT (displacement) order."""
    out = values
    for axis in range(values.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


class HartreeKernel:
    """Interaction kernel ``W`` for the Hartree nonlinearity.

    Kernels live in displacement layout: entry ``m`` (FFT ordering per axis)
    is ``W`` at displacement ``m * h``, so index 0 is the origin cell. Use
    :meth:`power_law` for ``mu |x|^-gamma`` or :meth:`sampled` for explicit
    values.
    """

    def __init__(self, form: str, mu: float = 0.0, gamma: float = 0.0, values: np.ndarray | None = None):
        if form not in ("power_law", "sampled"):
            raise ValueError(f"unknown kernel form {form!r}")
        self.form = form
        self.mu = float(mu)
        self.gamma = float(gamma)
        self.values = None
        if form == "power_law":
            if not 0 < self.gamma < 4:
                raise ValueError(f"power-law kernel needs 0 < gamma < min(N, 4), got gamma={gamma}")
        else:
            values = np.asarray(values)
            if np.iscomplexobj(values):
                raise ValueError("sampled kernel must be real-valued")
            self.values = np.array(values, dtype=np.float64)
            if not np.all(np.isfinite(self.values)):
                raise ValueError("sampled kernel must be finite")
            scale = max(float(np.abs(self.values).max()), 1e-300)
            if np.abs(self.values - _reflect(self.values)).max() > 1e-12 * scale:
                raise ValueError("sampled kernel is not even under x -> -x")
        self._spectra: dict[str, np.ndarray] = {}

    @classmethod
    def power_law(cls, mu: float, gamma: float) -> HartreeKernel:
        return cls("power_law", mu=mu, gamma=gamma)

    @classmethod
    def sampled(cls, values) -> HartreeKernel:
        return cls("sampled", values=values)

    @classmethod
    def constant(cls, grid: Grid, value: float = 1.0) -> HartreeKernel:
        return cls.sampled(np.full(grid.shape, float(value)))

    @classmethod
    def delta(cls, grid: Grid) -> HartreeKernel:
        values = np.zeros(grid.shape)
        values[(0,) * grid.dim] = 1.0 / grid.cell_volume
        return cls.sampled(values)

    def realize(self, grid: Grid) -> np.ndarray:
        """Kernel values on ``grid`` in displacement layout."""
        if self.form == "sampled":
            if self.values.shape != grid.shape:
                raise ValueError(f"sampled kernel shape {self.values.shape} does not match grid {grid.shape}")
            return self.values
        if not self.gamma < min(grid.dim, 4):
            raise ValueError(f"gamma={self.gamma} not in (0, min(N, 4)) for N={grid.dim}")
        offsets = [np.fft.fftfreq(n) * n * h for n, h in zip(grid.points, grid.spacing)]
        mesh = np.meshgrid(*offsets, indexing="ij")
        dist = np.sqrt(sum(d**2 for d in mesh))
        # min-image distances are even under m -> -m, so the kernel is too
        dist[(0,) * grid.dim] = 1.0
        out = self.mu * dist ** (-self.gamma)
        out[(0,) * grid.dim] = _origin_cell_average(self.mu, self.gamma, grid.spacing)
        return out

    def spectrum(self, grid: Grid) -> np.ndarray:
        spec = self._spectra.get(grid.key)
        if spec is None:
            spec = np.fft.fftn(self.realize(grid)) * grid.cell_volume
            self._spectra[grid.key] = spec
        return spec

    def is_nonnegative(self) -> bool:
        if self.form == "power_law":
            return self.mu > 0
        return bool(np.all(self.values >= 0))

    def describe(self) -> dict:
        if self.form == "power_law":
            return {"form": "power_law", "mu": self.mu, "gamma": self.gamma}
        return {"form": "sampled", "shape": list(self.values.shape)}


def hartree_convolve(kernel: HartreeKernel, density: Field) -> Field:
    """Periodic convolution ``W * density`` evaluated with FFTs."""
    grid = density.grid
    if not grid.is_periodic:
        raise ValueError("Hartree convolution is only defined on periodic grids")
    d = np.asarray(density.values)
    if np.iscomplexobj(d):
        if np.abs(d.imag).max() > 0:
            raise ValueError("density must be real")
        d = d.real
    conv = np.fft.ifftn(kernel.spectrum(grid) * np.fft.fftn(d))
    scale = float(np.abs(conv.real).max())
    residue = float(np.abs(conv.imag).max())
    if residue > 1e-12 * max(scale, 1e-300) and residue > 1e-300:
        raise ArithmeticError(f"convolution left an imaginary residue {residue:.2e} (scale {scale:.2e})")
    return Field(grid, conv.real, density.time)


class NonlinearitySpec:
    """Base class. Subclasses supply the real multiplier ``g(|u|^2, x)``."""

    kind = "base"

    def check_grid(self, grid: Grid) -> None:
        pass

    def phase(self, u: Field) -> np.ndarray:
        """Real array ``g`` with ``f(u) = g * u``."""
        raise NotImplementedError

    def potential_energy(self, u: Field) -> float:
        raise NotImplementedError

    def sign_condition(self) -> bool:
        """True when the potential part of the energy is nonnegative for every u."""
        return False

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class Zero(NonlinearitySpec):
    kind = "zero"

    def phase(self, u):
        return np.zeros(u.grid.shape)

    def potential_energy(self, u):
        return 0.0

    def sign_condition(self):
        return True


@dataclass(frozen=True)
class Power(NonlinearitySpec):
    lam: float
    alpha: float

    kind = "power"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")

    def phase(self, u):
        return self.lam * np.abs(u.values) ** self.alpha

    def potential_energy(self, u):
        p = self.alpha + 2
        if p < 2:
            raise ValueError("alpha must be nonnegative")
        return -self.lam / p * lp_norm(u, None, p) ** p

    def sign_condition(self):
        return self.lam <= 0

    def describe(self):
        return {"kind": self.kind, "lam": self.lam, "alpha": self.alpha}


@dataclass(frozen=True)
class Saturated(NonlinearitySpec):
    lam: float
    alpha: float

    kind = "saturated"

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")

    def phase(self, u):
        return self.lam * (1.0 + np.abs(u.values) ** 2) ** (self.alpha / 2)

    def potential_energy(self, u):
        rho = np.abs(u.values[u.grid.mask]) ** 2
        p = self.alpha + 2
        # expm1/log1p keep the -1 accurate where |u| is tiny
        integrand = np.expm1(0.5 * p * np.log1p(rho))
        return -self.lam / p * float(np.sum(integrand)) * u.grid.cell_volume

    def sign_condition(self):
        return self.lam <= 0

    def describe(self):
        return {"kind": self.kind, "lam": self.lam, "alpha": self.alpha}


@dataclass(frozen=True, eq=False)
class Potential(NonlinearitySpec):
    """Linear term ``f(u) = -V u``; V is a real field on the same grid."""

    V: Field

    kind = "potential"

    def __post_init__(self):
        if np.iscomplexobj(self.V.values):
            raise ValueError("potential must be real-valued")

    def check_grid(self, grid):
        if self.V.grid != grid:
            raise ValueError("potential lives on a different grid")

    def phase(self, u):
        self.check_grid(u.grid)
        return -self.V.values

    def potential_energy(self, u):
        self.check_grid(u.grid)
        return 0.5 * float(np.sum(self.V.values * u.density)) * u.grid.cell_volume

    def sign_condition(self):
        return bool(np.all(self.V.values[self.V.grid.mask] >= 0))

    def describe(self):
        v = self.V.values[self.V.grid.mask]
        return {"kind": self.kind, "min": float(v.min()), "max": float(v.max())}


@dataclass(frozen=True, eq=False)
class Hartree(NonlinearitySpec):
    kernel: HartreeKernel

    kind = "hartree"

    def check_grid(self, grid):
        if not grid.is_periodic:
            raise ValueError("Hartree nonlinearity requires a periodic grid")

    def mean_field(self, u: Field) -> np.ndarray:
        self.check_grid(u.grid)
        return hartree_convolve(self.kernel, Field(u.grid, u.density, u.time)).values

    def phase(self, u):
        return -self.mean_field(u)

    def potential_energy(self, u):
        return 0.25 * float(np.sum(self.mean_field(u) * u.density)) * u.grid.cell_volume

    def sign_condition(self):
        return self.kernel.is_nonnegative()

    def describe(self):
        return {"kind": self.kind, "kernel": self.kernel.describe()}


def apply_f(spec: NonlinearitySpec, u: Field) -> Field:
    spec.check_grid(u.grid)
    return Field(u.grid, spec.phase(u) * u.values, u.time)


def gauge_defect(spec: NonlinearitySpec, u: Field) -> float:
    """``max |Im(f(u) conj(u))|`` over the nodes."""
    fu = apply_f(spec, u).values
    return float(np.abs(np.imag(fu * np.conj(u.values))).max())


def energy(spec: NonlinearitySpec, u: Field) -> float:
    spec.check_grid(u.grid)
    return 0.5 * grad_l2_norm(u) ** 2 + spec.potential_energy(u)
