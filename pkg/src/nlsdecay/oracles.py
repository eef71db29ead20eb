"""Independent reference values: adaptive quadrature, closed forms, direct sums.

Nothing here touches the FFT machinery used by the solvers, so these values
can be used to check them.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def gaussian_integrals() -> dict[str, float]:
    """``int e^{-x^2}``, ``int x^2 e^{-x^2}`` and ``||e^{-x^2/2}||_2`` over the line."""
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    i0, _ = integrate.quad(lambda x: math.exp(-x * x), -np.inf, np.inf, **opts)
    i2, _ = integrate.quad(lambda x: x * x * math.exp(-x * x), -np.inf, np.inf, **opts)
    return {"sqrt_pi": i0, "sqrt_pi_over_2": i2, "pi_quarter": math.sqrt(i0)}


def gaussian_spectral_mass(k_inner: float, k_outer: float, dim: int = 1, width: float = 1.0) -> float:
    """``||F u0||_{L^2(k_inner/2 <= |xi| < k_outer/2)}`` for ``u0 = exp(-|x|^2/(2 w^2))``.

    The unitary transform of ``u0`` is ``w^N exp(-w^2 |xi|^2 / 2)``.
    """
    lo, hi = k_inner / 2.0, k_outer / 2.0
    w = width
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    if dim == 1:
        val, _ = integrate.quad(lambda s: 2.0 * w**2 * math.exp(-(w * s) ** 2), lo, hi, **opts)
    elif dim == 2:
        val, _ = integrate.quad(lambda s: 2.0 * math.pi * s * w**4 * math.exp(-(w * s) ** 2), lo, hi, **opts)
    else:
        raise ValueError("dim must be 1 or 2")
    return math.sqrt(val)


def sin_integrals() -> dict[str, float]:
    """Integrals of sin^2, cos^2 and sin^4 over (0, pi)."""
    opts = dict(epsabs=1e-14, epsrel=1e-13)
    s2, _ = integrate.quad(lambda x: math.sin(x) ** 2, 0, math.pi, **opts)
    c2, _ = integrate.quad(lambda x: math.cos(x) ** 2, 0, math.pi, **opts)
    s4, _ = integrate.quad(lambda x: math.sin(x) ** 4, 0, math.pi, **opts)
    return {"sin2": s2, "cos2": c2, "sin4": s4}


def gaussian_evolution(t: float, x, width: float = 1.0, dim: int = 1):
    """Closed-form free evolution of a centred Gaussian at points ``x`` (|x| for dim 2)."""
    x = np.asarray(x, dtype=float)
    z = complex(width**2, 2.0 * t)
    if t == 0:
        return np.exp(-(x**2) / (2 * width**2)).astype(complex)
    return (width**2 / z) ** (dim / 2) * np.exp(-(x**2) / (2 * z))


def hartree_direct(kernel: np.ndarray, density: np.ndarray, cell_volume: float) -> np.ndarray:
    """``sum_j W(x_i - x_j) d_j h^N`` by explicit summation over node pairs.

    ``kernel`` is in displacement layout (entry ``m`` is ``W`` at ``m*h``,
    indices taken modulo the grid size).
    """
    kernel = np.asarray(kernel, dtype=float)
    density = np.asarray(density, dtype=float)
    shape = density.shape
    out = np.zeros(shape)
    if density.ndim == 1:
        n = shape[0]
        j = np.arange(n)
        for i in range(n):
            out[i] = np.dot(kernel[(i - j) % n], density)
    elif density.ndim == 2:
        n0, n1 = shape
        j0, j1 = np.arange(n0), np.arange(n1)
        for i0 in range(n0):
            rows = kernel[(i0 - j0) % n0]
            for i1 in range(n1):
                out[i0, i1] = np.sum(rows[:, (i1 - j1) % n1] * density)
    else:
        raise ValueError("density must be 1D or 2D")
    return out * cell_volume
