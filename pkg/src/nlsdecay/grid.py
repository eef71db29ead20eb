"""Rectangular lattices, domain masks, regions and discrete Lebesgue norms.

Node ``j`` on an axis ``[a, b]`` with ``n`` points sits at ``a + j*h`` with
``h = (b - a)/n`` and owns the cell of volume ``h**N`` centred on it. On a
periodic axis the node at ``b`` is identified with the one at ``a``; on a
Dirichlet axis the node at ``a`` is part of the boundary layer (masked out)
and the node at ``b`` is an implicit zero ghost. Every integral in the
package is the cell sum ``sum(values[mask]) * h**N``.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "Boundary",
    "Grid",
    "Field",
    "Region",
    "lp_norm",
    "grad_l2_norm",
    "ball_volume",
    "region_mask",
    "mask_volume",
]


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class Grid:
    """A 1D or 2D box lattice with a boundary kind and a domain mask.

    Args:
        extents: one ``(a, b)`` pair per axis.
        points: node count per axis.
        boundary: :class:`Boundary` or its string value.
        mask: optional boolean array marking the domain inside the box. For
            Dirichlet grids the boundary layer (index 0 on every axis) is
            always removed from it.
    """

    def __init__(
        self,
        extents: Sequence[tuple[float, float]],
        points: Sequence[int] | int,
        boundary: Boundary | str = Boundary.PERIODIC,
        mask: np.ndarray | None = None,
    ):
        extents = tuple((float(a), float(b)) for a, b in extents)
        if isinstance(points, (int, np.integer)):
            points = (int(points),) * len(extents)
        points = tuple(int(n) for n in points)
        if len(extents) not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got dim={len(extents)}")
        if len(points) != len(extents):
            raise ValueError("extents and points must have the same length")
        boundary = Boundary(boundary)
        for (a, b), n in zip(extents, points):
            if n < 2:
                raise ValueError(f"need at least 2 points per axis, got {n}")
            if not (b - a) / n > 0:
                raise ValueError(f"axis [{a}, {b}] with {n} points has nonpositive spacing")
            if boundary is Boundary.PERIODIC and not _is_power_of_two(n):
                raise ValueError(f"periodic axes need a power-of-two point count, got {n}")

        self.extents = extents
        self.points = points
        self.boundary = boundary

        shape = tuple(points)
        if mask is None:
            mask = np.ones(shape, dtype=bool)
        else:
            mask = np.array(mask, dtype=bool)
            if mask.shape != shape:
                raise ValueError(f"mask shape {mask.shape} does not match grid {shape}")
        if boundary is Boundary.DIRICHLET:
            for axis in range(len(shape)):
                index = [slice(None)] * len(shape)
                index[axis] = 0
                mask[tuple(index)] = False
        if not mask.any():
            raise ValueError("domain mask is empty")
        mask.setflags(write=False)
        self.mask = mask

    @classmethod
    def periodic(cls, extents, points) -> Grid:
        return cls(extents, points, Boundary.PERIODIC)

    @classmethod
    def dirichlet(cls, extents, points, obstacle: tuple[Sequence[float], float] | None = None) -> Grid:
        """Dirichlet box, optionally with a closed disk ``(center, radius)`` removed.

        The obstacle turns the box into a bounded surrogate of an exterior
        domain ``R^N minus C``.
        """
        grid = cls(extents, points, Boundary.DIRICHLET)
        if obstacle is None:
            return grid
        center, radius = obstacle
        if radius <= 0:
            raise ValueError("obstacle radius must be positive")
        dist = grid.distance_from(center)
        return cls(extents, points, Boundary.DIRICHLET, mask=grid.mask & (dist > radius))

    # geometry ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def is_periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple((b - a) / n for (a, b), n in zip(self.extents, self.points))

    @cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(a + h * np.arange(n) for (a, _), h, n in zip(self.extents, self.spacing, self.points))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers per axis in FFT order."""
        return tuple(2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.points, self.spacing))

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """``|xi|^2`` on the full FFT lattice."""
        mesh = np.meshgrid(*self.wavenumbers, indexing="ij")
        return sum(k**2 for k in mesh)

    @property
    def box_volume(self) -> float:
        return float(np.prod([b - a for a, b in self.extents]))

    def contains(self, point: Sequence[float]) -> bool:
        point = self._as_point(point)
        return all(a <= p <= b for p, (a, b) in zip(point, self.extents))

    def distance_from(self, center: Sequence[float]) -> np.ndarray:
        """Euclidean (not minimum-image) distance of every node to ``center``."""
        center = self._as_point(center)
        return np.sqrt(sum((x - c) ** 2 for x, c in zip(self.coords, center)))

    def distance_to_box_edge(self, center: Sequence[float]) -> float:
        center = self._as_point(center)
        return min(min(c - a, b - c) for c, (a, b) in zip(center, self.extents))

    def shell_mask(self, fraction: float = 0.1) -> np.ndarray:
        """Nodes closer than ``fraction`` of the box width to any box edge."""
        inner = np.ones(self.shape, dtype=bool)
        for x, (a, b) in zip(self.coords, self.extents):
            w = fraction * (b - a)
            inner &= (x >= a + w) & (x <= b - w)
        return ~inner & self.mask

    def _as_point(self, point) -> tuple[float, ...]:
        point = tuple(float(p) for p in np.atleast_1d(point))
        if len(point) != self.dim:
            raise ValueError(f"point {point} does not have dimension {self.dim}")
        return point

    # identity ----------------------------------------------------------

    @cached_property
    def key(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.extents, self.points, self.boundary.value)).encode())
        h.update(np.packbits(self.mask).tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self is other or self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        holes = int(self.mask.size - self.mask.sum())
        return (
            f"Grid(extents={self.extents}, points={self.points}, "
            f"boundary={self.boundary.value!r}, masked_out={holes})"
        )


@dataclass(frozen=True, eq=False)
class Field:
    """Values on a grid at a given time; entries off the domain mask are zero.

    Complex input stays complex128; real input is kept as float64 (used for
    potentials, kernels and densities).
    """

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values)
        values = values.astype(np.complex128 if np.iscomplexobj(values) else np.float64, copy=True)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values[~self.grid.mask] = 0
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def _trusted(cls, grid: Grid, values: np.ndarray, time: float = 0.0) -> Field:
        # skips validation; for hot loops that already guarantee the invariants
        obj = object.__new__(cls)
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "values", values)
        object.__setattr__(obj, "time", float(time))
        return obj

    @classmethod
    def from_function(cls, grid: Grid, fn, time: float = 0.0) -> Field:
        return cls(grid, fn(*grid.coords), time)

    def replace(self, values: np.ndarray | None = None, time: float | None = None) -> Field:
        return Field(self.grid, self.values if values is None else values, self.time if time is None else time)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class Region:
    """Whole domain, an open ball, or a half-open annulus ``r1 <= |x - c| < r2``."""

    kind: str = "whole"
    center: tuple[float, ...] | None = None
    inner: float = 0.0
    outer: float = math.inf

    def __post_init__(self):
        if self.kind not in ("whole", "ball", "annulus"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind == "ball" and not self.outer > 0:
            raise ValueError("ball radius must be positive")
        if self.kind == "annulus" and not (0 <= self.inner < self.outer):
            raise ValueError("annulus needs 0 <= inner < outer")
        if self.center is not None:
            object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @classmethod
    def whole(cls) -> Region:
        return cls("whole")

    @classmethod
    def ball(cls, center, radius: float) -> Region:
        return cls("ball", center, 0.0, float(radius))

    @classmethod
    def annulus(cls, center, inner: float, outer: float) -> Region:
        return cls("annulus", center, float(inner), float(outer))


def region_mask(grid: Grid, region: Region) -> np.ndarray:
    """Boolean node mask of ``region`` intersected with the domain."""
    if region.kind == "whole":
        return grid.mask.copy()
    if not grid.contains(region.center):
        raise ValueError(f"region center {region.center} lies outside the box {grid.extents}")
    dist = grid.distance_from(region.center)
    if region.kind == "ball":
        inside = dist < region.outer
    else:
        inside = (dist >= region.inner) & (dist < region.outer)
    return inside & grid.mask


def mask_volume(grid: Grid, region: Region) -> float:
    return float(np.count_nonzero(region_mask(grid, region))) * grid.cell_volume


def ball_volume(dim: int, radius: float) -> float:
    """Lebesgue measure of a ball of the given radius in dimension 1, 2 or 3."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    omega = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}
    if dim not in omega:
        raise ValueError(f"ball_volume supports dim 1..3, got {dim}")
    return omega[dim] * radius**dim


def _norm_of_values(abs_values: np.ndarray, cell_volume: float, r: float) -> float:
    if abs_values.size == 0:
        return 0.0
    peak = float(abs_values.max())
    if peak == 0.0:
        return 0.0
    if math.isinf(r):
        return peak
    # scale by the peak so large r does not overflow or underflow
    scaled = abs_values / peak
    return peak * (float(np.sum(scaled**r)) * cell_volume) ** (1.0 / r)


def lp_norm(field: Field, region: Region | np.ndarray | None = None, r: float = 2.0) -> float:
    """Discrete ``L^r`` norm of ``field`` over ``region``.

    ``(sum |u|^r h^N)^(1/r)`` for finite ``r`` and the nodal max for
    ``r = inf``; an empty region gives 0. ``region`` may also be a
    precomputed node mask.
    """
    r = float(r)
    if not r >= 2:
        raise ValueError(f"r must lie in [2, inf], got {r}")
    if region is None:
        region = Region.whole()
    if isinstance(region, Region):
        sel = region_mask(field.grid, region)
    else:
        sel = np.asarray(region, dtype=bool)
        if sel.shape != field.grid.shape:
            raise ValueError("region mask does not match the field's grid")
    return _norm_of_values(np.abs(field.values[sel]), field.grid.cell_volume, r)


def forward_differences(values: np.ndarray, grid: Grid) -> list[np.ndarray]:
    """One-sided differences ``(u[j+1] - u[j]) / h`` per axis with zero ghosts."""
    out = []
    for axis, h in enumerate(grid.spacing):
        shifted = np.roll(values, -1, axis=axis)
        if not grid.is_periodic:
            index = [slice(None)] * grid.dim
            index[axis] = -1
            shifted[tuple(index)] = 0
        out.append((shifted - values) / h)
    return out


def grad_l2_norm(field: Field) -> float:
    """``||grad u||_2``: spectral on periodic grids, staggered differences on Dirichlet ones."""
    grid = field.grid
    u = field.values
    if grid.is_periodic:
        uk = np.fft.fftn(u)
        total = float(np.sum(grid.xi_squared * np.abs(uk) ** 2)) / u.size
    else:
        total = float(sum(np.sum(np.abs(d) ** 2) for d in forward_differences(u, grid)))
    return math.sqrt(total * grid.cell_volume)
