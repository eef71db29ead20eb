"""Light-cone lower bounds on the decay of solutions and their finite-time checks.

For a solution with charge norm ``m = ||u0||_2``, gradient bound
``G = sup_t ||grad u(t)||_2`` and any ``0 < eps < m``, the light-cone speed is

    M0 = 2 m G / (m^2 - eps^2)

and, for every ``r`` in ``[2, inf]`` and centre ``c``,

    liminf |t|^(N(1/2 - 1/r)) ||u(t)||_{L^r(Omega & |x - c| < M0 |t|)} >= eps / |B(0, M0)|^(1/2 - 1/r).

The asymptotic statement rests on a finite-time inequality for the tent
``T_H(x) = max(0, 1 - |x - c|/H)``:

    int T_H |u(t)|^2 >= int T_H |u0|^2 - (2|t|/H) m G

which holds at every t and is checked here verbatim.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateWarning
from .grid import Field, Grid, Region, ball_volume, lp_norm, mask_volume
from .prop import TrajectoryRecord

__all__ = [
    "BoundParams",
    "TentCutoff",
    "CheckResult",
    "BoundReport",
    "FloorCheck",
    "m_zero",
    "m_zero_energy",
    "bound_rhs",
    "decay_quantity",
    "tent",
    "localized_mass_residual",
    "bounded_domain_floor",
    "windowed_l2",
    "strauss_limit_rhs",
    "verify_theorem",
    "r_label",
    "default_delta",
]


def r_label(r: float) -> str:
    r = float(r)
    if math.isinf(r):
        return "inf"
    return str(int(r)) if r.is_integer() else repr(r)


def holder_exponent(r: float) -> float:
    """``1/2 - 1/r`` (``1/2`` for ``r = inf``)."""
    r = float(r)
    if not r >= 2:
        raise ValueError(f"r must lie in [2, inf], got {r}")
    return 0.5 if math.isinf(r) else 0.5 - 1.0 / r


def default_delta(r: float) -> float:
    # r > 2 feels the staircase ball volume through |B|^(1/2 - 1/r)
    return 0.0 if float(r) == 2.0 else 0.02


@dataclass(frozen=True)
class BoundParams:
    eps: float
    center: tuple[float, ...] = (0.0,)
    r_list: tuple[float, ...] = (2.0, 4.0, math.inf)
    time_window: tuple[float, float] = (5.0, 50.0)
    delta: float | None = None
    strict_geometry: bool = False

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, "r_list", tuple(float(r) for r in self.r_list))
        object.__setattr__(self, "time_window", tuple(float(t) for t in self.time_window))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        for r in self.r_list:
            holder_exponent(r)
        t1, t2 = self.time_window
        if not 0 < t1 < t2:
            raise ValueError(f"time window needs 0 < T1 < T2, got {self.time_window}")
        if self.delta is not None and not 0 <= self.delta < 1:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")

    def delta_for(self, r: float) -> float:
        return default_delta(r) if self.delta is None else self.delta

    def check_eps(self, norm0: float) -> None:
        if not self.eps < norm0:
            raise ValueError(f"eps={self.eps} must be smaller than ||u0||_2={norm0}")


def m_zero(norm0: float, sup_grad: float, eps: float) -> float:
    """Light-cone speed ``2 m G / (m^2 - eps^2)``; ``norm0`` is ``||u0||_2`` (not squared)."""
    if not 0 < eps < norm0:
        raise ValueError(f"need 0 < eps < ||u0||, got eps={eps}, ||u0||={norm0}")
    if sup_grad < 0:
        raise ValueError("sup_grad must be nonnegative")
    if sup_grad == 0:
        warnings.warn("sup_grad = 0: the light cone has zero radius and the bound is vacuous", DegenerateWarning, stacklevel=2)
    return 2.0 * norm0 * sup_grad / (norm0**2 - eps**2)


def m_zero_energy(norm0: float, energy0: float, eps: float) -> float:
    """``M0`` with ``sqrt(2 E(u0))`` in place of the gradient bound.

    Only valid when the potential part of the energy is nonnegative, so that
    ``||grad u(t)||^2 <= 2 E(u0)``.
    """
    if energy0 < 0:
        raise ValueError(f"energy must be nonnegative for the sqrt(2E) bound, got {energy0}")
    if not 0 < eps < norm0:
        raise ValueError(f"need 0 < eps < ||u0||, got eps={eps}, ||u0||={norm0}")
    if energy0 == 0:
        warnings.warn("zero energy: the light cone has zero radius and the bound is vacuous", DegenerateWarning, stacklevel=2)
    return 2.0 * norm0 * math.sqrt(2.0 * energy0) / (norm0**2 - eps**2)


def bound_rhs(eps: float, M0: float, dim: int, r: float) -> float:
    """``eps / |B(0, M0)|^(1/2 - 1/r)``."""
    return eps * ball_volume(dim, M0) ** (-holder_exponent(r))


def decay_quantity(u: Field, c: Sequence[float], M0: float, r: float) -> float:
    """``|t|^(N(1/2-1/r)) ||u(t)||_{L^r(Omega & B(c, M0|t|))}`` at ``t = u.time``.

    At ``t = 0`` the ball is empty; returns 0 and emits a :class:`DegenerateWarning`.
    """
    if not M0 > 0:
        raise ValueError("M0 must be positive")
    t = abs(u.time)
    e = holder_exponent(r)
    if t == 0:
        warnings.warn("decay quantity at t = 0 is taken over an empty ball", DegenerateWarning, stacklevel=2)
        return 0.0
    return t ** (u.grid.dim * e) * lp_norm(u, Region.ball(c, M0 * t), r)


@dataclass(frozen=True, eq=False)
class TentCutoff:
    center: tuple[float, ...]
    H: float
    field: Field

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def integrate(self, u: Field) -> float:
        """``int T_H |u|^2``."""
        return float(np.sum(self.values * u.density)) * u.grid.cell_volume


def tent(grid: Grid, c: Sequence[float], H: float) -> TentCutoff:
    if not H > 0:
        raise ValueError(f"tent height scale must be positive, got {H}")
    if not grid.contains(c):
        raise ValueError(f"tent center {c} lies outside the box")
    dist = grid.distance_from(c)
    values = np.maximum(0.0, 1.0 - dist / H)
    return TentCutoff(tuple(float(x) for x in np.atleast_1d(c)), float(H), Field(grid, values))


def localized_mass_residual(u_t: Field, u_0: Field, tentf: TentCutoff, norm0: float, sup_grad: float) -> float:
    """``int T_H|u(t)|^2 - int T_H|u0|^2 + (2|t|/H) ||u0|| G``; nonnegative for exact solutions."""
    t = abs(u_t.time - u_0.time)
    return tentf.integrate(u_t) - tentf.integrate(u_0) + 2.0 * t / tentf.H * norm0 * sup_grad


@dataclass(frozen=True)
class FloorCheck:
    passed: bool
    margin: float
    tolerance: float
    value: float
    floor: float


def bounded_domain_floor(u: Field, r: float, norm0: float) -> FloorCheck:
    """``||u(t)||_{L^r(Omega)} >= |Omega|^-(1/2-1/r) ||u0||_2`` on a bounded domain."""
    if u.grid.is_periodic:
        raise ValueError("the bounded-domain floor needs a Dirichlet (bounded) domain")
    vol = mask_volume(u.grid, Region.whole())
    value = lp_norm(u, Region.whole(), r)
    floor = vol ** (-holder_exponent(r)) * norm0
    margin = value - floor
    tol = 1e-8 * norm0
    return FloorCheck(margin >= -tol, margin, tol, value, floor)


def windowed_l2(u: Field, k_inner: float, k_outer: float) -> float:
    """``||u(t)||_{L^2(k_inner t <= |x| < k_outer t)}`` around the origin."""
    t = u.time
    if not t > 0:
        raise ValueError(f"windowed_l2 needs t > 0, got {t}")
    if not 0 <= k_inner < k_outer:
        raise ValueError("need 0 <= k_inner < k_outer")
    origin = (0.0,) * u.grid.dim
    return lp_norm(u, Region.annulus(origin, k_inner * t, k_outer * t), 2)


def strauss_limit_rhs(u0: Field, k_inner: float, k_outer: float) -> float:
    """``L^2`` norm of the unitary Fourier transform of ``u0`` on ``k_inner/2 <= |xi| < k_outer/2``."""
    grid = u0.grid
    if not grid.is_periodic:
        raise ValueError("strauss_limit_rhs needs a periodic grid")
    if not 0 <= k_inner < k_outer:
        raise ValueError("need 0 <= k_inner < k_outer")
    xi = np.sqrt(grid.xi_squared)
    if k_inner / 2 > xi.max():
        raise ValueError(f"annulus starts at |xi|={k_inner / 2} beyond the resolved range {xi.max():.3g}")
    Uk = np.fft.fftn(u0.values)
    sel = (xi >= k_inner / 2) & (xi < k_outer / 2)
    return math.sqrt(float(np.sum(np.abs(Uk[sel]) ** 2)) * grid.cell_volume / Uk.size)


# reporting -------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    status: str  # "pass", "fail" or "skipped"
    tolerance: float
    min_margin: float | None
    rows: list[dict] = field(default_factory=list)
    r: float | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def skipped(self) -> bool:
        return self.status == "skipped"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "r": None if self.r is None else r_label(self.r),
            "status": self.status,
            "passed": self.passed,
            "skipped": self.skipped,
            "tolerance": self.tolerance,
            "min_margin": self.min_margin,
            "detail": self.detail,
            "series": self.rows,
        }


@dataclass
class BoundReport:
    metadata: dict
    checks: list[CheckResult]
    q_series: dict[str, list[float]] = field(default_factory=dict)
    rhs: dict[str, float] = field(default_factory=dict)
    residual_series: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)

    @property
    def failed_checks(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status == "fail"]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": {"passed": self.passed, "failed": [c.name for c in self.failed_checks]},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finish(name, rows, tol, r=None, guard: str | None = None, strict=False) -> CheckResult:
    if guard:
        status = "fail" if strict else "skipped"
        mins = min((row["margin"] for row in rows), default=None)
        return CheckResult(name, status, tol, mins, rows, r, guard)
    if not rows:
        return CheckResult(name, "fail", tol, None, rows, r, "no samples in the time window")
    mins = min(row["margin"] for row in rows)
    return CheckResult(name, "pass" if mins >= -tol else "fail", tol, mins, rows, r)


def verify_theorem(
    traj: TrajectoryRecord,
    params: BoundParams,
    M0: float,
    dim: int | None = None,
    sup_grad: float | None = None,
    whole_space: bool | None = None,
) -> BoundReport:
    """Finite-horizon check of the light-cone bound on a recorded trajectory.

    For each ``r``: ``min over t in [T1, T2]`` of the decay quantity against
    ``(1 - delta) * bound_rhs``. The tent inequality with ``H = M0 |t|`` is
    checked at every nonzero sample. On whole-space surrogates (periodic
    boxes) a check whose ball leaves the box is skipped, or failed under
    ``strict_geometry``.
    """
    if traj.fields is None or len(traj.fields) != len(traj.times):
        raise ValueError("verify_theorem needs a trajectory with retained fields at every sample")
    u0 = traj.fields[0]
    grid = u0.grid
    dim = grid.dim if dim is None else dim
    whole_space = grid.is_periodic if whole_space is None else whole_space
    norm0 = traj.norm0
    params.check_eps(norm0)
    sup_grad = traj.grad_max if sup_grad is None else sup_grad
    t1, t2 = params.time_window
    c = params.center
    edge = grid.distance_to_box_edge(c)

    def in_window(t):
        return t1 - 1e-12 <= abs(t) <= t2 + 1e-12

    window_times = [t for t in traj.times if in_window(t)]
    guard = None
    if whole_space and window_times and M0 * max(abs(t) for t in window_times) > edge:
        guard = (
            f"geometry: light cone leaves box (radius {M0 * max(abs(t) for t in window_times):.4g} "
            f"> distance {edge:.4g} to the box edge)"
        )

    checks: list[CheckResult] = []
    q_series: dict[str, list[float]] = {}
    rhs_values: dict[str, float] = {}
    for r in params.r_list:
        label = r_label(r)
        rhs = bound_rhs(params.eps, M0, dim, r)
        delta = params.delta_for(r)
        rhs_values[label] = rhs
        series, rows = [], []
        for f in traj.fields:
            if f.time == 0:
                q = 0.0
            else:
                q = decay_quantity(f, c, M0, r)
            series.append(q)
            if in_window(f.time):
                rows.append({"t": f.time, "value": q, "rhs": rhs, "margin": q - rhs})
        q_series[label] = series
        checks.append(_finish(f"decay_r{label}", rows, delta * rhs, r, guard, params.strict_geometry))

    tol_disc = 1e-6 * norm0**2
    residuals, rows = [], []
    tent_guard = None
    for f in traj.fields:
        t = abs(f.time - u0.time)
        if t == 0:
            residuals.append(0.0)
            continue
        H = M0 * t
        if whole_space and H > edge and tent_guard is None:
            tent_guard = f"geometry: tent support leaves box at t={f.time:.4g}"
        res = localized_mass_residual(f, u0, tent(grid, c, H), norm0, sup_grad)
        residuals.append(res)
        rows.append({"t": f.time, "value": res, "rhs": 0.0, "margin": res})
    checks.append(_finish("tent_residual", rows, tol_disc, None, tent_guard, params.strict_geometry))

    metadata = {
        "M0": M0,
        "eps": params.eps,
        "norm0": norm0,
        "sup_grad": sup_grad,
        "sup_grad_source": "running max of ||grad u||_2 over the computed trajectory",
        "center": list(c),
        "dim": dim,
        "time_window": [t1, t2],
        "delta": {r_label(r): params.delta_for(r) for r in params.r_list},
        "grid": repr(grid),
        "scheme": traj.scheme,
        "whole_space": whole_space,
    }
    return BoundReport(metadata, checks, q_series, rhs_values, residuals)
