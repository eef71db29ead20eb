"""Named, reproducible experiments: build, evolve, check bounds, write reports.

An :class:`ExperimentConfig` fully determines a run. :func:`run_experiment`
returns a :class:`RunReport` and, when an output directory is set, writes
``<out>/<name>/<hash>.csv`` and ``<hash>.json`` (deterministic) plus a
``<hash>.meta.json`` sidecar holding the wall time.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .bounds import (
    BoundParams,
    BoundReport,
    CheckResult,
    bounded_domain_floor,
    m_zero,
    m_zero_energy,
    r_label,
    strauss_limit_rhs,
    verify_theorem,
    windowed_l2,
)
from .errors import ConfigError, GaugeViolation, NumericalError, TailMassBreach
from .fieldio import read_field, write_field
from .grid import Field, Grid
from .nonlin import (
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
from .prop import GAUGE_TOL, Scheme, StepperConfig, TrajectoryRecord, evolve

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_BOUND, EXIT_NUMERICAL, EXIT_CONFIG = 0, 2, 3, 4

MASS_TOL = {Scheme.EXACT_FREE: 1e-10, Scheme.SPLIT_STEP: 1e-10, Scheme.MIDPOINT: 1e-8}
FREE_ENERGY_TOL = 1e-6


# config ----------------------------------------------------------------


def _floats(value) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(value))


@dataclass
class DomainConfig:
    extents: list = field(default_factory=lambda: [[-40.0, 40.0]])
    points: list = field(default_factory=lambda: [4096])
    boundary: str = "periodic"
    obstacle_center: list | None = None
    obstacle_radius: float | None = None
    whole_space: bool | None = None

    def build(self) -> Grid:
        raw = self.extents
        if len(raw) == 2 and np.ndim(raw[0]) == 0:
            raw = [raw]
        extents = [tuple(_floats(ab)) for ab in raw]
        points = [int(n) for n in np.atleast_1d(self.points)]
        if len(points) == 1 and len(extents) > 1:
            points = points * len(extents)
        if self.boundary == "periodic":
            if self.obstacle_radius is not None:
                raise ConfigError("obstacles need a dirichlet box")
            return Grid.periodic(extents, points)
        if self.boundary == "dirichlet":
            obstacle = None
            if self.obstacle_radius is not None:
                center = self.obstacle_center or [0.0] * len(extents)
                obstacle = (_floats(center), float(self.obstacle_radius))
            return Grid.dirichlet(extents, points, obstacle)
        raise ConfigError(f"unknown boundary {self.boundary!r}")

    def is_whole_space(self, grid: Grid) -> bool:
        if self.whole_space is not None:
            return bool(self.whole_space)
        return grid.is_periodic or self.obstacle_radius is not None


@dataclass
class InitialConfig:
    kind: str = "gaussian"
    width: float = 1.0
    center: list = field(default_factory=lambda: [0.0])
    mode: list = field(default_factory=lambda: [1])
    amplitude: float = math.sqrt(2.0)
    path: str | None = None

    def build(self, grid: Grid) -> Field:
        center = _floats(self.center)
        if len(center) == 1 and grid.dim > 1:
            center = center * grid.dim
        if self.kind == "gaussian":
            r2 = sum((x - c) ** 2 for x, c in zip(grid.coords, center))
            values = np.exp(-r2 / (2.0 * self.width**2))
        elif self.kind == "eigenfunction":
            if grid.is_periodic:
                raise ConfigError("eigenfunction initial data needs a dirichlet box")
            modes = [int(m) for m in np.atleast_1d(self.mode)]
            if len(modes) == 1:
                modes = modes * grid.dim
            values = np.ones(grid.shape)
            for x, (a, b), m in zip(grid.coords, grid.extents, modes):
                values = values * np.sin(m * math.pi * (x - a) / (b - a))
        elif self.kind == "sech":
            if grid.dim != 1:
                raise ConfigError("sech soliton initial data is one-dimensional")
            a = self.amplitude / math.sqrt(2.0)
            values = self.amplitude / np.cosh(a * (grid.coords[0] - center[0]))
        elif self.kind == "file":
            if not self.path:
                raise ConfigError("file initial data needs a path")
            return read_field(self.path, grid).replace(time=0.0)
        else:
            raise ConfigError(f"unknown initial data kind {self.kind!r}")
        u0 = Field(grid, values.astype(np.complex128))
        if not np.abs(u0.values).max() > 0:
            raise ConfigError("initial data must be nonzero")
        return u0


@dataclass
class NonlinearityConfig:
    kind: str = "zero"
    lam: float = 1.0
    alpha: float = 2.0
    potential: str = "bump"
    v0: float = 1.0
    v_width: float = 2.0
    v_center: list = field(default_factory=lambda: [0.0])
    potential_path: str | None = None
    kernel: str = "power_law"
    mu: float = 1.0
    gamma: float = 0.5
    kernel_path: str | None = None

    def build(self, grid: Grid) -> NonlinearitySpec:
        if self.kind == "zero":
            return Zero()
        if self.kind == "power":
            return Power(float(self.lam), float(self.alpha))
        if self.kind == "saturated":
            return Saturated(float(self.lam), float(self.alpha))
        if self.kind == "potential":
            if self.potential == "bump":
                c = _floats(self.v_center)
                if len(c) == 1 and grid.dim > 1:
                    c = c * grid.dim
                r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
                V = Field(grid, self.v0 * np.exp(-r2 / self.v_width**2))
            elif self.potential == "file":
                if not self.potential_path:
                    raise ConfigError("file potential needs potential_path")
                V = read_field(self.potential_path, grid)
            else:
                raise ConfigError(f"unknown potential {self.potential!r}")
            return Potential(V)
        if self.kind == "hartree":
            if self.kernel == "power_law":
                kernel = HartreeKernel.power_law(float(self.mu), float(self.gamma))
            elif self.kernel == "file":
                if not self.kernel_path:
                    raise ConfigError("file kernel needs kernel_path")
                kernel = HartreeKernel.sampled(read_field(self.kernel_path, grid).values.real)
            else:
                raise ConfigError(f"unknown kernel {self.kernel!r}")
            return Hartree(kernel)
        raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")


@dataclass
class StepperSection:
    scheme: str = "SplitStepFourier"
    dt: float = 1e-3
    fp_tol: float = 1e-12
    fp_max_iters: int = 50

    def build(self) -> StepperConfig:
        return StepperConfig(Scheme(self.scheme), float(self.dt), float(self.fp_tol), int(self.fp_max_iters))


@dataclass
class BoundsConfig:
    enabled: bool = True
    eps: float | None = None
    eps_ratio: float | None = 0.5 ** 0.5
    center: list = field(default_factory=lambda: [0.0])
    r_list: list = field(default_factory=lambda: [2.0, 4.0, math.inf])
    t1: float = 5.0
    t2: float | None = None
    delta: float | None = None
    m0_rule: str = "sup_grad"
    strict_geometry: bool = False

    def resolve_eps(self, norm0: float) -> float:
        if self.eps is not None and self.eps_ratio is not None:
            raise ConfigError("set either eps or eps_ratio, not both")
        if self.eps is not None:
            eps = float(self.eps)
        elif self.eps_ratio is not None:
            eps = float(self.eps_ratio) * norm0
        else:
            raise ConfigError("bounds need eps or eps_ratio")
        if not 0 < eps < norm0:
            raise ConfigError(f"eps={eps!r} must lie in (0, ||u0||_2) = (0, {norm0!r})")
        return eps

    def params(self, eps: float, dim: int, horizon: float) -> BoundParams:
        center = _floats(self.center)
        if len(center) == 1 and dim > 1:
            center = center * dim
        t2 = horizon if self.t2 is None else float(self.t2)
        return BoundParams(eps, center, tuple(float(r) for r in self.r_list), (float(self.t1), t2), self.delta, self.strict_geometry)


@dataclass
class OutputConfig:
    name: str = "experiment"
    sample_times: list | None = None
    horizon: float = 50.0
    cadence: float = 1.0
    snapshots: bool = False
    out_dir: str | None = None
    tail_fraction: float = 0.1
    tail_tol: float = 1e-6
    grad_stride: int = 1
    windows: list | None = None

    def times(self, dt: float) -> list[float]:
        if self.sample_times:
            times = sorted(float(t) for t in self.sample_times)
            if times[0] != 0.0:
                times = [0.0] + times
        else:
            n = int(round(self.horizon / self.cadence))
            if abs(n * self.cadence - self.horizon) > 1e-9:
                raise ConfigError("horizon must be a multiple of cadence")
            times = [k * self.cadence for k in range(n + 1)]
        if dt < 0:
            times = [-t for t in times]
        return times


SECTIONS = {
    "domain": DomainConfig,
    "initial": InitialConfig,
    "nonlinearity": NonlinearityConfig,
    "stepper": StepperSection,
    "bounds": BoundsConfig,
    "output": OutputConfig,
}


@dataclass
class ExperimentConfig:
    domain: DomainConfig = field(default_factory=DomainConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    nonlinearity: NonlinearityConfig = field(default_factory=NonlinearityConfig)
    stepper: StepperSection = field(default_factory=StepperSection)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        kwargs = {}
        for section, values in data.items():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]")
            klass = SECTIONS[section]
            known = {f.name for f in fields(klass)}
            unknown = set(values) - known
            if unknown:
                raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
            kwargs[section] = klass(**values)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {name: asdict(getattr(self, name)) for name in SECTIONS}

    def config_hash(self) -> str:
        blob = json.dumps(_jsonable(self.to_dict()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


# runs ------------------------------------------------------------------


def monitor_gauge(spec: NonlinearitySpec, u: Field, tol: float = GAUGE_TOL) -> float:
    """Gauge defect of ``spec`` at ``u``; raises :class:`GaugeViolation` above ``tol``."""
    defect = gauge_defect(spec, u)
    if defect > tol:
        raise GaugeViolation(defect, tol)
    return defect


@dataclass
class RunReport:
    name: str
    config: dict
    config_hash: str
    trajectory: TrajectoryRecord | None
    bounds: BoundReport | None
    conservation: list[CheckResult]
    floor: list[CheckResult]
    eps: float | None = None
    M0: float | None = None
    failure: str | None = None
    failure_kind: str | None = None
    wall_time: float = 0.0
    exploratory: dict | None = None

    @property
    def numerical_failure(self) -> bool:
        return self.failure is not None

    @property
    def passed(self) -> bool:
        if self.failure:
            return False
        checks = list(self.floor) + ([] if self.bounds is None else self.bounds.checks)
        return all(c.status != "fail" for c in checks)

    @property
    def exit_code(self) -> int:
        if self.failure:
            return EXIT_NUMERICAL
        if any(c.status == "fail" for c in self.conservation):
            return EXIT_NUMERICAL
        return EXIT_OK if self.passed else EXIT_BOUND

    @property
    def all_checks(self) -> list[CheckResult]:
        return list(self.conservation) + list(self.floor) + ([] if self.bounds is None else list(self.bounds.checks))

    def to_dict(self) -> dict:
        traj = self.trajectory
        summary = None
        if traj is not None and traj.times:
            summary = {
                "samples": len(traj.times),
                "steps": traj.steps,
                "scheme": traj.scheme,
                "dt": traj.dt,
                "t_final": traj.times[-1],
                "grad_max": traj.grad_max,
                "mass_drift": traj.mass_drift(),
                "energy_drift": traj.energy_drift(),
            }
        return _jsonable(
            {
                "name": self.name,
                "config": self.config,
                "config_hash": self.config_hash,
                "eps": self.eps,
                "M0": self.M0,
                "trajectory": summary,
                "conservation": [c.to_dict() for c in self.conservation],
                "floor": [c.to_dict() for c in self.floor],
                "bounds": None if self.bounds is None else self.bounds.to_dict(),
                "verdict": {"passed": self.passed, "exit_code": self.exit_code},
                "failure": None if self.failure is None else {"kind": self.failure_kind, "message": self.failure},
                "exploratory": self.exploratory,
                "provenance": {
                    "package": __version__,
                    "numpy": np.__version__,
                    "scipy": scipy.__version__,
                    "python": platform.python_version(),
                    "seed": None,
                },
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    def csv_text(self) -> str:
        traj = self.trajectory
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = traj.columns()
        header = list(cols)
        r_labels = list(self.bounds.q_series) if self.bounds is not None else []
        for lab in r_labels:
            header += [f"q_r_{lab}", f"rhs_{lab}", f"margin_{lab}"]
        if self.bounds is not None:
            header.append("residual_tent")
        writer.writerow(header)
        for i in range(len(traj.times)):
            row = [repr(float(cols[k][i])) for k in cols]
            for lab in r_labels:
                q = self.bounds.q_series[lab][i]
                rhs = self.bounds.rhs[lab]
                row += [repr(q), repr(rhs), repr(q - rhs)]
            if self.bounds is not None:
                row.append(repr(self.bounds.residual_series[i]))
            writer.writerow(row)
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> Path:
        target = Path(out_dir) / self.name
        target.mkdir(parents=True, exist_ok=True)
        stem = target / self.config_hash
        if self.trajectory is not None and self.trajectory.times:
            stem.with_suffix(".csv").write_text(self.csv_text())
        stem.with_suffix(".json").write_text(self.to_json() + "\n")
        meta = {"wall_time_s": self.wall_time, "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S")}
        (target / f"{self.config_hash}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        if self.trajectory is not None and self.trajectory.fields and self.config["output"]["snapshots"]:
            snap_dir = target / f"{self.config_hash}_snapshots"
            for k, f in enumerate(self.trajectory.fields):
                write_field(snap_dir / f"sample_{k:04d}.nlsf", f)
        return stem


@dataclass
class _Prepared:
    config: ExperimentConfig
    grid: Grid
    u0: Field
    spec: NonlinearitySpec
    stepper: StepperConfig
    times: list[float]
    whole_space: bool


def prepare(config: ExperimentConfig) -> _Prepared:
    """Build every object a run needs; raises :class:`ConfigError` on invalid input."""
    try:
        grid = config.domain.build()
        u0 = config.initial.build(grid)
        spec = config.nonlinearity.build(grid)
        stepper = config.stepper.build()
        stepper.validate_for(grid, spec)
        times = config.output.times(stepper.dt)
        for pair in config.output.windows or []:
            if len(pair) != 2 or not 0 <= float(pair[0]) < float(pair[1]):
                raise ConfigError(f"window {pair!r} needs 0 <= k_inner < k_outer")
        if config.bounds.enabled:
            norm0 = math.sqrt(float(np.sum(u0.density)) * grid.cell_volume)
            if not norm0 > 0:
                raise ConfigError("initial data vanishes on the grid")
            eps = config.bounds.resolve_eps(norm0)
            config.bounds.params(eps, grid.dim, max(abs(t) for t in times))
            if config.bounds.m0_rule not in ("sup_grad", "energy"):
                raise ConfigError(f"unknown m0_rule {config.bounds.m0_rule!r}")
            for r in config.bounds.r_list:
                if not float(r) >= 2:
                    raise ConfigError(f"r={r} is outside [2, inf]")
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    return _Prepared(config, grid, u0, spec, stepper, times, config.domain.is_whole_space(grid))


def _conservation_checks(prep: _Prepared, traj: TrajectoryRecord) -> list[CheckResult]:
    scheme = prep.stepper.scheme
    checks = []

    def series(name, values, ref, tol, status=None):
        rows = [{"t": t, "value": v, "rhs": ref, "margin": tol - abs(v - ref) / max(abs(ref), 1e-300)} for t, v in zip(traj.times, values)]
        drift = max(abs(v - ref) for v in values) / max(abs(ref), 1e-300)
        if status is None:
            status = "pass" if drift <= tol else "fail"
        return CheckResult(name, status, tol, tol - drift, rows, None, f"max relative drift {drift:.3e}")

    checks.append(series("mass_drift", traj.mass, traj.mass[0], MASS_TOL[scheme]))
    # energy is only a hard check for the free equation; otherwise informational
    e_status = None if isinstance(prep.spec, Zero) else "info"
    checks.append(series("energy_drift", traj.energy, traj.energy[0], FREE_ENERGY_TOL, e_status))
    gmax = max(traj.gauge_defect)
    checks.append(
        CheckResult("gauge_defect", "pass" if gmax <= GAUGE_TOL else "fail", GAUGE_TOL, GAUGE_TOL - gmax,
                    [{"t": t, "value": v, "rhs": 0.0, "margin": GAUGE_TOL - v} for t, v in zip(traj.times, traj.gauge_defect)])
    )
    if prep.whole_space:
        tol = prep.config.output.tail_tol
        tmax = max(traj.tail_mass)
        checks.append(
            CheckResult("tail_mass", "pass" if tmax <= tol else "fail", tol, tol - tmax,
                        [{"t": t, "value": v, "rhs": 0.0, "margin": tol - v} for t, v in zip(traj.times, traj.tail_mass)],
                        None, "" if tmax <= tol else "tail mass breach: the box no longer imitates the whole space")
        )
    return checks


def _floor_checks(prep: _Prepared, traj: TrajectoryRecord) -> list[CheckResult]:
    if prep.grid.is_periodic or prep.whole_space:
        return []
    out = []
    norm0 = traj.norm0
    r_list = prep.config.bounds.r_list if prep.config.bounds.enabled else [2.0, 4.0, math.inf]
    for r in r_list:
        rows, tol, ok = [], 1e-8 * norm0, True
        for f in traj.fields:
            fc = bounded_domain_floor(f, float(r), norm0)
            rows.append({"t": f.time, "value": fc.value, "rhs": fc.floor, "margin": fc.margin})
            ok &= fc.passed
        out.append(CheckResult(f"floor_r{r_label(r)}", "pass" if ok else "fail", tol, min(row["margin"] for row in rows), rows, float(r)))
    return out


def _bound_report(prep: _Prepared, traj: TrajectoryRecord, eps: float) -> tuple[BoundReport, float]:
    bcfg = prep.config.bounds
    norm0 = traj.norm0
    horizon = max(abs(t) for t in traj.times)
    params = bcfg.params(eps, prep.grid.dim, horizon)
    if bcfg.m0_rule == "energy":
        if not prep.spec.sign_condition():
            raise ConfigError("m0_rule=energy needs a nonnegative potential energy (V >= 0, W >= 0, lam <= 0)")
        e0 = energy(prep.spec, traj.fields[0])
        M0 = m_zero_energy(norm0, e0, eps)
        sup_grad = math.sqrt(2.0 * e0)
        source = "sqrt(2 E(u0))"
    else:
        sup_grad = traj.grad_max
        M0 = m_zero(norm0, sup_grad, eps)
        source = "running max of ||grad u||_2 over the computed trajectory"
    report = verify_theorem(traj, params, M0, prep.grid.dim, sup_grad, prep.whole_space)
    report.metadata["sup_grad_source"] = source
    return report, M0


def _trajectory(prep: _Prepared) -> TrajectoryRecord:
    return evolve(
        prep.u0,
        prep.stepper,
        prep.spec,
        prep.times,
        retain_fields=True,
        grad_stride=prep.config.output.grad_stride,
        tail_fraction=prep.config.output.tail_fraction,
        monitor=lambda f: monitor_gauge(prep.spec, f),
    )


def _assemble(prep, traj, eps, started) -> RunReport:
    cfg = prep.config
    resolved = _jsonable(cfg.to_dict())
    conservation = _conservation_checks(prep, traj)
    floor = _floor_checks(prep, traj)
    bounds, M0 = (None, None)
    if cfg.bounds.enabled:
        bounds, M0 = _bound_report(prep, traj, eps)
    report = RunReport(cfg.output.name, resolved, cfg.config_hash(), traj, bounds, conservation, floor, eps, M0)
    tail = next((c for c in conservation if c.name == "tail_mass"), None)
    if tail is not None and tail.status == "fail":
        report.failure = tail.detail
        report.failure_kind = TailMassBreach.__name__
    report.exploratory = _windowed_output(prep, traj)
    report.wall_time = time.perf_counter() - started
    return report


def _windowed_output(prep: _Prepared, traj: TrajectoryRecord) -> dict | None:
    """Annulus norms ``k' |t| <= |x| < k |t|``; informational on every domain."""
    windows = prep.config.output.windows
    if not windows:
        return None
    out = []
    for pair in windows:
        k_inner, k_outer = (float(k) for k in pair)
        rows = [
            {"t": f.time, "value": windowed_l2(f.replace(time=abs(f.time)), k_inner, k_outer)}
            for f in traj.fields
            if f.time != 0
        ]
        limit = strauss_limit_rhs(prep.u0, k_inner, k_outer) if prep.grid.is_periodic else None
        out.append({"k_inner": k_inner, "k_outer": k_outer, "limit": limit, "rows": rows})
    return {"status": "info", "windows": out}


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunReport:
    """Run one experiment. Numerical failures are captured in the report, not raised."""
    started = time.perf_counter()
    prep = prepare(config)
    out_dir = out_dir if out_dir is not None else config.output.out_dir
    eps = None
    try:
        traj = _trajectory(prep)
        if config.bounds.enabled:
            eps = config.bounds.resolve_eps(traj.norm0)
        report = _assemble(prep, traj, eps, started)
    except NumericalError as exc:
        partial = getattr(exc, "partial", None)
        report = RunReport(config.output.name, _jsonable(config.to_dict()), config.config_hash(), partial, None, [], [],
                           eps, None, str(exc), type(exc).__name__, time.perf_counter() - started)
        logger.error("run %s failed: %s", config.output.name, exc)
    if out_dir is not None:
        report.write(out_dir)
    return report


def sweep(config: ExperimentConfig, eps_values: Sequence[float], out_dir: str | Path | None = None, jobs: int = 1) -> list[RunReport]:
    """One trajectory, one report per ``eps`` (``M0`` recomputed for each)."""
    if not eps_values:
        raise ConfigError("sweep needs at least one eps value")
    started = time.perf_counter()
    prep = prepare(config)
    norm0 = math.sqrt(float(np.sum(prep.u0.density)) * prep.grid.cell_volume)
    for eps in eps_values:
        if not 0 < eps < norm0:
            raise ConfigError(f"eps={eps!r} must lie in (0, ||u0||_2) = (0, {norm0!r})")
    out_dir = out_dir if out_dir is not None else config.output.out_dir

    try:
        traj = _trajectory(prep)
    except NumericalError as exc:
        partial = getattr(exc, "partial", None)
        reports = [
            RunReport(config.output.name, _jsonable(config.to_dict()), config.config_hash(), partial, None, [], [],
                      float(e), None, str(exc), type(exc).__name__)
            for e in eps_values
        ]
    else:
        def one(eps):
            cfg = ExperimentConfig.from_dict(config.to_dict())
            cfg.bounds.eps, cfg.bounds.eps_ratio = float(eps), None
            cfg.bounds.enabled = True
            sub = _Prepared(cfg, prep.grid, prep.u0, prep.spec, prep.stepper, prep.times, prep.whole_space)
            return _assemble(sub, traj, float(eps), started)

        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            reports = list(pool.map(one, eps_values))
    if out_dir is not None:
        for rep in reports:
            rep.write(out_dir)
    return reports
