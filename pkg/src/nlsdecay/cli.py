"""Command line: ``nlsdecay run|sweep|oracle``.

Exit codes: 0 all checks pass, 2 a bound check failed, 3 numerical failure,
4 configuration or usage error. Every path ends in one of these.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import re
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import oracles
from .errors import ConfigError, NumericalError
from .harness import (
    EXIT_BOUND,
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    SECTIONS,
    ExperimentConfig,
    RunReport,
    run_experiment,
    sweep,
)

logger = logging.getLogger(__name__)

DEFAULT_OUT = "runs"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with "bound failed"
    def error(self, message):
        raise UsageError(message)


# config files ----------------------------------------------------------

_INF = re.compile(r"(?<![A-Za-z])(-?)inf(inity)?(?![A-Za-z])", re.IGNORECASE)


def _parse_list(text: str):
    body = text.strip()
    if not body.startswith("["):
        body = f"[{body}]"
    body = _INF.sub(lambda m: f"{m.group(1)}Infinity", body)
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse list {text!r}: {exc.msg}") from exc


def _coerce(annotation: str, text: str, where: str):
    text = text.strip()
    optional = "None" in annotation
    if optional and text.lower() in ("", "none"):
        return None
    try:
        if annotation.startswith("list"):
            return _parse_list(text)
        if annotation.startswith("bool"):
            lowered = text.lower()
            if lowered in configparser.ConfigParser.BOOLEAN_STATES:
                return configparser.ConfigParser.BOOLEAN_STATES[lowered]
            raise ValueError(f"not a boolean: {text!r}")
        if annotation.startswith("int"):
            return int(text)
        if annotation.startswith("float"):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return text


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    data = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        types = {f.name: str(f.type) for f in fields(SECTIONS[section])}
        values = {}
        for key, raw in parser.items(section):
            if key not in types:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[key] = _coerce(types[key], raw, f"[{section}] {key}")
        data[section] = values
    return ExperimentConfig.from_dict(data)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return json.dumps(value).replace("Infinity", "inf")
    if isinstance(value, float):
        return "inf" if value == math.inf else ("-inf" if value == -math.inf else repr(value))
    return str(value)


def config_to_text(config: ExperimentConfig) -> str:
    """Fully resolved config as INI text; ``parse_config_text`` inverts it."""
    lines = []
    for section, values in config.to_dict().items():
        lines.append(f"[{section}]")
        lines += [f"{key} = {_format(value)}" for key, value in values.items()]
        lines.append("")
    return "\n".join(lines)


# commands --------------------------------------------------------------


def _summary(report: RunReport, out=None) -> None:
    out = out or sys.stdout
    head = f"{report.name} [{report.config_hash}]"
    if report.eps is not None and report.M0 is not None:
        head += f" eps={report.eps:.6g} M0={report.M0:.6g}"
    print(head, file=out)
    for check in report.all_checks:
        margin = "n/a" if check.min_margin is None else f"{check.min_margin:.6g}"
        line = f"  {check.status.upper():8s} {check.name:16s} margin={margin} tol={check.tolerance:.3g}"
        if check.detail and check.status != "pass":
            line += f"  ({check.detail})"
        print(line, file=out)
    if report.failure:
        print(f"  FAILED   numerical: {report.failure_kind}: {report.failure}", file=out)


def _apply_overrides(config: ExperimentConfig, args) -> str:
    if args.strict_geometry:
        config.bounds.strict_geometry = True
    return args.out or config.output.out_dir or DEFAULT_OUT


def cmd_run(args) -> int:
    config = load_config(args.path)
    out = _apply_overrides(config, args)
    report = run_experiment(config, out_dir=out)
    _summary(report)
    return report.exit_code


def cmd_sweep(args) -> int:
    config = load_config(args.path)
    out = _apply_overrides(config, args)
    try:
        eps = [float(v) for v in args.eps.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --eps list: {exc}") from exc
    if not eps:
        raise ConfigError("--eps needs at least one value")
    reports = sweep(config, eps, out_dir=out, jobs=args.jobs)
    for rep in reports:
        _summary(rep)
    codes = [rep.exit_code for rep in reports]
    if EXIT_NUMERICAL in codes:
        return EXIT_NUMERICAL
    return EXIT_BOUND if EXIT_BOUND in codes else EXIT_OK


def _g(x: float) -> str:
    return f"{x:.15g}"


def cmd_oracle(args) -> int:
    kind = args.kind
    if kind == "gaussian-integrals":
        vals = oracles.gaussian_integrals()
        for key in ("sqrt_pi", "sqrt_pi_over_2", "pi_quarter"):
            print(f"{key} {_g(vals[key])}")
    elif kind == "strauss-rhs":
        k_out = 2.0 if args.k is None else args.k
        print(_g(oracles.gaussian_spectral_mass(args.kp, k_out, args.dim, args.width)))
    elif kind == "gaussian-evolution":
        xs = [float(v) for v in args.x.split(",")]
        vals = oracles.gaussian_evolution(args.t, xs, args.width, args.dim)
        for x, v in zip(xs, vals):
            print(f"{_g(x)} {_g(v.real)} {_g(v.imag)}")
    elif kind == "hartree-direct":
        n, L = args.n, args.length
        h = L / n
        m = np.arange(n)
        disp = np.minimum(m, n - m) * h
        with np.errstate(divide="ignore"):
            kernel = np.where(disp > 0, args.mu * disp ** (-args.gamma), 0.0)
        kernel[0] = args.mu * (h / 2) ** (-args.gamma) / (1 - args.gamma)
        x = -L / 2 + m * h
        density = np.exp(-(x**2) / args.width**2)
        out = oracles.hartree_direct(kernel, density, h)
        for i in range(0, n, max(1, n // 8)):
            print(f"{_g(x[i])} {_g(out[i])}")
    else:
        raise UsageError(f"unknown oracle kind {kind!r}")
    return EXIT_OK


ORACLE_KINDS = ("gaussian-evolution", "strauss-rhs", "hartree-direct", "gaussian-integrals")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: config value or ./runs)")
    common.add_argument("--jobs", type=int, default=1, help="parallel bound evaluations in a sweep")
    common.add_argument("--strict-geometry", action="store_true", help="turn geometry skips into failures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="nlsdecay", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="run one experiment config")
    p.add_argument("path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="one trajectory, several eps values")
    p.add_argument("path")
    p.add_argument("--eps", required=True, help="comma-separated eps values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", parents=[common], help="print independent reference values")
    p.add_argument("kind", help=", ".join(ORACLE_KINDS))
    p.add_argument("--k", type=float, default=None, help="outer annulus factor (strauss-rhs)")
    p.add_argument("--kp", type=float, default=0.0, help="inner annulus factor (strauss-rhs)")
    p.add_argument("--t", type=float, default=0.0, help="time (gaussian-evolution)")
    p.add_argument("--x", default="0,1,2", help="comma-separated points (gaussian-evolution)")
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--n", type=int, default=64, help="nodes (hartree-direct)")
    p.add_argument("--length", type=float, default=16.0, help="box length (hartree-direct)")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        if not getattr(args, "func", None):
            raise UsageError("missing command (run, sweep or oracle)")
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - the exit-code contract is total
        print(f"numerical failure: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
