"""Flat binary field files: a short text header followed by raw node values.

Layout::

    NLSFIELD 1
    dims 256 256
    extents -20 20 -20 20
    boundary periodic
    dtype float64
    time 0
    end
    <row-major little-endian 64-bit floats; complex values interleave re, im>

Used for sampled potentials and kernels on input and for field snapshots
on output.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .grid import Field, Grid

MAGIC = "NLSFIELD 1"
_DTYPES = {"float64": np.dtype("<f8"), "complex128": np.dtype("<c16")}


def write_field(path: str | os.PathLike, field: Field) -> Path:
    path = Path(path)
    grid = field.grid
    values = np.asarray(field.values)
    dtype = "complex128" if np.iscomplexobj(values) else "float64"
    header = [
        MAGIC,
        "dims " + " ".join(str(n) for n in grid.points),
        "extents " + " ".join(repr(x) for ab in grid.extents for x in ab),
        f"boundary {grid.boundary.value}",
        f"dtype {dtype}",
        f"time {field.time!r}",
        "end",
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(values, dtype=_DTYPES[dtype]).tobytes(order="C"))
    return path


def read_header(fh) -> dict:
    first = fh.readline().decode("ascii").strip()
    if first != MAGIC:
        raise ValueError(f"not a field file (first line {first!r})")
    header: dict = {"boundary": "periodic", "dtype": "float64", "time": 0.0}
    while True:
        line = fh.readline().decode("ascii")
        if not line:
            raise ValueError("field file header is not terminated by 'end'")
        key, _, rest = line.strip().partition(" ")
        if key == "end":
            break
        if key == "dims":
            header["dims"] = tuple(int(v) for v in rest.split())
        elif key == "extents":
            vals = [float(v) for v in rest.split()]
            header["extents"] = tuple(zip(vals[0::2], vals[1::2]))
        elif key == "time":
            header["time"] = float(rest)
        elif key in ("boundary", "dtype"):
            header[key] = rest.strip()
        else:
            raise ValueError(f"unknown header key {key!r}")
    if "dims" not in header or "extents" not in header:
        raise ValueError("field file header needs 'dims' and 'extents'")
    if len(header["extents"]) != len(header["dims"]):
        raise ValueError("header extents do not match dims")
    if header["dtype"] not in _DTYPES:
        raise ValueError(f"unsupported dtype {header['dtype']!r}")
    return header


def read_array(path: str | os.PathLike) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        header = read_header(fh)
        raw = fh.read()
    dtype = _DTYPES[header["dtype"]]
    count = int(np.prod(header["dims"]))
    if len(raw) != count * dtype.itemsize:
        raise ValueError(f"expected {count * dtype.itemsize} data bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype=dtype).reshape(header["dims"])
    return header, data.astype(dtype.newbyteorder("="))


def read_field(path: str | os.PathLike, grid: Grid | None = None) -> Field:
    """Load a field; if ``grid`` is given the header must agree with it."""
    header, data = read_array(path)
    if grid is None:
        grid = Grid(header["extents"], header["dims"], header["boundary"])
    else:
        if tuple(header["dims"]) != grid.points:
            raise ValueError(f"file dims {header['dims']} do not match grid {grid.points}")
        if not np.allclose(np.asarray(header["extents"]), np.asarray(grid.extents), rtol=0, atol=1e-12):
            raise ValueError(f"file extents {header['extents']} do not match grid {grid.extents}")
    return Field(grid, data, header["time"])
