"""Grid file formats: binary CGF1 and plain CSV."""
from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .fields import GridField

_HEADER = re.compile(r"^CGF1 n=(\d+) dims=([^ ]+) origin=([^ ]+) h=([^ ]+)$")


def _fmt(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def cgf1_header(grid: GridField) -> str:
    dims = ",".join(str(d) for d in grid.dims)
    return f"CGF1 n={grid.n} dims={dims} origin={_fmt(grid.origin)} h={float(grid.h)!r}"


def write_cgf1(path, grid: GridField) -> None:
    """Header line, newline, then row-major little-endian float64 values."""
    with open(path, "wb") as fh:
        fh.write((cgf1_header(grid) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes(order="C"))


def read_cgf1(path) -> GridField:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ValueError("CGF1 file has no header line")
    m = _HEADER.match(raw[:nl].decode("ascii", errors="replace").strip())
    if m is None:
        raise ValueError("malformed CGF1 header")
    n = int(m.group(1))
    dims = [int(d) for d in m.group(2).split(",")]
    origin = [float(o) for o in m.group(3).split(",")]
    h = float(m.group(4))
    if len(dims) != n or len(origin) != n:
        raise ValueError("CGF1 header dims/origin length does not match n")
    flat = np.frombuffer(raw[nl + 1 :], dtype="<f8")
    return GridField.from_flat(origin, h, dims, flat.astype(float))


def write_csv(path, grid: GridField) -> None:
    """One row per node: coordinates then value, in row-major node order."""
    if grid.n > 3:
        raise ValueError("CSV export supports n <= 3")
    axes = [grid.axis(i) for i in range(grid.n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, grid.n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(grid.n)] + ["value"])
        for p, v in zip(pts, grid.values.ravel()):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v))])


def read_csv(path) -> GridField:
    """Inverse of :func:`write_csv`; nodes must form a full uniform grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = data.shape[1] - 1
    axes = [np.unique(data[:, i]) for i in range(n)]
    dims = [a.size for a in axes]
    if int(np.prod(dims)) != data.shape[0]:
        raise ValueError("CSV nodes do not form a full tensor grid")
    steps = np.concatenate([np.diff(a) for a in axes])
    h = float(np.mean(steps))
    if not np.allclose(steps, h, rtol=1e-9, atol=0):
        raise ValueError("CSV grid spacing is not uniform")
    order = np.lexsort(tuple(data[:, i] for i in reversed(range(n))))
    values = data[order, n]
    return GridField.from_flat([a[0] for a in axes], h, dims, values)


def write_profile_csv(path, columns: dict) -> None:
    names = list(columns)
    rows = zip(*(np.asarray(columns[k], dtype=float) for k in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
