"""Scalar fields on boxes in R^n (n >= 3).

Two kinds of field are supported:

* :class:`AnalyticField` -- value/gradient/Hessian closures.  Closures must
  broadcast over leading axes: ``value(x)`` maps ``(..., n) -> (...)``,
  ``gradient`` maps to ``(..., n)`` and ``hessian`` to ``(..., n, n)``.
* :class:`GridField` -- a uniform tensor grid with spacing ``h`` whose values
  are stored row-major.  Derivatives are central differences at grid nodes.

Balls are realised as masked subsets of the grid (or of a lattice of spacing
``h`` centred on the ball centre for analytic fields).  Every sweep visits
nodes in row-major order, so reductions are deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize

from .errors import NonFinite, NonPositiveValue, OutOfDomain

# Target number of nodes handled per block in ball sweeps.
BLOCK_NODES = 2_000_000

SCHEMES = {"central-2": 1, "central-4": 2}


def check_dim(n: int) -> int:
    n = int(n)
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    return n


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def unit_ball_volume(n: int) -> float:
    return unit_sphere_area(n) / n


@dataclass(frozen=True)
class Box:
    origin: np.ndarray
    sides: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "sides", np.asarray(self.sides, dtype=float))
        if self.origin.shape != self.sides.shape:
            raise ValueError("origin and sides must have the same length")
        if np.any(self.sides <= 0):
            raise ValueError("box side lengths must be positive")

    @property
    def n(self) -> int:
        return self.origin.size

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.sides

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.origin + margin) and np.all(x <= self.upper - margin))


@dataclass(frozen=True)
class DerivativeBundle:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @property
    def n(self) -> int:
        return self.gradient.size


def _symmetrize(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + np.swapaxes(h, -1, -2))


class AnalyticField:
    """Field given by closed-form value, gradient and Hessian closures.

    ``radial`` optionally records ``(center, profile)`` when the field is a
    function of ``|x - center|`` only; :func:`ball_energy` then integrates
    in the radial variable, which resolves arbitrarily sharp peaks.
    """

    def __init__(self, n, value, gradient, hessian, jet=None, radial=None, label=""):
        self.n = check_dim(n)
        self.value = value
        self.gradient = gradient
        self.hessian = hessian
        self._jet = jet
        self.radial = radial
        self.label = label

    def __call__(self, pts) -> np.ndarray:
        return self.value(np.asarray(pts, dtype=float))

    def jet(self, pts):
        """Return ``(value, gradient, hessian)`` at ``pts`` of shape (..., n)."""
        pts = np.asarray(pts, dtype=float)
        if self._jet is not None:
            return self._jet(pts)
        return self.value(pts), self.gradient(pts), self.hessian(pts)

    def __repr__(self):
        return f"AnalyticField(n={self.n}, label={self.label!r})"


def radial_field(center, g, g1_over_r, g2, label="") -> AnalyticField:
    """Field ``x -> g(|x - center|)``.

    ``g1_over_r(r)`` must return g'(r)/r (finite at r = 0) and ``g2`` the
    second derivative; the Hessian is ``g1/r (I - e e^T) + g2 e e^T``.
    """
    c = np.asarray(center, dtype=float)
    n = c.size
    eye = np.eye(n)

    def jet(x):
        d = x - c
        r2 = np.einsum("...i,...i->...", d, d)
        r = np.sqrt(r2)
        a = g1_over_r(r)
        b = g2(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r2 > 0, (b - a) / np.where(r2 > 0, r2, 1.0), 0.0)
        grad = a[..., None] * d
        hess = a[..., None, None] * eye + w[..., None, None] * d[..., :, None] * d[..., None, :]
        return g(r), grad, hess

    def value(x):
        d = x - c
        return g(np.sqrt(np.einsum("...i,...i->...", d, d)))

    return AnalyticField(
        n,
        value,
        lambda x: jet(x)[1],
        lambda x: jet(x)[2],
        jet=jet,
        radial=(c, g),
        label=label,
    )


def constant_field(n: int, c: float) -> AnalyticField:
    n = check_dim(n)
    return AnalyticField(
        n,
        lambda x: np.full(x.shape[:-1], float(c)),
        lambda x: np.zeros(x.shape),
        lambda x: np.zeros(x.shape + (n,)),
        radial=(np.zeros(n), lambda r: np.full(np.shape(r), float(c))),
        label=f"const({c})",
    )


def sum_fields(*fields: AnalyticField) -> AnalyticField:
    n = fields[0].n

    def jet(x):
        parts = [f.jet(x) for f in fields]
        return tuple(sum(p[i] for p in parts) for i in range(3))

    return AnalyticField(
        n,
        lambda x: sum(f.value(x) for f in fields),
        lambda x: sum(f.gradient(x) for f in fields),
        lambda x: sum(f.hessian(x) for f in fields),
        jet=jet,
        label="+".join(f.label for f in fields),
    )


def scale_field(field: AnalyticField, c: float) -> AnalyticField:
    radial = None
    if field.radial is not None:
        center, g = field.radial
        radial = (center, lambda r: c * g(r))
    return AnalyticField(
        field.n,
        lambda x: c * field.value(x),
        lambda x: c * field.gradient(x),
        lambda x: c * field.hessian(x),
        jet=lambda x: tuple(c * t for t in field.jet(x)),
        radial=radial,
        label=f"{c}*{field.label}",
    )


def fd_jet(fn: Callable, x: np.ndarray, step: float):
    """Fourth-order central-difference jet of a vectorised value function."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    eye = np.eye(n) * step
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
    offs = np.arange(-2, 3)
    v0 = fn(x)
    grad = np.zeros(x.shape)
    hess = np.zeros(x.shape + (n,))
    for i in range(n):
        vals = [fn(x + k * eye[i]) for k in offs]
        grad[..., i] = sum(ci * vi for ci, vi in zip(c, vals)) / (12 * step)
        hess[..., i, i] = (-vals[4] + 16 * vals[3] - 30 * v0 + 16 * vals[1] - vals[0]) / (12 * step**2)
        for j in range(i + 1, n):
            acc = 0.0
            for a, ca in zip(offs, c):
                if ca == 0:
                    continue
                for b, cb in zip(offs, c):
                    if cb == 0:
                        continue
                    acc = acc + ca * cb * fn(x + a * eye[i] + b * eye[j])
            hess[..., i, j] = hess[..., j, i] = acc / (144 * step**2)
    return v0, grad, hess


def function_field(n: int, fn: Callable, step: float = 1e-3, label="") -> AnalyticField:
    """Field with a closed-form value and fourth-order FD derivatives."""
    n = check_dim(n)
    return AnalyticField(
        n,
        fn,
        lambda x: fd_jet(fn, x, step)[1],
        lambda x: fd_jet(fn, x, step)[2],
        jet=lambda x: fd_jet(fn, x, step),
        label=label,
    )


class GridField:
    """Uniform tensor grid with spacing ``h``.

    Node ``i = (i_1, ..., i_n)`` sits at ``origin + h * i``; ``values`` has
    shape ``dims`` in C (row-major) order.
    """

    def __init__(self, origin, h: float, values):
        self.origin = np.asarray(origin, dtype=float)
        self.h = float(h)
        self.values = np.ascontiguousarray(values, dtype=float)
        check_dim(self.origin.size)
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if self.values.ndim != self.origin.size:
            raise ValueError("values array rank must equal the dimension")
        if min(self.values.shape) < 2:
            raise ValueError("every axis needs at least two nodes")
        self._interp = None

    @classmethod
    def from_flat(cls, origin, h, dims: Sequence[int], flat) -> "GridField":
        flat = np.asarray(flat, dtype=float)
        if flat.size != int(np.prod(dims)):
            raise ValueError(f"array length {flat.size} != product of dims {tuple(dims)}")
        return cls(origin, h, flat.reshape(tuple(int(d) for d in dims)))

    @classmethod
    def from_function(cls, fn: Callable, origin, dims: Sequence[int], h: float) -> "GridField":
        """Sample a vectorised ``fn`` on the grid, slab by slab."""
        origin = np.asarray(origin, dtype=float)
        dims = tuple(int(d) for d in dims)
        out = np.empty(dims)
        axes = [origin[i] + h * np.arange(dims[i]) for i in range(len(dims))]
        per_slab = int(np.prod(dims[1:]))
        step = max(1, BLOCK_NODES // per_slab)
        for i0 in range(0, dims[0], step):
            i1 = min(dims[0], i0 + step)
            grids = np.meshgrid(axes[0][i0:i1], *axes[1:], indexing="ij")
            out[i0:i1] = fn(np.stack(grids, axis=-1))
        return cls(origin, h, out)

    @classmethod
    def centered(cls, fn: Callable, center, half_width: float, h: float) -> "GridField":
        """Grid on the cube ``center + [-half_width, half_width]^n``."""
        center = np.asarray(center, dtype=float)
        k = int(round(half_width / h))
        return cls.from_function(fn, center - k * h, [2 * k + 1] * center.size, h)

    @property
    def n(self) -> int:
        return self.origin.size

    @property
    def dims(self) -> tuple:
        return self.values.shape

    @property
    def box(self) -> Box:
        return Box(self.origin, self.h * (np.array(self.dims) - 1))

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + self.h * np.arange(self.dims[i])

    def node(self, idx) -> np.ndarray:
        return self.origin + self.h * np.asarray(idx, dtype=float)

    def nearest_index(self, x) -> tuple:
        idx = np.rint((np.asarray(x, dtype=float) - self.origin) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.dims)):
            raise OutOfDomain(f"point {x} is outside the grid box")
        return tuple(int(i) for i in idx)

    def __call__(self, pts) -> np.ndarray:
        """Multilinear interpolation of the node values."""
        pts = np.asarray(pts, dtype=float)
        box = self.box
        tol = 1e-9 * self.h
        if np.any(pts < box.origin - tol) or np.any(pts > box.upper + tol):
            raise OutOfDomain("interpolation point outside the grid box")
        if self._interp is None:
            axes = tuple(self.axis(i) for i in range(self.n))
            self._interp = RegularGridInterpolator(axes, self.values, method="linear")
        flat = np.clip(pts.reshape(-1, self.n), box.origin, box.upper)
        return self._interp(flat).reshape(pts.shape[:-1])

    def __repr__(self):
        return f"GridField(n={self.n}, dims={self.dims}, h={self.h})"


ScalarField = AnalyticField | GridField


# ---------------------------------------------------------------------------
# derivatives


def _central_derivatives(values, idx, h, width):
    n = values.ndim
    v0 = values[idx]
    grad = np.zeros(n)
    hess = np.zeros((n, n))

    def at(offset):
        return values[tuple(i + o for i, o in zip(idx, offset))]

    unit = np.eye(n, dtype=int)
    if width == 1:
        for i in range(n):
            vp, vm = at(unit[i]), at(-unit[i])
            grad[i] = (vp - vm) / (2 * h)
            hess[i, i] = (vp - 2 * v0 + vm) / h**2
            for j in range(i + 1, n):
                hess[i, j] = (
                    at(unit[i] + unit[j]) - at(unit[i] - unit[j])
                    - at(unit[j] - unit[i]) + at(-unit[i] - unit[j])
                ) / (4 * h**2)
    else:
        c = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
        for i in range(n):
            grad[i] = sum(ck * at(k * unit[i]) for k, ck in c.items()) / (12 * h)
            hess[i, i] = (
                -at(2 * unit[i]) + 16 * at(unit[i]) - 30 * v0 + 16 * at(-unit[i]) - at(-2 * unit[i])
            ) / (12 * h**2)
            for j in range(i + 1, n):
                hess[i, j] = sum(
                    ca * cb * at(a * unit[i] + b * unit[j]) for a, ca in c.items() for b, cb in c.items()
                ) / (144 * h**2)
    hess = np.triu(hess) + np.triu(hess, 1).T
    return v0, grad, hess


def derivatives(field: ScalarField, x, scheme: str = "central-2") -> DerivativeBundle:
    """Value, gradient and symmetrised Hessian of ``field`` at ``x``.

    Analytic fields use their closures.  Grid fields are differentiated at
    the node nearest ``x`` with a central stencil that must fit inside the
    grid (one node of clearance for central-2, two for central-4); there are
    no one-sided stencils.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(field, AnalyticField):
        v, g, hs = field.jet(x)
        v = float(v)
        if not (np.isfinite(v) and np.all(np.isfinite(g)) and np.all(np.isfinite(hs))):
            raise NonFinite(f"non-finite derivatives at {x}")
        return DerivativeBundle(v, np.array(g, dtype=float), _symmetrize(np.array(hs, dtype=float)))
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {sorted(SCHEMES)}")
    width = SCHEMES[scheme]
    idx = field.nearest_index(x)
    dims = np.array(field.dims)
    if np.any(np.array(idx) < width) or np.any(np.array(idx) > dims - 1 - width):
        raise OutOfDomain(f"{scheme} stencil at {x} leaves the grid box")
    sl = tuple(slice(i - width, i + width + 1) for i in idx)
    if not np.all(np.isfinite(field.values[sl])):
        raise NonFinite(f"non-finite grid values in the stencil at {x}")
    v, g, hs = _central_derivatives(field.values, idx, field.h, width)
    return DerivativeBundle(float(v), g, hs)


def grid_jet(field: GridField, scheme: str = "central-2"):
    """Central-difference jet at every node with a full stencil.

    Returns ``(slices, value, gradient, hessian)`` where ``slices`` selects
    the interior block of the grid the arrays refer to.
    """
    width = SCHEMES[scheme]
    vals = field.values
    n, h = field.n, field.h
    dims = vals.shape
    inner = tuple(slice(width, d - width) for d in dims)

    def shifted(offset):
        return vals[tuple(slice(width + o, d - width + o) for o, d in zip(offset, dims))]

    unit = np.eye(n, dtype=int)
    v0 = vals[inner]
    grad = np.empty(v0.shape + (n,))
    hess = np.empty(v0.shape + (n, n))
    if width == 1:
        for i in range(n):
            vp, vm = shifted(unit[i]), shifted(-unit[i])
            grad[..., i] = (vp - vm) / (2 * h)
            hess[..., i, i] = (vp - 2 * v0 + vm) / h**2
            for j in range(i + 1, n):
                hess[..., i, j] = hess[..., j, i] = (
                    shifted(unit[i] + unit[j]) - shifted(unit[i] - unit[j])
                    - shifted(unit[j] - unit[i]) + shifted(-unit[i] - unit[j])
                ) / (4 * h**2)
    else:
        c = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
        for i in range(n):
            grad[..., i] = sum(ck * shifted(k * unit[i]) for k, ck in c.items()) / (12 * h)
            hess[..., i, i] = (
                -shifted(2 * unit[i]) + 16 * shifted(unit[i]) - 30 * v0
                + 16 * shifted(-unit[i]) - shifted(-2 * unit[i])
            ) / (12 * h**2)
            for j in range(i + 1, n):
                hess[..., i, j] = hess[..., j, i] = sum(
                    ca * cb * shifted(a * unit[i] + b * unit[j])
                    for a, ca in c.items()
                    for b, cb in c.items()
                ) / (144 * h**2)
    return inner, v0, grad, hess


# ---------------------------------------------------------------------------
# ball sweeps


@dataclass
class Block:
    """A rectangular block of sample nodes with squared distances to a centre."""

    axes: list
    dist2: np.ndarray
    values: np.ndarray

    def points(self, mask=None) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        pts = np.stack(grids, axis=-1)
        return pts if mask is None else pts[mask]

    def point_at(self, flat_index: int) -> np.ndarray:
        idx = np.unravel_index(flat_index, self.dist2.shape)
        return np.array([ax[i] for ax, i in zip(self.axes, idx)])


def _dist2(axes, center):
    out = None
    for i, ax in enumerate(axes):
        shape = [1] * len(axes)
        shape[i] = ax.size
        term = ((ax - center[i]) ** 2).reshape(shape)
        out = term if out is None else out + term
    return out


def default_lattice_step(radius: float) -> float:
    return radius / 32.0


def ball_blocks(field: ScalarField, center, radius: float, h: float | None = None) -> Iterator[Block]:
    """Yield blocks covering the ball's bounding box.

    Grid fields: the grid nodes (clipped to the box).  Analytic fields: the
    lattice ``center + h Z^n`` (``h`` defaults to ``radius / 32``).
    """
    center = np.asarray(center, dtype=float)
    n = center.size
    if isinstance(field, GridField):
        lo = np.maximum(np.ceil((center - radius - field.origin) / field.h - 1e-9), 0).astype(int)
        hi = np.minimum(np.floor((center + radius - field.origin) / field.h + 1e-9), np.array(field.dims) - 1).astype(int)
        if np.any(hi < lo):
            return
        axes = [field.axis(i)[lo[i] : hi[i] + 1] for i in range(n)]
        per_slab = int(np.prod([a.size for a in axes[1:]]))
        step = max(1, BLOCK_NODES // per_slab)
        for a0 in range(0, axes[0].size, step):
            a1 = min(axes[0].size, a0 + step)
            sub_axes = [axes[0][a0:a1]] + axes[1:]
            sl = (slice(lo[0] + a0, lo[0] + a1),) + tuple(slice(lo[i], hi[i] + 1) for i in range(1, n))
            yield Block(sub_axes, _dist2(sub_axes, center), field.values[sl])
        return
    if h is None:
        h = default_lattice_step(radius)
    k = int(math.floor(radius / h + 1e-9))
    offs = h * np.arange(-k, k + 1)
    axes = [center[i] + offs for i in range(n)]
    per_slab = offs.size ** (n - 1)
    step = max(1, BLOCK_NODES // per_slab)
    for a0 in range(0, offs.size, step):
        a1 = min(offs.size, a0 + step)
        sub_axes = [axes[0][a0:a1]] + axes[1:]
        d2 = _dist2(sub_axes, center)
        grids = np.meshgrid(*sub_axes, indexing="ij")
        vals = field.value(np.stack(grids, axis=-1))
        yield Block(sub_axes, d2, vals)


def in_ball(dist2: np.ndarray, radius: float) -> np.ndarray:
    return dist2 <= radius * radius * (1 + 1e-12)


def exclusion_mask(block: Block, exclude) -> np.ndarray | None:
    """True where a node lies inside one of the (open) excluded balls."""
    out = None
    for c, r in exclude:
        m = _dist2(block.axes, np.asarray(c, dtype=float)) < r * r
        out = m if out is None else (out | m)
    return out


def argmax_on_ball(field: ScalarField, center, radius: float, h: float | None = None, exclude=(), refine: bool = True):
    """Maximise ``field`` over a ball (minus optional open balls ``exclude``).

    Grid fields return the best node; ties go to the lexicographically
    smallest coordinates.  Analytic fields scan a lattice of spacing ``h``
    and then polish the best node with a constrained local search; the
    polished point is kept only if it strictly improves the value.
    """
    center = np.asarray(center, dtype=float)
    best_val = -np.inf
    best_pt = None
    for blk in ball_blocks(field, center, radius, h):
        mask = in_ball(blk.dist2, radius)
        ex = exclusion_mask(blk, exclude)
        if ex is not None:
            mask = mask & ~ex
        if not mask.any():
            continue
        masked = np.where(mask, blk.values, -np.inf)
        i = int(np.argmax(masked))
        if masked.flat[i] > best_val:
            best_val = float(masked.flat[i])
            best_pt = blk.point_at(i)
    if best_pt is None:
        raise OutOfDomain("ball has no sample nodes inside the domain")
    if refine and isinstance(field, AnalyticField) and not exclude:
        best_pt, best_val = _polish_max(field, center, radius, best_pt, best_val)
    return best_pt, best_val


def _polish_max(field, center, radius, x0, v0):
    def neg(x):
        return -float(field.value(x))

    def neg_grad(x):
        return -np.asarray(field.gradient(x), dtype=float)

    cons = {"type": "ineq", "fun": lambda x: radius**2 - np.sum((x - center) ** 2), "jac": lambda x: -2 * (x - center)}
    try:
        res = minimize(neg, x0, jac=neg_grad, constraints=[cons], method="SLSQP", options={"ftol": 1e-15, "maxiter": 200})
    except (ValueError, FloatingPointError):
        return x0, v0
    if res.success and np.sum((res.x - center) ** 2) <= radius**2 * (1 + 1e-12) and -res.fun > v0:
        return np.asarray(res.x), float(-res.fun)
    return x0, v0


def _radial_energy(g, radius, p, n, nodes=20001):
    """Simpson's rule in ``ln r`` on a geometric mesh, plus the tiny core ball."""
    r = np.geomspace(radius * 1e-12, radius, nodes)
    vals = g(r)
    if np.any(vals <= 0):
        raise NonPositiveValue("field must be positive for energy integrals")
    core = unit_ball_volume(n) * r[0] ** n * float(g(np.array([0.0]))[0]) ** p
    return float(unit_sphere_area(n) * simpson(vals**p * r**n, x=np.log(r)) + core)


def ball_energy(field: ScalarField, center, radius: float, p: float, h: float | None = None) -> float:
    """Midpoint-rule integral of ``field**p`` over a ball.

    Grid fields: each node in the ball stands for its cell of volume h^n;
    the ball may overhang the box by at most one cell layer (the overhang is
    simply not counted).  Analytic radial fields centred at ``center`` are
    integrated on a graded radial midpoint mesh; other analytic fields on a
    lattice of spacing ``h``.
    """
    if p <= 0:
        raise ValueError("exponent must be positive")
    center = np.asarray(center, dtype=float)
    if isinstance(field, GridField):
        box = field.box
        if np.any(center - radius < box.origin - field.h * 1.000001) or np.any(center + radius > box.upper + field.h * 1.000001):
            raise OutOfDomain("ball exits the grid box by more than one cell")
        cell = field.h**field.n
    else:
        if field.radial is not None and np.allclose(field.radial[0], center, atol=1e-14):
            return _radial_energy(field.radial[1], radius, p, field.n)
        if h is None:
            h = radius / 40.0
        cell = h**field.n
    total = 0.0
    for blk in ball_blocks(field, center, radius, h):
        mask = in_ball(blk.dist2, radius)
        vals = blk.values[mask]
        if vals.size == 0:
            continue
        if np.any(vals <= 0):
            raise NonPositiveValue("field must be positive for energy integrals")
        total += float(np.sum(vals**p))
    return total * cell


def shell_energies(field: ScalarField, center, edges, p: float, h: float | None = None) -> np.ndarray:
    """Midpoint-rule energies of ``field**p`` on the shells ``edges[j] < |x - c| <= edges[j+1]``."""
    edges = np.asarray(edges, dtype=float)
    out = np.zeros(edges.size - 1)
    cell = (field.h if isinstance(field, GridField) else h) ** field.n
    e2 = edges**2 * (1 + 1e-12)  # same boundary tolerance as in_ball
    for blk in ball_blocks(field, center, edges[-1], h):
        d2 = blk.dist2.ravel()
        sel = (d2 > e2[0]) & (d2 <= e2[-1])
        if not sel.any():
            continue
        idx = np.searchsorted(e2, d2[sel], side="left") - 1
        vals = blk.values.ravel()[sel]
        out += np.bincount(np.clip(idx, 0, out.size - 1), weights=vals**p, minlength=out.size)
    return out * cell


def ball_values(field: ScalarField, center, radius: float, h: float | None = None, exclude=()):
    """Points and values of every sample node in a ball (minus ``exclude``)."""
    pts, vals = [], []
    for blk in ball_blocks(field, center, radius, h):
        mask = in_ball(blk.dist2, radius)
        ex = exclusion_mask(blk, exclude)
        if ex is not None:
            mask = mask & ~ex
        if mask.any():
            pts.append(blk.points(mask))
            vals.append(blk.values[mask])
    if not pts:
        return np.zeros((0, np.asarray(center).size)), np.zeros(0)
    return np.concatenate(pts), np.concatenate(vals)
