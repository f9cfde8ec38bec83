"""Green's function lower bounds on annuli and superharmonic minimum estimates.

The Dirichlet Green's function of ``A = B_R minus closed B_rho`` is

    G(x, y) = (|x - y|^(2-n) - h(x, y)) / ((n-2) |S^(n-1)|)

with ``h(., y)`` harmonic and equal to ``|x - y|^(2-n)`` on both spheres.
``h`` is estimated by walk on spheres started at ``y``, with the closed-form
ball correction ``h_B`` as a control variate: ``h - h_B`` vanishes on the
outer sphere, so only walks absorbed on the inner sphere contribute.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import quad
from scipy.sparse.linalg import cg
from scipy.special import eval_legendre

from .errors import BudgetExceeded, NegativeSource, OutOfDomain
from .fields import GridField, check_dim, unit_sphere_area

WALKS = 10_000
SHELL = 1e-4
MAX_STEPS = 100_000


@dataclass(frozen=True)
class AnnulusSpec:
    rho: float
    rho0: float
    rho1: float
    rho2: float
    n: int = 3

    def __post_init__(self):
        check_dim(self.n)
        if not (0 < 2 * self.rho < self.rho0 < self.rho1 < self.rho2 < 1):
            raise ValueError("need 0 < 2 rho < rho0 < rho1 < rho2 < 1")

    def factor(self, y) -> np.ndarray:
        """``1 - rho^(n-2)/|y|^(n-2)``."""
        r = np.linalg.norm(np.atleast_2d(y), axis=1)
        return 1.0 - (self.rho / r) ** (self.n - 2)

    def to_dict(self) -> dict:
        return {"n": self.n, "rho": self.rho, "rho0": self.rho0, "rho1": self.rho1, "rho2": self.rho2}


def green_normalizer(n: int) -> float:
    """``n (n-2) |B_1| = (n-2) |S^(n-1)|``."""
    return (n - 2) * unit_sphere_area(n)


def ball_correction(x, y, n: int, R: float = 1.0) -> np.ndarray:
    """Harmonic part of the Dirichlet Green's function of ``B_R``; rows ``x``, columns ``y``."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    xx = np.sum(x * x, axis=1)[:, None]
    yy = np.sum(y * y, axis=1)[None, :]
    return (xx * yy / R**2 - 2 * x @ y.T + R**2) ** ((2 - n) / 2)


def _kernel(x, y, n):
    d = np.linalg.norm(np.atleast_2d(x)[:, None, :] - np.atleast_2d(y)[None, :, :], axis=2)
    return d ** (2 - n)


# ---------------------------------------------------------------------------
# walk on spheres


def inner_exits(y, rho: float, R: float, walks: int, shell: float, rng: np.random.Generator) -> np.ndarray:
    """Walk on spheres from ``y`` in ``rho < |p| < R``.

    Returns the projected exit points of walks absorbed on the inner sphere,
    one row per walk, with NaN rows for walks absorbed on the outer sphere.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    p = np.tile(y, (walks, 1))
    out = np.full((walks, n), np.nan)
    alive = np.arange(walks)
    for _ in range(MAX_STEPS):
        if alive.size == 0:
            return out
        q = p[alive]
        r = np.linalg.norm(q, axis=1)
        d_in = r - rho
        d_out = R - r
        d = np.minimum(d_in, d_out)
        stop = d < shell
        hit_in = stop & (d_in <= d_out)
        out[alive[hit_in]] = q[hit_in] * (rho / r[hit_in])[:, None]
        alive, q, d = alive[~stop], q[~stop], d[~stop]
        step = rng.standard_normal(q.shape)
        step /= np.linalg.norm(step, axis=1, keepdims=True)
        p[alive] = q + d[:, None] * step
    raise BudgetExceeded("walk on spheres did not terminate")


@dataclass
class GreenEstimate:
    spec: AnnulusSpec
    x: np.ndarray
    y: np.ndarray
    G: np.ndarray
    stderr: np.ndarray
    c: float
    worst: dict
    floor: float
    walks: int
    method: str

    @property
    def ratios(self) -> np.ndarray:
        return self.G / self.spec.factor(self.y)[None, :]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "method": self.method,
            "walks": self.walks,
            "samples": [int(len(self.x)), int(len(self.y))],
            "c": self.c,
            "floor": self.floor,
            "worst": self.worst,
            "min_G": float(np.min(self.G)),
            "max_rel_stderr": float(np.max(self.stderr / self.G)),
        }


def green_wos(x, y, n: int, rho: float, R: float = 1.0, walks: int = WALKS, shell: float = SHELL, seed: int = 0, budget: float | None = None, max_rounds: int = 16):
    """WoS estimates of ``G(x_i, y_j)`` on ``B_R minus B_rho``.

    Returns ``(G, stderr, walks used per y)``.  With ``budget`` set, batches
    of ``walks`` are added for a given ``y`` (at most ``max_rounds``) until
    every relative standard error is within it.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    norm = green_normalizer(n)
    G = np.empty((len(x), len(y)))
    se = np.empty_like(G)
    kern = _kernel(x, y, n)
    hb = ball_correction(x, y, n, R)
    used = np.empty(len(y), dtype=int)
    for j, yj in enumerate(y):
        rng = np.random.default_rng([seed, j])
        chunks = []
        while True:
            z = inner_exits(yj, rho, R, walks, shell, rng)
            hit = ~np.isnan(z[:, 0])
            F = np.zeros((walks, len(x)))
            if hit.any():
                zh = z[hit]
                F[hit] = _kernel(zh, x, n) - ball_correction(zh, x, n, R)
            chunks.append(F)
            F = np.concatenate(chunks)
            G[:, j] = (kern[:, j] - hb[:, j] - F.mean(axis=0)) / norm
            se[:, j] = F.std(axis=0, ddof=1) / np.sqrt(len(F)) / norm
            if budget is None or len(chunks) >= max_rounds or np.all(se[:, j] <= budget * np.abs(G[:, j])):
                break
        used[j] = len(F)
    return G, se, used


def green_series_n3(x, y, rho: float, lmax: int = 4000, tol: float = 1e-16) -> np.ndarray:
    """Exact ``G(x, y)`` on ``B_1 minus B_rho`` for n = 3 by Legendre expansion."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != 3:
        raise ValueError("series oracle is three-dimensional")
    G = np.empty((len(x), len(y)))
    for i, xi in enumerate(x):
        rx = np.linalg.norm(xi)
        for j, yj in enumerate(y):
            ry = np.linalg.norm(yj)
            cos = float(np.clip(xi @ yj / (rx * ry), -1, 1))
            h, prev = 0.0, np.inf
            for ell in range(lmax):
                q = rho ** (2 * ell + 1)
                B = q * (rx ** (-ell - 1) - rx**ell) / (1 - q)
                A = rx**ell - B
                term = (A * ry**ell + B * ry ** (-ell - 1)) * eval_legendre(ell, cos)
                h += term
                if abs(term) < tol and abs(prev) < tol:
                    break
                prev = term
            G[i, j] = (1.0 / np.linalg.norm(xi - yj) - h) / (4 * np.pi)
    return G


def default_samples(spec: AnnulusSpec, seed: int = 0):
    """Points ``x`` in the shell ``rho1 <= |x| <= rho2`` and ``y`` in ``rho <= |y| <= rho0``.

    The last ``y`` radius is ``rho0`` itself, where the positive floor is read.
    """
    rng = np.random.default_rng(seed)
    n = spec.n

    def dirs(k):
        d = rng.standard_normal((k, n))
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    rx = np.repeat(np.linspace(spec.rho1, spec.rho2, 4), 3)
    x = rx[:, None] * dirs(rx.size)
    t = np.array([0.02, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0])
    ry = np.repeat(spec.rho + (spec.rho0 - spec.rho) * t, 2)
    y = ry[:, None] * dirs(ry.size)
    return x, y


def green_estimate(spec: AnnulusSpec, x=None, y=None, walks: int = WALKS, shell: float = SHELL, seed: int = 0, method: str = "wos", budget: float = 0.05) -> GreenEstimate:
    """Sampled Green's function with the fitted lower-bound constant.

    ``c`` is the largest constant with ``G >= c (1 - rho^(n-2)/|y|^(n-2))``
    on the samples; ``floor`` is ``min G`` over samples with ``|y| = rho0``
    (over the outermost ``y`` samples when none sit on that sphere).
    """
    if x is None or y is None:
        dx, dy = default_samples(spec, seed)
        x = dx if x is None else x
        y = dy if y is None else y
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    rx = np.linalg.norm(x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    eps = 1e-12
    if np.any(rx < spec.rho1 - eps) or np.any(rx > spec.rho2 + eps):
        raise OutOfDomain("x samples must satisfy rho1 <= |x| <= rho2")
    if np.any(ry <= spec.rho) or np.any(ry > spec.rho0 + eps):
        raise OutOfDomain("y samples must satisfy rho < |y| <= rho0")
    if method == "wos":
        G, se, used = green_wos(x, y, spec.n, spec.rho, 1.0, walks, shell, seed, budget)
        walks = int(used.max())
        bad = se > budget * np.abs(G)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise BudgetExceeded(f"relative standard error {se[i, j] / abs(G[i, j]):.3g} exceeds {budget} at pair ({i}, {j})")
    elif method == "series":
        if spec.n != 3:
            raise ValueError("series method needs n = 3")
        G = green_series_n3(x, y, spec.rho)
        se = np.zeros_like(G)
        walks = 0
    else:
        raise ValueError(f"unknown method {method!r}")
    ratio = G / spec.factor(y)[None, :]
    i, j = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    on_rho0 = np.abs(ry - spec.rho0) <= 1e-9 * spec.rho0
    if not on_rho0.any():
        on_rho0 = ry == ry.max()
    return GreenEstimate(
        spec,
        x,
        y,
        G,
        se,
        float(ratio[i, j]),
        {"x": x[i].tolist(), "y": y[j].tolist(), "G": float(G[i, j]), "ratio": float(ratio[i, j])},
        float(np.min(G[:, on_rho0])),
        walks,
        method,
    )


# ---------------------------------------------------------------------------
# superharmonic minimum estimates


@dataclass(frozen=True)
class MinBound:
    inf_shell: float
    integral: float
    ratio: float
    min_value: float
    method: str

    def to_dict(self) -> dict:
        return {
            "inf_shell": self.inf_shell,
            "integral": self.integral,
            "ratio": self.ratio,
            "min_value": self.min_value,
            "method": self.method,
        }


def _ratio(inf, integral):
    return inf / integral if integral > 0 else float("nan")


def radial_solution(f, n: int, inner: float, outer: float, r, breaks=()):
    """Exact radial solution of ``-Lap v = f(|y|)``, zero on ``|y| = inner`` and ``|y| = outer``.

    ``inner = 0`` gives the ball problem.  ``breaks`` lists radii where ``f``
    jumps, passed to the quadrature.
    """
    check_dim(n)
    m = n - 2

    def b(t):
        return (t ** (-m) - outer ** (-m)) / m

    pts = sorted(set(float(p) for p in breaks if inner < p < outer))
    out = []
    if inner == 0:
        for ri in np.atleast_1d(r):
            lo = quad(lambda s: f(s) * s ** (n - 1), 0, ri, points=[p for p in pts if p < ri] or None, limit=200)[0]
            hi = quad(lambda s: b(s) * f(s) * s ** (n - 1), ri, outer, points=[p for p in pts if p > ri] or None, limit=200)[0]
            out.append(b(ri) * lo + hi)
        return np.array(out)

    def a(t):
        return (inner ** (-m) - t ** (-m)) / m

    W = a(outer)
    for ri in np.atleast_1d(r):
        lo = quad(lambda s: a(s) * f(s) * s ** (n - 1), inner, ri, points=[p for p in pts if p < ri] or None, limit=200)[0]
        hi = quad(lambda s: b(s) * f(s) * s ** (n - 1), ri, outer, points=[p for p in pts if p > ri] or None, limit=200)[0]
        out.append((b(ri) * lo + a(ri) * hi) / W)
    return np.array(out)


def _check_radial_source(f, lo, hi, n_check=2001):
    s = np.linspace(lo, hi, n_check)
    if np.min([f(si) for si in s]) < 0:
        raise NegativeSource("source must be nonnegative")


def superharmonic_min_bound(spec: AnnulusSpec, f, R: float = 1.0, breaks=(), h: float | None = None) -> MinBound:
    """Solve ``-Lap v = f`` on ``B_R minus B_(rho R)`` and compare the shell infimum with the weighted integral.

    ``f`` is a radial profile ``f(r)`` (exact quadrature, any n) or, for
    n = 3, a :class:`GridField` (finite-difference solve).  All radii of
    ``spec`` are scaled by ``R``.  The reported ratio is
    ``R^(n-2) inf_shell v / integral of (1 - (rho R)^(n-2)/|y|^(n-2)) f``,
    which does not depend on ``R`` when the source is rescaled as
    ``R^(-n) f(y/R)``.
    """
    n = spec.n
    inner, outer = spec.rho * R, R
    if isinstance(f, GridField):
        return _fd_bound(spec, f, R, inner)
    _check_radial_source(f, inner, outer)
    shell = np.linspace(spec.rho1 * R, spec.rho2 * R, 201)
    v = radial_solution(f, n, inner, outer, shell, breaks)
    grid = np.linspace(inner, outer, 101)[1:-1]
    vmin = float(min(0.0, np.min(radial_solution(f, n, inner, outer, grid, breaks))))
    pts = [p for p in breaks if inner < p < outer] or None
    weight = quad(lambda s: (1 - (inner / s) ** (n - 2)) * f(s) * s ** (n - 1), inner, outer, points=pts, limit=200)[0]
    integral = unit_sphere_area(n) * weight
    inf = float(np.min(v))
    return MinBound(inf, integral, _ratio(R ** (n - 2) * inf, integral), vmin, "radial-exact")


def superharmonic_ball_bound(f, rho0: float, rho1: float, rho2: float, n: int = 3, breaks=(), h: float | None = None) -> MinBound:
    """Ball version: ``-Lap v = f`` on ``B_1``, ``v = 0`` on the boundary.

    Ratio is ``inf_{rho1 <= |x| <= rho2} v`` over ``integral_{|y| <= rho0} f``.
    """
    if not (0 < rho0 < rho1 < rho2 < 1):
        raise ValueError("need 0 < rho0 < rho1 < rho2 < 1")
    if isinstance(f, GridField):
        return _fd_bound(AnnulusSpec(rho0 / 4, rho0, rho1, rho2, 3), f, 1.0, 0.0)
    _check_radial_source(f, 0.0, 1.0)
    shell = np.linspace(rho1, rho2, 201)
    v = radial_solution(f, n, 0.0, 1.0, shell, breaks)
    grid = np.linspace(0, 1, 101)[1:-1]
    vmin = float(min(0.0, np.min(radial_solution(f, n, 0.0, 1.0, grid, breaks))))
    pts = [p for p in breaks if 0 < p < rho0] or None
    integral = unit_sphere_area(n) * quad(lambda s: f(s) * s ** (n - 1), 0, rho0, points=pts, limit=200)[0]
    inf = float(np.min(v))
    return MinBound(inf, integral, _ratio(inf, integral), vmin, "radial-exact")


def fd_poisson(f: GridField, inner: float, outer: float):
    """7-point finite-difference solve of ``-Lap v = f`` on ``inner < |y| < outer`` (n = 3).

    Nodes outside the open annulus carry the Dirichlet value 0.  Returns the
    solution as a :class:`GridField` on the same nodes.
    """
    if f.n != 3:
        raise ValueError("finite-difference solves are three-dimensional")
    vals = np.asarray(f.values, dtype=float)
    if np.min(vals) < 0:
        raise NegativeSource("source must be nonnegative")
    h = f.h
    axes = [f.axis(i) for i in range(3)]
    X = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(c * c for c in X))
    inside = (r > inner) & (r < outer)
    inside[[0, -1], :, :] = inside[:, [0, -1], :] = inside[:, :, [0, -1]] = False
    idx = -np.ones(inside.shape, dtype=np.int64)
    idx[inside] = np.arange(int(inside.sum()))
    N = int(inside.sum())
    rows, cols, data = [np.arange(N)], [np.arange(N)], [np.full(N, 6.0)]
    where = np.argwhere(inside)
    for ax in range(3):
        for s in (-1, 1):
            nb = where.copy()
            nb[:, ax] += s
            j = idx[nb[:, 0], nb[:, 1], nb[:, 2]]
            ok = j >= 0
            rows.append(np.arange(N)[ok])
            cols.append(j[ok])
            data.append(np.full(int(ok.sum()), -1.0))
    A = sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    rhs = h * h * vals[inside]
    sol, info = cg(A, rhs, rtol=1e-10, maxiter=20_000)
    if info != 0:
        raise BudgetExceeded("conjugate gradients did not converge")
    out = np.zeros_like(vals)
    out[inside] = sol
    return GridField(f.origin, h, out), r


def _fd_bound(spec: AnnulusSpec, f: GridField, R: float, inner: float) -> MinBound:
    n = 3
    v, r = fd_poisson(f, inner, R)
    shell = (r >= spec.rho1 * R) & (r <= spec.rho2 * R)
    inf = float(np.min(v.values[shell]))
    vals = np.asarray(f.values)
    if inner > 0:
        with np.errstate(divide="ignore"):
            w = np.where(r > inner, 1 - (inner / r) ** (n - 2), 0.0)
        w = np.where(r < R, w, 0.0)
        integral = float(np.sum(w * vals) * f.h**n)
        ratio = _ratio(R ** (n - 2) * inf, integral)
    else:
        integral = float(np.sum(np.where(r <= spec.rho0, vals, 0.0)) * f.h**n)
        ratio = _ratio(inf, integral)
    return MinBound(inf, integral, ratio, float(min(0.0, np.min(v.values))), "fd-7pt")


def annulus_ratio_closed_form(spec: AnnulusSpec) -> float:
    """Shell-infimum ratio for any radial source supported in ``rho <= |y| <= rho0``.

    Equals ``b(rho2) / ((1 - rho^(n-2)) |S^(n-1)|)`` with
    ``b(t) = (t^(2-n) - 1)/(n-2)``.
    """
    n = spec.n
    b = (spec.rho2 ** (2 - n) - 1) / (n - 2)
    return b / ((1 - spec.rho ** (n - 2)) * unit_sphere_area(n))
