"""Radial shooting for entire solutions ``f(lambda(A^v)) = 1``.

For ``v(x) = v(|x|)`` the conformal Hessian at ``r e_1`` is diagonal with a
radial eigenvalue (multiplicity one)

    lam_r = -2/(n-2) v^(-(n+2)/(n-2)) v'' + 2(n-1)/(n-2)^2 v^(-2n/(n-2)) v'^2

and a tangential one (multiplicity n-1)

    lam_t = -2/(n-2) v^(-(n+2)/(n-2)) v'/r - 2/(n-2)^2 v^(-2n/(n-2)) v'^2.

Each right-hand-side evaluation solves ``f(lam_r, lam_t, ..., lam_t) = 1``
for ``lam_r`` (f is increasing in every entry) and recovers ``v''``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ..cones import OperatorSpec
from ..errors import ConeExit, RootFail
from ..fields import AnalyticField, radial_field


def radial_eigenvalues(n: int, r, v, dv, d2v):
    """On-axis eigenvalues ``(lam_r, lam_t)`` of the conformal Hessian of a radial field."""
    a = -2.0 / (n - 2) * v ** (-(n + 2) / (n - 2))
    b = v ** (-2.0 * n / (n - 2)) / (n - 2) ** 2
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        dv_r = np.where(r > 0, dv / np.where(r > 0, r, 1.0), d2v)
    lam_r = a * d2v + 2.0 * (n - 1) * b * dv**2
    lam_t = a * dv_r - 2.0 * b * dv**2
    return lam_r, lam_t


def _solve_radial(op: OperatorSpec, n: int, lam_t: float) -> float:
    """The radial eigenvalue with ``f(lam_r, lam_t, ...) = 1``."""
    tail = np.full(n - 1, lam_t)

    def F(x):
        lam = np.concatenate([[x], tail])
        if not op.contains(lam):
            return -1.0
        return op(lam) - 1.0

    scale = max(1.0, abs(lam_t))
    lo, hi = lam_t, lam_t
    f_lo = f_hi = F(lam_t)
    step = scale
    for _ in range(200):
        if f_hi >= 0:
            break
        hi = hi + step
        f_hi = F(hi)
        step *= 2
    else:
        raise RootFail("no radial eigenvalue reaches f = 1")
    step = scale
    for _ in range(200):
        if f_lo < 0:
            break
        lo = lo - step
        f_lo = F(lo)
        step *= 2
    else:
        raise RootFail("no lower bracket for the radial eigenvalue")
    if f_hi == 0:
        return hi
    root = brentq(F, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    lam = np.concatenate([[root], tail])
    if not op.contains(lam):
        raise RootFail("radial eigenvalue root lies on the cone boundary")
    return root


@dataclass
class RadialProfile:
    n: int
    v0: float
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    d2v: np.ndarray
    lam_r: np.ndarray
    lam_t: np.ndarray
    residual: np.ndarray
    stop_reason: str
    solution: object = None
    op: OperatorSpec | None = None

    def columns(self) -> dict:
        return {
            "r": self.r,
            "v": self.v,
            "dv": self.dv,
            "lambda_radial": self.lam_r,
            "lambda_tangential": self.lam_t,
            "residual": self.residual,
        }

    def values(self, r) -> np.ndarray:
        """``v`` at radii inside the integrated range (vectorised)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        r0 = self.solution.t[0]
        inner = self.v0 + 0.5 * self.d2v[0] * r * r
        return np.where(r < r0, inner, self.solution.sol(np.maximum(r, r0))[0])

    def evaluate(self, r):
        """``(v, v', v'')`` at radii inside the integrated range."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty((3, r.size))
        for i, ri in enumerate(r):
            if ri < self.solution.t[0]:
                c = self.d2v[0]
                out[:, i] = (self.v0 + 0.5 * c * ri * ri, c * ri, c)
            else:
                v, dv = self.solution.sol(ri)
                out[:, i] = (v, dv, _second_derivative(self.op, self.n, ri, v, dv))
        return out

    def as_field(self) -> AnalyticField:
        n = self.n
        last = self.r[-1]

        def g(r):
            r = np.asarray(r, dtype=float)
            return self.evaluate(np.minimum(r.ravel(), last))[0].reshape(r.shape)

        def g1(r):
            r = np.asarray(r, dtype=float).ravel()
            v = self.evaluate(np.minimum(r, last))
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(r > 0, v[1] / np.where(r > 0, r, 1.0), v[2])

        def g2(r):
            r = np.asarray(r, dtype=float)
            return self.evaluate(np.minimum(r.ravel(), last))[2].reshape(r.shape)

        return radial_field(np.zeros(n), g, lambda r: g1(r).reshape(np.shape(r)), g2, label=f"radial_shoot(v0={self.v0})")


def _second_derivative(op, n, r, v, dv):
    if v <= 0:
        raise ConeExit("profile reached v <= 0")
    a = -2.0 / (n - 2) * v ** (-(n + 2) / (n - 2))
    b = v ** (-2.0 * n / (n - 2)) / (n - 2) ** 2
    lam_t = a * dv / r - 2.0 * b * dv * dv
    lam_r = _solve_radial(op, n, lam_t)
    return (lam_r - 2.0 * (n - 1) * b * dv * dv) / a


def radial_shoot(op: OperatorSpec, n: int, v0: float, rmax: float = 10.0, samples: int = 501, rtol: float = 1e-12) -> RadialProfile:
    """Integrate the radial profile from ``v(0) = v0``, ``v'(0) = 0``.

    Starts from the second-order Taylor expansion at ``r = 1e-4 v0^(-2/(n-2))``
    and integrates with an adaptive eighth-order Runge-Kutta scheme until
    ``rmax`` or until ``v < 1e-6 v0``.
    """
    if not v0 > 0:
        raise ValueError("v0 must be positive")
    if op.normalization_error(n) > 1e-10:
        raise ValueError("operator must be normalised so that f(2,...,2) = 1")
    # at r = 0 all eigenvalues equal 2, i.e. -2/(n-2) v0^(-(n+2)/(n-2)) v'' = 2
    c0 = -(n - 2) * v0 ** ((n + 2) / (n - 2))
    r0 = min(1e-4 * v0 ** (-2.0 / (n - 2)), rmax / 10)
    y0 = [v0 + 0.5 * c0 * r0 * r0, c0 * r0]

    def rhs(r, y):
        return [y[1], _second_derivative(op, n, r, y[0], y[1])]

    def small(r, y):
        return y[0] - 1e-6 * v0

    small.terminal = True
    small.direction = -1
    sol = solve_ivp(rhs, (r0, rmax), y0, method="DOP853", rtol=rtol, atol=1e-14 * v0, dense_output=True, events=small)
    if sol.status < 0:
        raise ConeExit(sol.message)
    r_end = float(sol.t[-1])
    reason = "v-small" if sol.status == 1 else "rmax"
    rs = np.concatenate([[0.0], np.linspace(r0, r_end, samples - 1)])
    prof = RadialProfile(n, v0, rs, *(np.zeros(rs.size) for _ in range(6)), stop_reason=reason, solution=sol, op=op)
    prof.r = rs
    prof.d2v = np.full(rs.size, c0)
    vals = prof.evaluate(rs)
    prof.v, prof.dv, prof.d2v = vals
    prof.lam_r, prof.lam_t = radial_eigenvalues(n, rs, prof.v, prof.dv, prof.d2v)
    lam = np.concatenate([prof.lam_r[:, None], np.repeat(prof.lam_t[:, None], n - 1, axis=1)], axis=1)
    inside = np.asarray(op.contains(lam), dtype=bool)
    if not inside.all():
        raise ConeExit("eigenvalues left the cone along the profile")
    prof.residual = np.asarray(op(lam), dtype=float) - 1.0
    return prof
