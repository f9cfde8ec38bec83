"""Standard bubbles ``U^{c, mu}`` and their superpositions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ..errors import NonPositiveValue
from ..fields import AnalyticField, ScalarField, ball_values, radial_field, sum_fields, unit_sphere_area
from ..mobius import BubbleParams


def bubble_profile(n: int, mu: float):
    """Closed-form ``(g, g'/r, g'')`` of ``r -> mu (1 + beta r^2)^(-(n-2)/2)``, ``beta = mu^(4/(n-2))``."""
    beta = mu ** (4.0 / (n - 2))

    def g(r):
        return mu * (1.0 + beta * np.asarray(r) ** 2) ** (-(n - 2) / 2)

    def g1_over_r(r):
        return -(n - 2) * mu * beta * (1.0 + beta * np.asarray(r) ** 2) ** (-n / 2)

    def g2(r):
        r2 = np.asarray(r) ** 2
        q = 1.0 + beta * r2
        return -(n - 2) * mu * beta * (q ** (-n / 2) - n * beta * r2 * q ** (-n / 2 - 1))

    return g, g1_over_r, g2


def bubble(params: BubbleParams) -> AnalyticField:
    n = params.n
    if n < 3:
        raise ValueError("dimension must be >= 3")
    g, g1, g2 = bubble_profile(n, params.mu)
    return radial_field(params.center, g, g1, g2, label=f"U^{{{params.center},{params.mu}}}")


def standard_bubble(n: int) -> AnalyticField:
    return bubble(BubbleParams(np.zeros(n), 1.0))


def bubble_values(center, mu: float, pts) -> np.ndarray:
    """Values of ``U^{center, mu}`` at ``pts`` (shape (..., n))."""
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[-1]
    d2 = np.sum((pts - np.asarray(center, dtype=float)) ** 2, axis=-1)
    return mu * (1.0 + mu ** (4.0 / (n - 2)) * d2) ** (-(n - 2) / 2)


def superposition(params_list) -> AnalyticField:
    return sum_fields(*(bubble(p) for p in params_list))


def superposition_values(params_list, pts) -> np.ndarray:
    out = 0.0
    for p in params_list:
        out = out + bubble_values(p.center, p.mu, pts)
    return out


def critical_exponent(n: int) -> float:
    return 2.0 * n / (n - 2)


def bubble_energy(n: int, radius: float = np.inf) -> float:
    """``int_{B_radius} U^(2n/(n-2))`` by 1-D radial quadrature."""
    p = critical_exponent(n)
    val, _ = quad(lambda r: (1.0 + r * r) ** (-(n - 2) / 2 * p) * r ** (n - 1), 0.0, radius, epsabs=0, epsrel=1e-13, limit=200)
    return unit_sphere_area(n) * val


@dataclass(frozen=True)
class Closeness:
    ratio: float
    eps: float
    worst_point: np.ndarray | None

    @property
    def passed(self) -> bool:
        return self.ratio <= self.eps

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "eps": self.eps,
            "passed": self.passed,
            "worst_point": None if self.worst_point is None else self.worst_point.tolist(),
        }


def bubble_closeness(u: ScalarField, x, eps: float, rho: float, h: float | None = None, exclude=()) -> Closeness:
    """``sup_{B_rho(x)} |u - U^{x,u(x)}| / U^{x,u(x)}``.

    Grid fields are sampled at the nodes inside the ball (``x`` should be a
    node); analytic fields on a lattice of spacing ``h`` (default rho/32).
    """
    x = np.asarray(x, dtype=float)
    ux = float(u(x))
    if ux <= 0:
        raise NonPositiveValue("closeness needs u(x) > 0")
    pts, vals = ball_values(u, x, rho, h, exclude=exclude)
    if vals.size == 0:
        return Closeness(0.0, eps, None)
    ref = bubble_values(x, ux, pts)
    rel = np.abs(vals - ref) / ref
    j = int(np.argmax(rel))
    return Closeness(float(rel[j]), eps, pts[j])
