"""Liouville-type harnesses: closeness to the bubble anchored at a maximum."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NotCentered, PreconditionError
from ..fields import GridField, ScalarField, argmax_on_ball, ball_values
from .bubbles import bubble_values


def _ratio_profile(u, center, peak, radius, h):
    """Sorted distances from ``center`` and running sup of the relative bubble gap."""
    pts, vals = ball_values(u, center, radius, h)
    d = np.linalg.norm(pts - center, axis=1)
    ref = bubble_values(center, peak, pts)
    rel = np.abs(vals - ref) / ref
    order = np.argsort(d, kind="stable")
    return d[order], np.maximum.accumulate(rel[order])


@dataclass
class CenteredLiouville:
    peak: float
    eps: float
    deltas: list
    ratios: list
    best_delta: float | None

    @property
    def passed(self) -> bool:
        return self.best_delta is not None

    def to_dict(self) -> dict:
        return {
            "peak": self.peak,
            "eps": self.eps,
            "profile": [{"delta0": d, "ratio": r} for d, r in zip(self.deltas, self.ratios)],
            "best_delta0": self.best_delta,
            "passed": self.passed,
        }


def centered_liouville_check(u: ScalarField, eps: float, R: float, deltas=None, h: float | None = None) -> CenteredLiouville:
    """Largest ``delta0`` in the sweep with ``|u - U^{0,u(0)}| <= 2 eps U^{0,u(0)}`` on ``B_{delta0 R}``."""
    n = u.n
    origin = np.zeros(n)
    deltas = list(np.linspace(0.05, 1.0, 20)) if deltas is None else list(deltas)
    cell = u.h if isinstance(u, GridField) else (h or R / 32)
    xm, _ = argmax_on_ball(u, origin, R, h)
    if np.max(np.abs(xm)) > cell * (1 + 1e-9):
        raise NotCentered(f"maximum at {xm.tolist()} is more than one cell from the origin")
    peak = float(u(origin))
    dist, run = _ratio_profile(u, origin, peak, max(deltas) * R, h)
    ratios = []
    for d0 in deltas:
        k = np.searchsorted(dist, d0 * R * (1 + 1e-12), side="right")
        ratios.append(float(run[k - 1]) if k > 0 else 0.0)
    ok = [d0 for d0, r in zip(deltas, ratios) if r <= 2 * eps]
    return CenteredLiouville(peak, eps, [float(d) for d in deltas], ratios, float(max(ok)) if ok else None)


@dataclass
class LiouvilleCheck:
    x_bar: np.ndarray
    value: float
    height_bound: float
    position_bound: float
    ratio: float
    eps: float
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "x_bar": self.x_bar.tolist(),
            "v_x_bar": self.value,
            "height_bound": self.height_bound,
            "position_bound": self.position_bound,
            "ratio": self.ratio,
            "eps": self.eps,
            "flags": self.flags,
            "passed": self.passed,
        }


def liouville_bounds(n: int, gamma: float, r1: float) -> tuple[float, float]:
    """Height bound ``2^(n-1)/(gamma r1^(n-2))`` and position bound ``2^(1/(n-2)) gamma^(-2/(n-2))``."""
    return 2.0 ** (n - 1) / (gamma * r1 ** (n - 2)), 2.0 ** (1.0 / (n - 2)) * gamma ** (-2.0 / (n - 2))


def quantitative_liouville(v: ScalarField, gamma: float, r1: float, eps: float, delta_star: float, R: float, h: float | None = None) -> LiouvilleCheck:
    """Locate ``x_bar = argmax_{B_{delta* R}} v`` and test both bounds and closeness.

    The precondition ``v >= gamma`` on ``B_{r1}`` is checked on samples
    (grid nodes, or a lattice of spacing ``r1/16`` for analytic fields).
    """
    n = v.n
    origin = np.zeros(n)
    _, vals = ball_values(v, origin, r1, None if isinstance(v, GridField) else r1 / 16)
    low = float(np.min(vals)) if vals.size else math.nan
    if not low >= gamma:
        raise PreconditionError(f"v >= gamma fails on B_r1: min {low} < {gamma}")
    radius = delta_star * R
    x_bar, top = argmax_on_ball(v, origin, radius, h)
    hb, pb = liouville_bounds(n, gamma, r1)
    pts, vs = ball_values(v, x_bar, radius, h)
    ref = bubble_values(x_bar, top, pts)
    ratio = float(np.max(np.abs(vs - ref) / ref))
    flags = {
        "height_bound": bool(top <= hb),
        "position_bound": bool(float(np.linalg.norm(x_bar)) <= pb),
        "closeness": bool(ratio <= eps),
    }
    return LiouvilleCheck(np.asarray(x_bar), float(top), hb, pb, ratio, eps, flags)
