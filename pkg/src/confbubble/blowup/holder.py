"""The Hölder gauge: the radius at which the local alpha-seminorm reaches one.

``[w]_{alpha,delta}(x)`` is a sampled sup over the points
``x + delta * s * theta`` with fixed fractions ``s`` in (0, 1] and a fixed
direction set ``theta``.  Because the sample set scales with ``delta`` the
sampled seminorm is a maximum of finitely many continuous functions of
``delta``; in particular the rescaled field ``w(x + delta y) - w(x)`` sees
exactly the same samples on the unit ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import OutOfDomain


def default_directions(n: int, count: int = 256, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.concatenate([np.eye(n), -np.eye(n), d])


def default_fractions(count: int = 200) -> np.ndarray:
    return np.geomspace(1e-4, 1.0, count)


@dataclass(frozen=True)
class HolderSampler:
    directions: np.ndarray
    fractions: np.ndarray

    @classmethod
    def default(cls, n: int) -> "HolderSampler":
        return cls(default_directions(n), default_fractions())


def seminorm(w, x, alpha: float, delta: float, sampler: HolderSampler | None = None) -> float:
    """Sampled ``sup_{0<|y-x|<=delta} |w(y) - w(x)| / |y-x|^alpha``."""
    x = np.asarray(x, dtype=float)
    sampler = sampler or HolderSampler.default(x.size)
    t = delta * sampler.fractions
    pts = x + t[:, None, None] * sampler.directions[None, :, :]
    diff = np.abs(np.asarray(w(pts)) - float(w(x)))
    return float(np.max(diff / t[:, None] ** alpha))


@dataclass(frozen=True)
class HolderGauge:
    alpha: float
    x: np.ndarray
    gauge: float
    seminorm: float
    residual: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.gauge)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "x": self.x.tolist(),
            "gauge": self.gauge if self.finite else "inf",
            "seminorm": self.seminorm,
            "residual": self.residual,
        }


def holder_gauge(w, x, alpha: float, domain_radius: float = 2.0, sampler: HolderSampler | None = None, iters: int = 200) -> HolderGauge:
    """Gauge ``delta(w, x, alpha)`` on the ball ``B_domain_radius(0)``.

    Infinite when ``(R - |x|)^alpha [w]_{alpha, R-|x|}(x) < 1``; otherwise
    the bisection root of ``mu^alpha [w]_{alpha,mu}(x) = 1`` on (0, R - |x|].
    ``residual`` is ``|mu^alpha [w]_{alpha,mu} - 1|`` at the returned root.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    top = domain_radius - float(np.linalg.norm(x))
    if top <= 0:
        raise OutOfDomain("x must lie inside the domain ball")
    sampler = sampler or HolderSampler.default(x.size)

    def g(mu):
        return mu**alpha * seminorm(w, x, alpha, mu, sampler) - 1.0

    g_top = g(top)
    if g_top < 0:
        return HolderGauge(alpha, x, math.inf, seminorm(w, x, alpha, top, sampler), 0.0)
    lo, hi = 0.0, top
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    # pick whichever bracket end is closer to the level set
    mu = hi if lo == 0.0 or abs(g(hi)) <= abs(g(lo)) else lo
    return HolderGauge(alpha, x, mu, seminorm(w, x, alpha, mu, sampler), abs(g(mu)))


def rescaled(w, x, delta: float):
    """``y -> w(x + delta y) - w(x)``."""
    x = np.asarray(x, dtype=float)
    wx = float(w(x))
    return lambda y: np.asarray(w(x + delta * np.asarray(y, dtype=float))) - wx
