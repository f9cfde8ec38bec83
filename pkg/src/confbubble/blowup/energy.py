"""Energy probes: small energy forces bounded values, and the log-gradient surrogate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fields import AnalyticField, GridField, ScalarField, argmax_on_ball, ball_energy, ball_values, derivatives
from .bubbles import critical_exponent


@dataclass(frozen=True)
class EpsRegularity:
    energy: float
    threshold: float
    sup_b1: float
    median_b2: float

    @property
    def small(self) -> bool:
        return self.energy <= self.threshold

    @property
    def kind(self) -> str:
        return "SmallEnergyBounded" if self.small else "LargeEnergy"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "energy_B2": self.energy,
            "threshold": self.threshold,
            "sup_B1": self.sup_b1,
            "median_B2": self.median_b2,
        }


def eps_regularity_probe(u: ScalarField, threshold: float, h: float | None = None) -> EpsRegularity:
    """Energy of ``u^(2n/(n-2))`` on B_2 against ``threshold``, with the B_1 sup."""
    n = u.n
    origin = np.zeros(n)
    energy = ball_energy(u, origin, 2.0, critical_exponent(n), h)
    _, sup = argmax_on_ball(u, origin, 1.0, h)
    _, vals = ball_values(u, origin, 2.0, h if h is not None or isinstance(u, GridField) else 1.0 / 16)
    return EpsRegularity(energy, threshold, float(sup), float(np.median(vals)))


def log_gradient_sup(v: ScalarField, radius: float = 1.0, h: float | None = None) -> float:
    """``sup_{B_radius} |grad ln v|`` sampled at grid nodes or lattice points."""
    n = v.n
    if isinstance(v, AnalyticField):
        pts, _ = ball_values(v, np.zeros(n), radius, h or radius / 16)
        val, grad, _ = v.jet(pts)
        return float(np.max(np.linalg.norm(grad, axis=1) / val))
    pts, _ = ball_values(v, np.zeros(n), radius)
    best = 0.0
    for p in pts:
        d = derivatives(v, p)
        best = max(best, float(np.linalg.norm(d.gradient)) / d.value)
    return best
