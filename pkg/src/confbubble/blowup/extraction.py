"""Greedy extraction of bubble cores from a blowing-up field.

The loop mirrors the landscape statement for solutions with a large
maximum on B_1: pick the highest point in a slightly enlarged ball whose
boundary shell carries little energy, check closeness to the bubble with
the same peak, carve out an exclusion ball, and repeat until the
remaining maximum drops below the threshold ``C*``.  Every reported
constant is a measured surrogate; nothing here proves the existence of the
universal constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import BudgetExceeded, NonPositiveValue, OutOfDomain
from ..fields import ScalarField, argmax_on_ball, ball_energy, ball_values, shell_energies
from .bubbles import bubble_closeness, bubble_energy, critical_exponent

K_LIMIT = 1e6


@dataclass
class ExtractionConfig:
    eps: float = 0.5
    c_star: float | None = None
    delta_star: float = 0.125
    exclusion: float | None = None
    n0: int = 8
    h: float | None = None

    def exclusion_radius(self) -> float:
        return 4 * self.delta_star if self.exclusion is None else self.exclusion


@dataclass
class BlowupReport:
    status: str
    n: int
    centers: list
    heights: list
    eps: float
    c_star: float
    delta_star: float
    exclusion: float
    sup_b1: float
    energy_b2: float
    bubble_energy_b1: float
    budget: int
    r0: float
    k_meas: float = math.nan
    k_parts: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.centers)

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "n": self.n,
            "m": self.m,
            "centers": [list(map(float, c)) for c in self.centers],
            "heights": [float(v) for v in self.heights],
            "constants": {
                "eps": self.eps,
                "C_star": self.c_star,
                "delta_star": self.delta_star,
                "exclusion": self.exclusion,
                "K_meas": self.k_meas,
                "K_parts": self.k_parts,
                "m_budget": self.budget,
            },
            "sup_B1": self.sup_b1,
            "energy_B2": self.energy_b2,
            "bubble_energy_B1": self.bubble_energy_b1,
            "r0": self.r0,
            "flags": self.flags,
            "margins": self.margins,
            "passed": self.passed,
        }


def choose_shell(u: ScalarField, n0: int, p: float, h=None) -> tuple[float, np.ndarray]:
    """Inner radius of the least-energy shell among ``n0`` equal shells of (3/2, 2)."""
    edges = 1.5 + np.arange(n0 + 1) / (2.0 * n0)
    e = shell_energies(u, np.zeros(u.n), edges, p, h)
    j = int(np.argmin(e))
    return float(edges[j]), e


def _collapse_k(u, centers, delta_star, top, h):
    """Least K with ``1/(K d) <= u <= K/d`` on ``B_{3/2} minus cores``, ``d = delta*^(n-2) u(x^1)``."""
    n = u.n
    _, vals = ball_values(u, np.zeros(n), 1.5, h, exclude=[(c, delta_star) for c in centers])
    if vals.size == 0:
        return 1.0
    d = delta_star ** (n - 2) * top
    return float(max(1.0, np.max(vals) * d, 1.0 / (np.min(vals) * d)))


def extract_bubbles(u: ScalarField, config: ExtractionConfig | None = None) -> BlowupReport:
    cfg = config or ExtractionConfig()
    n = u.n
    p = critical_exponent(n)
    origin = np.zeros(n)
    h = cfg.h

    x_sup, sup_b1 = argmax_on_ball(u, origin, 1.0, h)
    c_star = cfg.c_star
    if c_star is None:
        _, vals = ball_values(u, origin, 1.0, h)
        c_star = 10.0 * float(np.median(vals))
    if np.any(ball_values(u, origin, 1.0, h)[1] <= 0):
        raise NonPositiveValue("extraction needs u > 0")
    energy = ball_energy(u, origin, 2.0, p, h)
    e_u = bubble_energy(n, 1.0)
    budget = max(1, math.ceil(2.0 * energy / e_u))
    excl = cfg.exclusion_radius()
    report = BlowupReport(
        "below-threshold", n, [], [], cfg.eps, c_star, cfg.delta_star, excl, float(sup_b1), energy, e_u, budget, math.nan
    )
    if sup_b1 < c_star:
        return report

    r0, _ = choose_shell(u, cfg.n0, p, h)
    report.r0 = r0
    search_radius = r0 + 3.0 / (8 * cfg.n0)
    centers, heights = [], []
    while True:
        try:
            x, val = argmax_on_ball(u, origin, search_radius, h, exclude=[(c, excl) for c in centers])
        except OutOfDomain:
            break
        if val < c_star:
            break
        if len(centers) + 1 > budget:
            raise BudgetExceeded(f"more than {budget} bubbles exceed C* = {c_star}")
        centers.append(np.asarray(x, dtype=float))
        heights.append(float(val))
    report.status = "ok"
    report.centers = centers
    report.heights = heights

    m = len(centers)
    flags, margins = {}, {}
    # (i) dominance
    margins["i_dominance"] = heights[0] - sup_b1
    flags["i_dominance"] = heights[0] >= sup_b1
    # (iii) heights and (ii) separation feed the measured K
    ratio = max(heights) / min(heights)
    dmin = min((np.linalg.norm(a - b) for i, a in enumerate(centers) for b in centers[i + 1 :]), default=math.inf)
    k_v = _collapse_k(u, centers, cfg.delta_star, heights[0], h)
    k_parts = {"height_ratio": ratio, "inv_min_distance": 0.0 if dmin == math.inf else 1.0 / dmin, "collapse": k_v}
    k = max(1.0, *k_parts.values())
    report.k_meas = k
    report.k_parts = k_parts
    margins["ii_separation"] = (dmin - 1.0 / k) if m > 1 else math.inf
    flags["ii_separation"] = margins["ii_separation"] >= 0
    margins["iii_heights"] = k - ratio
    flags["iii_heights"] = ratio <= k
    # (iv) closeness on each core
    worst = 0.0
    for c in centers:
        worst = max(worst, bubble_closeness(u, c, cfg.eps, cfg.delta_star, h).ratio)
    margins["iv_closeness"] = cfg.eps - worst
    flags["iv_closeness"] = worst <= cfg.eps
    # (v) collapse bounds hold with the measured K, provided K stays moderate
    margins["v_collapse"] = K_LIMIT - k_v
    flags["v_collapse"] = k_v <= K_LIMIT
    # (vi) each centre is the maximum of its core
    gaps = []
    for c, v in zip(centers, heights):
        _, top = argmax_on_ball(u, c, cfg.delta_star, h, refine=False)
        gaps.append(v - top)
    margins["vi_local_max"] = min(gaps)
    flags["vi_local_max"] = all(g >= -1e-12 * max(heights) for g in gaps)
    # energy budget and the core-distance check
    margins["budget"] = budget - m
    flags["budget"] = m <= budget
    threshold = math.sqrt(k) / cfg.delta_star ** ((n - 2) / 2)
    if sup_b1 > threshold:
        dist = min(max(0.0, float(np.linalg.norm(c)) - 1.0) for c in centers)
        margins["core_distance"] = sup_b1 ** (-2.0 / (n - 2)) - dist
        flags["core_distance"] = margins["core_distance"] >= 0
    report.flags = {k2: bool(v) for k2, v in flags.items()}
    report.margins = {k2: float(v) for k2, v in margins.items()}
    return report
