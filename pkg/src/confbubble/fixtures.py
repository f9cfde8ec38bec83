"""Built-in grid fixtures with ground-truth metadata."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blowup.bubbles import superposition_values
from .errors import UnknownFixture
from .fields import GridField
from .mobius import BubbleParams

BUBBLE_SETS = {
    "single-bubble": [((0.2, 0.0, 0.0), 50.0)],
    "two-bubble": [((0.5, 0.0, 0.0), 50.0), ((-0.5, 0.0, 0.0), 80.0)],
    "three-bubble": [((0.6, 0.0, 0.0), 100.0), ((-0.3, 0.5, 0.0), 150.0), ((-0.3, -0.5, 0.0), 200.0)],
}
FIXTURE_IDS = (*BUBBLE_SETS, "capped-bubble-family", "remark21-counterexample", "radial-power")


@dataclass
class Fixture:
    id: str
    grid: GridField
    meta: dict


def _bubble_grid(params, half_width, h):
    n = params[0].n

    def fn(pts):
        return superposition_values(params, pts)

    return GridField.centered(fn, np.zeros(n), half_width, h)


def _bubble_meta(fid, params, h, half_width, seed, extra=None):
    meta = {
        "id": fid,
        "n": params[0].n,
        "h": h,
        "half_width": half_width,
        "seed": seed,
        "centers": [list(map(float, p.center)) for p in params],
        "heights": [float(p.mu) for p in params],
        "note": "exact superposition of bubbles; a landscape fixture, not a solution",
    }
    meta.update(extra or {})
    return meta


def capped_family(n: int, count: int, cap: float, seed: int) -> list:
    """``count`` bubbles ``U^{c, mu}`` with centers in B_1 and heights ``mu <= cap``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = rng.standard_normal(n)
        c = d / np.linalg.norm(d) * rng.random() ** (1 / n)
        out.append(BubbleParams(c, float(rng.uniform(0.1, 1.0) * cap)))
    return out


def remark21_values(n: int, R: float, pts) -> np.ndarray:
    """``(R^-(n+4) |x - x_R|^(-(n-4)/2) + 1)^(2(n-2)/(n-4))`` with ``x_R = (2R, 0, ..., 0)``."""
    if n < 5:
        raise ValueError("the family needs n >= 5")
    pts = np.asarray(pts, dtype=float)
    xk = np.zeros(n)
    xk[0] = 2 * R
    d = np.linalg.norm(pts - xk, axis=-1)
    t = R ** (-(n + 4)) * d ** (-(n - 4) / 2)
    return np.exp(2 * (n - 2) / (n - 4) * np.log1p(t))


def remark21_deviation(n: int, R: float, pts) -> np.ndarray:
    """``v_R - 1`` without cancellation."""
    pts = np.asarray(pts, dtype=float)
    xk = np.zeros(n)
    xk[0] = 2 * R
    d = np.linalg.norm(pts - xk, axis=-1)
    t = R ** (-(n + 4)) * d ** (-(n - 4) / 2)
    return np.expm1(2 * (n - 2) / (n - 4) * np.log1p(t))


def gen_fixture(fid: str, params: dict | None = None, seed: int = 0) -> Fixture:
    """Build a named fixture; ``params`` overrides the grid step and extents.

    Bubble landscapes (n = 3) default to ``h = 0.01`` on ``[-2.1, 2.1]^3``.
    """
    p = dict(params or {})
    if fid in BUBBLE_SETS:
        h = float(p.get("h", 0.01))
        hw = float(p.get("half_width", 2.1))
        bubbles = [BubbleParams(np.array(c, dtype=float), mu) for c, mu in BUBBLE_SETS[fid]]
        return Fixture(fid, _bubble_grid(bubbles, hw, h), _bubble_meta(fid, bubbles, h, hw, seed))
    if fid == "capped-bubble-family":
        n = int(p.get("n", 3))
        h = float(p.get("h", 0.05))
        hw = float(p.get("half_width", 1.2))
        cap = float(p.get("cap", 4.0))
        count = int(p.get("count", 3))
        bubbles = capped_family(n, count, cap, seed)
        return Fixture(fid, _bubble_grid(bubbles, hw, h), _bubble_meta(fid, bubbles, h, hw, seed, {"cap": cap}))
    if fid == "remark21-counterexample":
        n = int(p.get("n", 5))
        R = float(p.get("R", 2.0))
        h = float(p.get("h", 0.25))
        hw = float(p.get("half_width", 1.0))
        grid = GridField.centered(lambda x: remark21_values(n, R, x), np.zeros(n), hw, h)
        xk = [2 * R] + [0.0] * (n - 1)
        meta = {
            "id": fid,
            "n": n,
            "R": R,
            "h": h,
            "half_width": hw,
            "seed": seed,
            "singular_point": xk,
            "limit": 1.0,
            "sup_deviation_B1": float(remark21_deviation(n, R, np.array([[1.0] + [0.0] * (n - 1)]))[0]),
        }
        return Fixture(fid, grid, meta)
    if fid == "radial-power":
        n = int(p.get("n", 3))
        h = float(p.get("h", 0.05))
        hw = float(p.get("half_width", 2.0))
        # half-cell offset keeps the origin off the grid
        origin = np.full(n, -hw + 0.5 * h)
        dims = [int(round(2 * hw / h))] * n
        grid = GridField.from_function(lambda x: np.linalg.norm(x, axis=-1) ** (2 - n), origin, dims, h)
        meta = {"id": fid, "n": n, "h": h, "half_width": hw, "seed": seed, "formula": "|y|^(2-n)"}
        return Fixture(fid, grid, meta)
    raise UnknownFixture(f"unknown fixture {fid!r}; known: {', '.join(FIXTURE_IDS)}")
