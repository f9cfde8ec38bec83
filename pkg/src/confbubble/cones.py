"""Elementary symmetric functions, cones and normalised operators (f, Gamma).

All functions of an eigenvalue vector broadcast over leading axes: a
``lam`` of shape ``(..., n)`` yields results of shape ``(...)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import NoRoot

BOUNDARY_BAND = 1e-9
RAY_RANGE = (1e-8, 1e8)


def sigmas(lam) -> np.ndarray:
    """All elementary symmetric polynomials ``sigma_0 .. sigma_n`` (last axis).

    Uses the product expansion of ``prod_i (1 + lam_i t)``: each new entry
    updates the coefficients in place, highest degree first.
    """
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    e = np.zeros(lam.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        li = lam[..., i]
        for j in range(i + 1, 0, -1):
            e[..., j] += li * e[..., j - 1]
    return e


def sigma(k: int, lam) -> np.ndarray | float:
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    out = sigmas(lam)[..., k]
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class GammaK:
    k: int

    @property
    def description(self) -> str:
        return f"gamma_{self.k}"

    def contains(self, lam) -> np.ndarray | bool:
        lam = np.asarray(lam, dtype=float)
        n = lam.shape[-1]
        if not 1 <= self.k <= n:
            raise ValueError(f"Gamma_{self.k} undefined for n={n}")
        e = sigmas(lam)[..., 1 : self.k + 1]
        out = np.all(e > 0, axis=-1)
        return bool(out) if out.ndim == 0 else out

    def near_boundary(self, lam) -> np.ndarray | bool:
        """True where some ``|sigma_l| <= BAND |lam|^l`` (l <= k): rounding can flip membership there."""
        lam = np.asarray(lam, dtype=float)
        e = sigmas(lam)[..., 1 : self.k + 1]
        scale = np.linalg.norm(lam, axis=-1)[..., None] ** np.arange(1, self.k + 1)
        out = np.any(np.abs(e) <= BOUNDARY_BAND * scale, axis=-1)
        return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CustomCone:
    """Black-box cone given by a vectorised membership predicate."""

    predicate: Callable
    description: str = "custom"

    def contains(self, lam):
        out = np.asarray(self.predicate(np.asarray(lam, dtype=float)))
        return bool(out) if out.ndim == 0 else out

    def near_boundary(self, lam):
        return np.zeros(np.shape(lam)[:-1], dtype=bool)


Cone = GammaK | CustomCone


def positive_orthant_contains(lam) -> np.ndarray:
    return np.all(np.asarray(lam) > 0, axis=-1)


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True)
class OperatorSpec:
    """The pair (f, Gamma) with ``f~(lam) = f(scale * lam)``.

    ``verified`` records the structural conditions confirmed by the last
    :func:`audit_conditions` run (names such as ``"monotone"``).
    """

    cone: Cone
    f: Callable
    scale: float = 1.0
    name: str = "f"
    verified: frozenset = field(default_factory=frozenset)

    def __call__(self, lam):
        out = np.asarray(self.f(self.scale * np.asarray(lam, dtype=float)))
        return float(out) if out.ndim == 0 else out

    def contains(self, lam):
        return self.cone.contains(lam)

    def diagonal(self, t, n: int):
        return self(np.full(np.shape(t) + (n,), 1.0) * np.asarray(t, dtype=float)[..., None])

    def normalization_error(self, n: int) -> float:
        return abs(self(np.full(n, 2.0)) - 1.0)


def normalize(op: OperatorSpec, n: int) -> OperatorSpec:
    """Rescale so that ``f~(2, ..., 2) = 1``.

    Scans the diagonal ray geometrically over ``[1e-8, 1e8]`` for the first
    sign change of ``f(t, ..., t) - 1`` among cone points, then refines the
    root to relative accuracy 1e-14.
    """
    ts = np.geomspace(*RAY_RANGE, 321)
    diag = ts[:, None] * np.ones(n)
    inside = np.asarray(op.contains(diag), dtype=bool)
    with np.errstate(all="ignore"):
        g = np.where(inside, np.asarray(op(diag), dtype=float) - 1.0, np.nan)
    root = None
    for i in range(ts.size - 1):
        a, b = g[i], g[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a < 0 <= b:
            if b == 0:
                root = ts[i + 1]
            else:
                root = brentq(lambda t: op.diagonal(t, n) - 1.0, ts[i], ts[i + 1], xtol=1e-300, rtol=1e-14, maxiter=500)
            break
    if root is None:
        raise NoRoot(f"f(t,...,t) - 1 has no sign change on the diagonal for {op.name}")
    return replace(op, scale=op.scale * root / 2.0)


def sigma_k_root(n: int, k: int) -> OperatorSpec:
    """Normalised ``sigma_k^(1/k)`` on ``Gamma_k``."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    raw = OperatorSpec(GammaK(k), lambda lam: np.maximum(sigmas(lam)[..., k], 0.0) ** (1.0 / k), name=f"sigma_{k}^(1/{k})")
    # closed form: f(c,...,c) = C(n,k)^(1/k) c
    return replace(raw, scale=math.comb(n, k) ** (-1.0 / k) / 2.0)


def sigma1_over_2n(n: int) -> OperatorSpec:
    """``sigma_1 / (2n)`` on ``Gamma_1``; already normalised."""
    return OperatorSpec(GammaK(1), lambda lam: np.sum(lam, axis=-1) / (2.0 * n), name="sigma_1/(2n)")


def gamma1_counterexample(n: int) -> OperatorSpec:
    """``(sum lam)^((n-1)/(n+3)) (sum lam^2)^(2/(n+3))`` on ``Gamma_1`` (normalised)."""

    def f(lam):
        s1 = np.maximum(np.sum(lam, axis=-1), 0.0)
        return s1 ** ((n - 1) / (n + 3)) * np.sum(lam**2, axis=-1) ** (2 / (n + 3))

    return normalize(OperatorSpec(GammaK(1), f, name="gamma1-counterexample"), n)


def sum_minus_max_cone() -> CustomCone:
    return CustomCone(lambda lam: np.sum(lam, axis=-1) - np.max(lam, axis=-1) > 0, "sum - max > 0")


def sigma2_plus_one(n: int) -> OperatorSpec:
    """``sigma_2 + 1`` on ``{sum_j lam_j - lam_i > 0 for all i}``; cannot be normalised."""
    return OperatorSpec(sum_minus_max_cone(), lambda lam: sigmas(lam)[..., 2] + 1.0, name="sigma_2+1")


# ---------------------------------------------------------------------------
# audit


@dataclass
class ConditionResult:
    checked: int = 0
    failures: int = 0
    worst: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.failures == 0

    def to_dict(self) -> dict:
        return {"checked": self.checked, "failures": self.failures, "worst": self.worst, "passed": self.passed, **self.detail}


@dataclass
class AuditReport:
    operator: str
    n: int
    samples: int
    conditions: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "n": self.n,
            "samples": self.samples,
            "passed": self.passed,
            "conditions": {k: v.to_dict() for k, v in sorted(self.conditions.items())},
        }


def sample_cone(op: OperatorSpec, n: int, count: int, rng: np.random.Generator, scales=(-3.0, 4.0)):
    """Cone samples spread over log scales; half are pushed close to the boundary.

    Interior points come from rejection sampling of random directions.  The
    near-boundary half bisects (40 steps) from an interior point toward a
    rejected point at the same scale, keeping the interior end.
    """
    inside, outside = [], []
    need = count
    for _ in range(200):
        if need <= 0 and len(outside) > 0:
            break
        batch = max(4 * count, 1024)
        d = rng.standard_normal((batch, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        lam = d * 10.0 ** rng.uniform(*scales, size=(batch, 1))
        mask = np.asarray(op.contains(lam), dtype=bool)
        inside.append(lam[mask])
        outside.append(lam[~mask])
        need -= int(mask.sum())
    inside = np.concatenate(inside)[:count]
    outside = np.concatenate(outside) if outside else np.zeros((0, n))
    half = count // 2
    if outside.shape[0] == 0 or half == 0:
        return inside
    a = inside[:half].copy()
    b = outside[rng.integers(0, outside.shape[0], size=half)]
    b = b / np.linalg.norm(b, axis=1, keepdims=True) * np.linalg.norm(a, axis=1, keepdims=True)
    for _ in range(40):
        m = 0.5 * (a + b)
        ok = np.asarray(op.contains(m), dtype=bool)
        a[ok] = m[ok]
        b[~ok] = m[~ok]
    return np.concatenate([a, inside[half:]])


def _fu1a_ray_trend(op: OperatorSpec, lam: np.ndarray):
    """Along each sampled ray find the first ``t`` with ``f(t d) >= 1`` and fit
    ``log(t sigma_1(d))`` against ``log sigma_1(d)`` over directions with
    ``sigma_1(d) < 1e-2``.  A positive slope means the infimum of ``sigma_1``
    on ``{f >= 1}`` is driven to zero at the cone boundary."""
    d = lam / np.linalg.norm(lam, axis=1, keepdims=True)
    s1 = d.sum(axis=1)
    t = np.geomspace(1e-4, 1e12, 321)
    vals = np.asarray(op(t[None, :, None] * d[:, None, :]), dtype=float)
    hit = vals >= 1.0
    has = hit.any(axis=1)
    first = np.argmax(hit, axis=1)
    ray = np.where(has, t[first] * s1, np.inf)
    ray_delta = float(np.min(ray)) if has.any() else math.inf
    sel = has & (s1 > 0) & (s1 < 1e-2)
    if sel.sum() < 20:
        return None, ray_delta
    slope = float(np.polyfit(np.log(s1[sel]), np.log(ray[sel]), 1)[0])
    return slope, ray_delta


def audit_conditions(op: OperatorSpec, n: int, samples: int = 10_000, seed: int = 0, fu1a_floor: float = 1e-3) -> AuditReport:
    """Monte-Carlo falsification of the structural conditions on (f, Gamma).

    Conditions (each a :class:`ConditionResult`): ``symmetry``,
    ``positive``, ``monotone`` (forward-difference sign test),
    ``fu1a`` (reports the largest delta consistent with the samples, i.e.
    the least ``sum(lam)`` among samples with ``f >= 1``; fails below
    ``fu1a_floor``), ``segment_convex`` (rays ``lam + t mu`` with ``mu`` in
    the positive orthant meet the cone in an interval), ``cone_in_gamma1``,
    ``orthant_shift`` (``Gamma + Gamma_n`` inside ``Gamma``),
    ``orthant_in_cone`` and ``diagonal_below_one`` (some diagonal point
    has ``f < 1``).
    """
    rng = np.random.default_rng(seed)
    lam = sample_cone(op, n, samples, rng)
    conds: dict[str, ConditionResult] = {}
    with np.errstate(all="ignore"):
        fl = np.asarray(op(lam), dtype=float)

        # symmetry of membership and value
        perm = np.argsort(rng.random(lam.shape), axis=1)
        lp = np.take_along_axis(lam, perm, axis=1)
        mem = np.asarray(op.contains(lp), dtype=bool)
        fp = np.asarray(op(lp), dtype=float)
        dev = np.abs(fp - fl) / np.maximum(1.0, np.abs(fl))
        # roots of nearly vanishing sigma_k amplify rounding; skip the boundary band
        edge = np.asarray(op.cone.near_boundary(lam), dtype=bool)
        dev = np.where(edge, 0.0, dev)
        bad = (~mem & ~edge) | (dev > 1e-10)
        conds["symmetry"] = ConditionResult(lam.shape[0], int(bad.sum()), float(np.max(dev, initial=0.0)))

        conds["positive"] = ConditionResult(lam.shape[0], int(np.sum(~(fl > 0))), float(-min(0.0, np.min(fl, initial=0.0))))

        # monotonicity in each coordinate
        fails, checked, worst = 0, 0, 0.0
        step = 1e-7 * np.maximum(1.0, np.linalg.norm(lam, axis=1))
        for i in range(n):
            lh = lam.copy()
            lh[:, i] += step
            ok = np.asarray(op.contains(lh), dtype=bool)
            diff = (np.asarray(op(lh), dtype=float) - fl)[ok]
            # allow rounding of f itself
            slack = 1e-13 * np.maximum(1.0, np.abs(fl[ok]))
            checked += int(ok.sum())
            fails += int(np.sum(diff < -slack))
            worst = max(worst, float(-np.min(diff, initial=0.0)))
        conds["monotone"] = ConditionResult(checked, fails, worst)

        # (FU-1a)
        s1 = lam.sum(axis=1)
        big = fl >= 1.0
        delta = float(np.min(s1[big])) if big.any() else math.inf
        res = ConditionResult(lam.shape[0], 0 if delta >= fu1a_floor else int(np.sum(big & (s1 < fu1a_floor))), 0.0)
        if delta < fu1a_floor:
            j = int(np.argmin(np.where(big, s1, np.inf)))
            res.worst = float(fl[j])
            res.detail["witness"] = lam[j].tolist()
        res.detail["delta_candidate"] = delta
        res.detail["floor"] = fu1a_floor
        slope, ray_delta = _fu1a_ray_trend(op, lam)
        res.detail["ray_delta"] = ray_delta
        res.detail["boundary_slope"] = slope
        if ray_delta < fu1a_floor or (slope is not None and slope > 0.1):
            # delta shrinks as sigma_1(d) -> 0 along rays: no uniform positive delta
            res.failures += 1
        conds["fu1a"] = res

        # cone inside Gamma_1
        conds["cone_in_gamma1"] = ConditionResult(lam.shape[0], int(np.sum(s1 <= 0)), float(-min(0.0, np.min(s1))))

        # Gamma + Gamma_n inside Gamma, and segment convexity
        mu = np.abs(rng.standard_normal(lam.shape)) * np.linalg.norm(lam, axis=1, keepdims=True)
        shifted = np.asarray(op.contains(lam + mu), dtype=bool)
        conds["orthant_shift"] = ConditionResult(lam.shape[0], int(np.sum(~shifted)), 0.0)
        ts = np.geomspace(1e-4, 1e4, 41)
        memb = np.stack([np.asarray(op.contains(lam + t * mu), dtype=bool) for t in ts], axis=1)
        # an interval of t: membership changes value at most twice, never out->in->out->in
        changes = np.sum(memb[:, 1:] != memb[:, :-1], axis=1)
        gaps = (changes > 2) | ((changes == 2) & ~memb[:, 0])
        conds["segment_convex"] = ConditionResult(lam.shape[0], int(gaps.sum()), 0.0)

        orth = np.abs(rng.standard_normal((samples, n))) * 10.0 ** rng.uniform(-3, 4, size=(samples, 1))
        conds["orthant_in_cone"] = ConditionResult(samples, int(np.sum(~np.asarray(op.contains(orth), dtype=bool))), 0.0)

        # some diagonal point with f < 1
        td = np.geomspace(*RAY_RANGE, 321)
        diag = td[:, None] * np.ones(n)
        din = np.asarray(op.contains(diag), dtype=bool)
        fd = np.asarray(op(diag), dtype=float)
        below = din & (fd < 1.0)
        res = ConditionResult(1, 0 if below.any() else 1, float(np.min(fd[din], initial=math.inf)))
        res.detail["t0"] = float(td[np.argmax(below)]) if below.any() else None
        conds["diagonal_below_one"] = res

    verified = frozenset(k for k, v in conds.items() if v.passed)
    report = AuditReport(op.name, n, int(lam.shape[0]), conds)
    report.verified = verified
    return report
