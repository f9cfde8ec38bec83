"""Moving spheres: Kelvin comparisons, critical radii and radial-symmetry tests."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import NoSignChange
from .fields import GridField, ScalarField, ball_values, derivatives
from .mobius import kelvin_values

VIOLATION_TOL = 1e-9


def safe_radius(L: float, R: float, n: int) -> float:
    """``min((n-2)/(2L), R/2)``: below it Kelvin reflections about the origin
    stay under any field whose logarithm is L-Lipschitz on B_R."""
    if not (L > 0 and R > 0):
        raise ValueError("need L > 0 and R > 0")
    return min((n - 2) / (2.0 * L), R / 2.0)


def log_lipschitz(w: ScalarField, R: float, h: float | None = None) -> float:
    """``sup_{B_R} |grad ln w|``, the Lipschitz constant of ``ln w`` on the ball.

    Analytic fields: lattice scan (spacing ``R/16``) then a constrained local
    maximisation from the best few nodes.  Grid fields: central differences
    at every interior node of the ball.
    """
    n = w.n
    origin = np.zeros(n)
    if isinstance(w, GridField):
        pts, _ = ball_values(w, origin, R)
        best = 0.0
        for p in pts:
            try:
                d = derivatives(w, p)
            except Exception:
                continue
            best = max(best, float(np.linalg.norm(d.gradient)) / d.value)
        return best
    pts, _ = ball_values(w, origin, R, h or R / 16)
    val, grad, _ = w.jet(pts)
    norms = np.linalg.norm(grad, axis=1) / val
    best = float(np.max(norms))

    def neg(y):
        v, g, _ = w.jet(y[None, :])
        return -float(np.linalg.norm(g[0]) / v[0])

    cons = {"type": "ineq", "fun": lambda y: R * R - float(y @ y)}
    for j in np.argsort(norms)[-5:]:
        res = minimize(neg, pts[j], constraints=[cons], method="SLSQP", options={"maxiter": 100, "ftol": 1e-14})
        if float(res.x @ res.x) <= R * R * (1 + 1e-9):
            best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------------------
# sphere comparisons


def _directions(n: int, count: int, seed: int = 1) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return np.concatenate([np.eye(n), -np.eye(n), d])


@dataclass(frozen=True)
class SampleSpec:
    directions: int = 400
    radii: int = 120


@dataclass
class SphereComparison:
    x: np.ndarray
    lam: float
    violation: float
    witness: np.ndarray | None
    region: dict

    @property
    def holds(self) -> bool:
        return self.violation <= VIOLATION_TOL

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "lambda": self.lam,
            "violation": self.violation,
            "witness": None if self.witness is None else self.witness.tolist(),
            "region": self.region,
        }


def comparison_points(n, x, lam, R, rmax=None, exclude_origin=False, puncture=0.0, samples: SampleSpec = SampleSpec()):
    """Samples of ``{|y| <= R, |y - x| >= lam, |y - x| <= rmax}`` minus a puncture at 0."""
    x = np.asarray(x, dtype=float)
    dirs = _directions(n, samples.directions)
    top = (R + float(np.linalg.norm(x))) if rmax is None else rmax
    top = max(top, lam * (1 + 1e-6))
    t = np.linspace(0.0, 1.0, samples.radii)
    rad = np.unique(np.concatenate([lam * (top / lam) ** t, lam + (top - lam) * t]))
    rad = rad[rad > lam * (1 + 1e-12)]
    pts = x + rad[:, None, None] * dirs[None, :, :]
    pts = pts.reshape(-1, n)
    bnd = R * dirs
    if rmax is None:
        pts = np.concatenate([pts, bnd])
    d = np.linalg.norm(pts - x, axis=1)
    keep = (np.linalg.norm(pts, axis=1) <= R * (1 + 1e-12)) & (d > lam * (1 + 1e-12))
    if rmax is not None:
        keep &= d <= rmax * (1 + 1e-12)
    if exclude_origin:
        keep &= np.linalg.norm(pts, axis=1) > puncture
    return pts[keep]


def sphere_compare(w, x, lam: float, R: float, rmax: float | None = None, exclude_origin: bool = False, puncture: float | None = None, samples: SampleSpec = SampleSpec()) -> SphereComparison:
    """Max of ``(w_{x,lam} - w)_+`` over samples of ``B_R(0) minus B_lam(x)``.

    ``rmax`` restricts to the annulus ``lam < |y - x| <= rmax``.  With
    ``exclude_origin`` a puncture ball (default radius ``10 h`` for grid
    fields, ``1e-3 R`` otherwise) around 0 is removed.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    x = np.asarray(x, dtype=float)
    n = x.size
    if puncture is None:
        puncture = 10 * w.h if isinstance(w, GridField) else 1e-3 * R
    pts = comparison_points(n, x, lam, R, rmax, exclude_origin, puncture, samples)
    region = {"R": R, "rmax": rmax, "exclude_origin": exclude_origin, "samples": int(len(pts))}
    if len(pts) == 0:
        return SphereComparison(x, lam, 0.0, None, region)
    diff = kelvin_values(w, x, lam, pts) - np.asarray(w(pts))
    j = int(np.argmax(diff))
    viol = max(0.0, float(diff[j]))
    return SphereComparison(x, lam, viol, pts[j] if viol > 0 else None, region)


def ray_monotone_defect(w, lam0: float, n: int, samples: SampleSpec = SampleSpec()) -> float:
    """Largest relative decrease of ``r^((n-2)/2) w(r theta)`` along rays on (0, lam0)."""
    dirs = _directions(n, samples.directions)
    r = lam0 * np.geomspace(1e-3, 1.0, samples.radii)[:-1]
    vals = np.asarray(w(r[:, None, None] * dirs[None, :, :])) * r[:, None] ** ((n - 2) / 2)
    drop = (vals[:-1] - vals[1:]) / vals[:-1]
    return float(max(0.0, np.max(drop)))


# ---------------------------------------------------------------------------
# critical radius


@dataclass
class CriticalRadiusResult:
    x: np.ndarray
    lambda_bar: float
    bracket: tuple
    alpha: float
    alpha_error: float
    violations: tuple

    def identity_ratio(self, w) -> float:
        """``lambda_bar^(n-2) w(x) / alpha``; equals 1 for bubbles."""
        n = self.x.size
        return self.lambda_bar ** (n - 2) * float(w(self.x)) / self.alpha

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "lambda_bar": self.lambda_bar,
            "bracket": list(self.bracket),
            "alpha": self.alpha,
            "alpha_error": self.alpha_error,
            "violations": list(self.violations),
        }


def alpha_estimate(w, R: float, n: int, samples: SampleSpec = SampleSpec()) -> tuple[float, float]:
    """``min_{|y| = 0.9 R} |y|^(n-2) w(y)`` with the bubble-model error bar ``(n-2)/(2 (0.9R)^2)``."""
    rho = 0.9 * R
    vals = rho ** (n - 2) * np.asarray(w(rho * _directions(n, samples.directions)))
    a = float(np.min(vals))
    return a, a * (n - 2) / (2 * rho * rho)


def critical_radius(w, x, R: float, iters: int = 40, tol: float = VIOLATION_TOL, samples: SampleSpec = SampleSpec()) -> CriticalRadiusResult:
    """Bisection for ``sup{lam <= R/5 : w_{x,lam} <= w on B_R minus B_lam(x)}``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    hi = R / 5.0
    v_hi = sphere_compare(w, x, hi, R, samples=samples).violation
    if v_hi <= tol:
        raise NoSignChange(f"no violation up to lambda = R/5 = {hi}", lower_bound=hi)
    lo, v_lo = 0.0, 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v = sphere_compare(w, x, mid, R, samples=samples).violation
        if v <= tol:
            lo, v_lo = mid, v
        else:
            hi, v_hi = mid, v
    alpha, err = alpha_estimate(w, R, n, samples)
    return CriticalRadiusResult(x, 0.5 * (lo + hi), (lo, hi), alpha, err, (v_lo, v_hi))


# ---------------------------------------------------------------------------
# radial symmetry


@dataclass
class RadialSymmetryResult:
    consistent: bool
    worst_violation: float
    witness: dict | None
    anisotropy: float
    nonincreasing: bool
    checked: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "consistent": self.consistent,
            "worst_violation": self.worst_violation,
            "witness": self.witness,
            "anisotropy": self.anisotropy,
            "nonincreasing": self.nonincreasing,
            "checked": self.checked,
        }


def radial_symmetry_test(
    w,
    nu: float,
    n: int,
    radii=(0.25, 0.5, 1.0, 2.0),
    trials: int = 20_000,
    x_radius: float = 2.0,
    y_radius: float = 4.0,
    all_centers: bool = False,
    tol: float = 1e-9,
    seed: int = 0,
) -> RadialSymmetryResult:
    """Sample ``(lam/|y-x|)^nu w(x + lam^2 (y-x)/|y-x|^2) <= w(y)``.

    By default ``0 < lam <= |x|`` and ``y`` avoids ``B_lam(x)`` and the
    origin.  With ``all_centers`` the radius is unrestricted (up to
    ``x_radius``), which is the hypothesis forcing constancy.  Separately
    measures ``(max - min)/mean`` of ``w`` on the spheres ``|y| = r``.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((trials, n))
    x *= (x_radius * rng.random((trials, 1)) ** (1.0 / n)) / np.linalg.norm(x, axis=1, keepdims=True)
    cap = x_radius if all_centers else np.linalg.norm(x, axis=1)
    lam = cap * rng.uniform(0.02, 1.0, trials)
    lam = np.maximum(lam, 1e-6)
    d = rng.standard_normal((trials, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    dist = lam * (1.0 + rng.exponential(1.0, trials) * y_radius / np.maximum(lam, 1e-3))
    y = x + dist[:, None] * d
    ok = (np.linalg.norm(y, axis=1) > 1e-6) & (np.linalg.norm(y, axis=1) <= 2 * y_radius)
    r2 = np.sum((y - x) ** 2, axis=1)
    z = x + (lam * lam / r2)[:, None] * (y - x)
    ok &= np.linalg.norm(z, axis=1) > 1e-6
    x, lam, y, z, r2 = x[ok], lam[ok], y[ok], z[ok], r2[ok]
    with np.errstate(all="ignore"):
        lhs = (lam / np.sqrt(r2)) ** nu * np.asarray(w(z))
        rhs = np.asarray(w(y))
        rel = (lhs - rhs) / np.abs(rhs)
    j = int(np.nanargmax(rel))
    worst = float(max(0.0, rel[j]))
    witness = None
    if worst > tol:
        witness = {"x": x[j].tolist(), "lambda": float(lam[j]), "y": y[j].tolist(), "relative_violation": worst}

    dirs = _directions(n, 200, seed + 7)
    aniso, means = 0.0, []
    for r in radii:
        vals = np.asarray(w(r * dirs))
        m = float(np.mean(vals))
        means.append(m)
        aniso = max(aniso, float((np.max(vals) - np.min(vals)) / m))
    nonincreasing = bool(np.all(np.diff(means) <= 1e-12 * np.abs(means[:-1])))
    consistent = worst <= tol and aniso <= max(tol, 1e-9)
    return RadialSymmetryResult(consistent, worst, witness, aniso, nonincreasing, int(ok.sum()))
