"""Conformal Hessian, operator residuals and a viscosity checker."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import OperatorSpec
from .errors import NonPositiveValue
from .fields import AnalyticField, DerivativeBundle, GridField, ScalarField, ball_values, derivatives, grid_jet


def conformal_hessian_arrays(v, grad, hess) -> np.ndarray:
    """Vectorised conformal Hessian for arrays of jets (shapes (...), (..., n), (..., n, n))."""
    v = np.asarray(v, dtype=float)
    grad = np.asarray(grad, dtype=float)
    hess = np.asarray(hess, dtype=float)
    n = grad.shape[-1]
    if np.any(v <= 0):
        raise NonPositiveValue("conformal Hessian needs u > 0")
    a = (-2.0 / (n - 2)) * v ** (-(n + 2) / (n - 2))
    b = v ** (-2.0 * n / (n - 2)) / (n - 2) ** 2
    g2 = np.einsum("...i,...i->...", grad, grad)
    out = (
        a[..., None, None] * hess
        + (2.0 * n * b)[..., None, None] * grad[..., :, None] * grad[..., None, :]
        - (2.0 * b * g2)[..., None, None] * np.eye(n)
    )
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def conformal_hessian(bundle: DerivativeBundle) -> np.ndarray:
    if bundle.value <= 0:
        raise NonPositiveValue(f"conformal Hessian needs u > 0, got {bundle.value}")
    return conformal_hessian_arrays(bundle.value, bundle.gradient, bundle.hessian)


def eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of symmetric matrices (batched over leading axes)."""
    m = np.asarray(m, dtype=float)
    return np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))


@dataclass(frozen=True)
class Residual:
    """``in_cone`` False means the eigenvalues left the cone (value is None)."""

    in_cone: bool
    value: float | None
    eigenvalues: np.ndarray

    def to_dict(self) -> dict:
        return {"in_cone": self.in_cone, "residual": self.value, "eigenvalues": self.eigenvalues.tolist()}


def operator_residual(op: OperatorSpec, u: ScalarField, x, scheme: str = "central-2") -> Residual:
    lam = eigenvalues(conformal_hessian(derivatives(u, x, scheme)))
    if not op.contains(lam):
        return Residual(False, None, lam)
    return Residual(True, op(lam) - 1.0, lam)


@dataclass
class OperatorResidualField:
    """``f(lambda(A^u)) - 1`` at interior grid nodes; NaN where ``mask`` is False."""

    origin: np.ndarray
    h: float
    values: np.ndarray
    mask: np.ndarray

    def to_grid(self) -> GridField:
        return GridField(self.origin, self.h, self.values)


def residual_field(op: OperatorSpec, u: GridField, scheme: str = "central-2") -> OperatorResidualField:
    inner, v, g, hs = grid_jet(u, scheme)
    lam = eigenvalues(conformal_hessian_arrays(v, g, hs))
    mask = np.asarray(op.contains(lam), dtype=bool)
    with np.errstate(all="ignore"):
        vals = np.where(mask, np.asarray(op(lam), dtype=float) - 1.0, np.nan)
    origin = u.origin + u.h * np.array([s.start for s in inner])
    return OperatorResidualField(origin, u.h, vals, mask)


# ---------------------------------------------------------------------------
# viscosity checker


@dataclass(frozen=True)
class QuadraticLattice:
    """Bounded lattice of quadratic test functions around FD estimates.

    Gradients: ``p0 + p_span * g * k`` with integer ``|k_i| <= p_steps``,
    where ``g = max(|p0|, u(x0))``.  Hessians: ``M0 + s I + t d d^T`` with
    ``s, t`` in ``m_span * m * linspace(-1, 1, m_steps)``, ``m = max(|M0|, u(x0))``
    and ``d`` ranging over the coordinate axes and the diagonals
    ``(e_i +- e_j)/sqrt(2)``.
    """

    p_steps: int = 2
    p_span: float = 0.1
    m_steps: int = 9
    m_span: float = 1.0

    def to_dict(self) -> dict:
        return {"p_steps": self.p_steps, "p_span": self.p_span, "m_steps": self.m_steps, "m_span": self.m_span}


@dataclass
class ViscosityResult:
    passed: bool
    side: str
    checked: int
    touching: int
    tol: float
    relax: float
    lattice: dict
    witness: dict | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "side": self.side,
            "checked": self.checked,
            "touching": self.touching,
            "tol": self.tol,
            "relax": self.relax,
            "lattice": self.lattice,
            "witness": self.witness,
        }


def _directions(n):
    eye = np.eye(n)
    dirs = [eye[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dirs.append((eye[i] + eye[j]) / np.sqrt(2))
            dirs.append((eye[i] - eye[j]) / np.sqrt(2))
    return np.array(dirs)


def viscosity_check(
    u: ScalarField,
    op: OperatorSpec,
    x0,
    side: str,
    radius: float | None = None,
    lattice: QuadraticLattice | None = None,
    tol: float = 1e-6,
    h: float = 0.02,
) -> ViscosityResult:
    """Search for a quadratic test function violating the viscosity inequality.

    ``side="super"``: every ``phi`` with ``phi(x0) = u(x0)`` and
    ``u - phi >= -tol`` on the sampled ball must have ``lambda(A^phi(x0))``
    in the closed cone with ``f >= 1 - tol``.  ``side="sub"``: every ``phi``
    with ``u - phi <= tol`` must have eigenvalues outside the closed cone or
    ``f <= 1 + tol``.

    Grid resolution cannot pin the Hessian below the scale ``2 tol / h^2``
    (plus the central-2/central-4 discrepancy at ``x0``), so each touching
    ``M`` is relaxed by that amount in the favourable direction before the
    test; only violations surviving the relaxation are reported.

    Analytic fields are sampled on a local grid of spacing ``h``.
    """
    if side not in ("super", "sub"):
        raise ValueError("side must be 'super' or 'sub'")
    lattice = lattice or QuadraticLattice(p_steps=2 if np.size(x0) <= 3 else 1)
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if isinstance(u, AnalyticField):
        u = GridField.centered(u.value, x0, 4 * h if radius is None else radius + 2 * h, h)
    x0 = u.node(u.nearest_index(x0))
    h = u.h
    radius = 3 * h if radius is None else radius
    d2 = derivatives(u, x0, "central-2")
    c = d2.value
    if c <= 0:
        raise NonPositiveValue("viscosity check needs u > 0")
    try:
        d4 = derivatives(u, x0, "central-4")
        fd_gap = float(np.linalg.norm(d4.hessian - d2.hessian, 2))
    except Exception:
        fd_gap = 0.0
    relax = 2.0 * tol / h**2 + fd_gap

    pts, vals = ball_values(u, x0, radius)
    keep = np.any(pts != x0, axis=1)
    D = pts[keep] - x0
    du = vals[keep] - c
    if np.any(vals <= 0):
        raise NonPositiveValue("viscosity check needs u > 0 on the ball")

    p0, M0 = d2.gradient, d2.hessian
    gscale = max(float(np.linalg.norm(p0)), c)
    mscale = max(float(np.linalg.norm(M0, 2)), c)
    ks = np.arange(-lattice.p_steps, lattice.p_steps + 1)
    offs = np.stack(np.meshgrid(*([ks] * n), indexing="ij"), axis=-1).reshape(-1, n)
    P = p0 + lattice.p_span * gscale * offs
    ts = lattice.m_span * mscale * np.linspace(-1.0, 1.0, lattice.m_steps)
    dirs = _directions(n)
    eye = np.eye(n)
    Ms = [M0 + s * eye + t * np.outer(d, d) for s in ts for t in ts for d in dirs]
    Ms = np.unique(np.round(np.array(Ms), 14), axis=0)

    lin = D @ P.T  # (m, P)
    quad = 0.5 * np.einsum("mi,qij,mj->mq", D, Ms, D)  # (m, Q)
    touch = np.zeros((P.shape[0], Ms.shape[0]), dtype=bool)
    chunk = max(1, 20_000_000 // max(1, D.shape[0] * Ms.shape[0]))
    for a in range(0, P.shape[0], chunk):
        gap = du[:, None, None] - lin[:, a : a + chunk, None] - quad[:, None, :]
        touch[a : a + chunk] = gap.min(axis=0) >= -tol if side == "super" else gap.max(axis=0) <= tol
    Mrel = Ms - relax * eye if side == "super" else Ms + relax * eye
    ip, iq = np.nonzero(touch)
    result = ViscosityResult(True, side, int(P.shape[0] * Ms.shape[0]), int(ip.size), tol, relax, lattice.to_dict())
    if ip.size == 0:
        result.notes.append("no lattice quadratic touches at x0")
        return result
    A = conformal_hessian_arrays(np.full(ip.size, c), P[ip], Mrel[iq])
    lam = eigenvalues(A)
    inside = np.asarray(op.contains(lam), dtype=bool) | np.asarray(op.cone.near_boundary(lam), dtype=bool)
    with np.errstate(all="ignore"):
        fv = np.where(inside, np.asarray(op(lam), dtype=float), np.nan)
    if side == "super":
        viol = np.where(inside, (1.0 - tol) - fv, np.inf)
    else:
        viol = np.where(inside, fv - (1.0 + tol), -np.inf)
    j = int(np.argmax(viol))
    if viol[j] > 0:
        result.passed = False
        result.witness = {
            "c": c,
            "p": P[ip[j]].tolist(),
            "M": Ms[iq[j]].tolist(),
            "side": side,
            "violation": float(viol[j]) if np.isfinite(viol[j]) else "outside-cone",
        }
    return result
