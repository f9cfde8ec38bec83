"""Mobius maps, the conformal pushforward of fields and Kelvin reflections.

A map is an ordered list of atoms applied left to right.  Each atom has a
linear scale factor ``s`` (``|D phi| = s`` times an orthogonal matrix), so
the Jacobian determinant is ``s**n`` and the pushforward is
``u_phi = s**((n-2)/2) * u(phi(x))``.  Derivatives of pushforwards are
propagated exactly through the chain rule atom by atom.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conformal import conformal_hessian_arrays, eigenvalues
from .errors import Singularity
from .fields import AnalyticField

SINGULAR_RADIUS = 1e-14


@dataclass(frozen=True)
class Translate:
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in np.ravel(self.b)))

    def apply(self, x):
        return x + np.asarray(self.b)

    def scale(self, x):
        return np.ones(x.shape[:-1])

    def to_json(self):
        return {"translate": list(self.b)}


@dataclass(frozen=True)
class Dilate:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("dilation factor must be positive")
        object.__setattr__(self, "a", float(self.a))

    def apply(self, x):
        return self.a * x

    def scale(self, x):
        return np.full(x.shape[:-1], self.a)

    def to_json(self):
        return {"dilate": self.a}


@dataclass(frozen=True)
class Invert:
    def apply(self, x):
        r2 = _check_r2(x)
        return x / r2[..., None]

    def scale(self, x):
        return 1.0 / _check_r2(x)

    def to_json(self):
        return {"invert": True}


Atom = Translate | Dilate | Invert


def _check_r2(x):
    r2 = np.einsum("...i,...i->...", x, x)
    if np.any(r2 <= SINGULAR_RADIUS**2):
        raise Singularity("point mapped through the inversion centre")
    return r2


@dataclass(frozen=True)
class MobiusMap:
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def then(self, other: "MobiusMap") -> "MobiusMap":
        """The map applying ``self`` first and ``other`` second."""
        return MobiusMap(self.atoms + other.atoms)

    def to_json(self) -> list:
        return [a.to_json() for a in self.atoms]

    @classmethod
    def from_json(cls, data) -> "MobiusMap":
        if isinstance(data, str):
            data = json.loads(data)
        atoms = []
        for item in data:
            if "translate" in item:
                atoms.append(Translate(item["translate"]))
            elif "dilate" in item:
                atoms.append(Dilate(item["dilate"]))
            elif item.get("invert"):
                atoms.append(Invert())
            else:
                raise ValueError(f"unknown atom {item!r}")
        return cls(tuple(atoms))


def apply(phi: MobiusMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    for a in phi.atoms:
        x = a.apply(x)
    return x


def scale_factor(phi: MobiusMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s = np.ones(x.shape[:-1])
    for a in phi.atoms:
        s = s * a.scale(x)
        x = a.apply(x)
    return s


def jacobian_factor(phi: MobiusMap, x):
    """``|det D phi(x)|``."""
    x = np.asarray(x, dtype=float)
    out = scale_factor(phi, x) ** x.shape[-1]
    return float(out) if out.ndim == 0 else out


def _push_atom(jet, atom, n):
    """Jet of ``w_atom`` given the jet function of ``w``."""
    if isinstance(atom, Translate):
        return lambda x: jet(atom.apply(x))
    if isinstance(atom, Dilate):
        a = atom.a
        c = a ** ((n - 2) / 2)

        def pushed(x):
            v, g, h = jet(a * x)
            return c * v, c * a * g, c * a * a * h

        return pushed

    eye = np.eye(n)

    def pushed(x):
        r2 = _check_r2(x)
        y = x / r2[..., None]
        v, g, h = jet(y)
        r = np.sqrt(r2)
        P = r ** (2 - n)
        dP = ((2 - n) * r ** (-n))[..., None] * x
        xh = x / r[..., None]
        ddP = ((2 - n) * r ** (-n))[..., None, None] * (eye - n * xh[..., :, None] * xh[..., None, :])
        Dy = (eye - 2 * xh[..., :, None] * xh[..., None, :]) / r2[..., None, None]
        gy = np.einsum("...ki,...k->...i", Dy, g)
        # second derivatives of y_k: d_i d_j y_k
        r4 = (r2 * r2)[..., None, None, None]
        r6 = (r2 * r2 * r2)[..., None, None, None]
        xi = x[..., :, None, None]
        xj = x[..., None, :, None]
        xk = x[..., None, None, :]
        dik = eye[:, None, :]
        djk = eye[None, :, :]
        dij = eye[:, :, None]
        ddy = -2 * (dik * xj + djk * xi + xk * dij) / r4 + 8 * xi * xj * xk / r6
        hess = (
            ddP * v[..., None, None]
            + dP[..., :, None] * gy[..., None, :]
            + gy[..., :, None] * dP[..., None, :]
            + P[..., None, None] * (np.einsum("...ki,...kl,...lj->...ij", Dy, h, Dy) + np.einsum("...ijk,...k->...ij", ddy, g))
        )
        return P * v, dP * v[..., None] + P[..., None] * gy, hess

    return pushed


def pushforward(u: AnalyticField, phi: MobiusMap) -> AnalyticField:
    """``u_phi = |J_phi|^((n-2)/(2n)) u o phi`` with exact chain-rule derivatives."""
    n = u.n
    jet = u.jet
    for atom in reversed(phi.atoms):
        jet = _push_atom(jet, atom, n)
    final = jet
    return AnalyticField(
        n,
        lambda x: final(np.asarray(x, dtype=float))[0],
        lambda x: final(np.asarray(x, dtype=float))[1],
        lambda x: final(np.asarray(x, dtype=float))[2],
        jet=lambda x: final(np.asarray(x, dtype=float)),
        label=f"{u.label}_phi",
    )


def kelvin_map(x, lam: float) -> MobiusMap:
    """``y -> x + lam^2 (y - x)/|y - x|^2`` as an atom list."""
    if not lam > 0:
        raise ValueError("reflection radius must be positive")
    x = np.asarray(x, dtype=float)
    return MobiusMap((Translate(-x), Invert(), Dilate(lam * lam), Translate(x)))


def kelvin_reflect(w: AnalyticField, x, lam: float) -> AnalyticField:
    """``w_{x,lam}(y) = (lam/|y-x|)^(n-2) w(x + lam^2 (y-x)/|y-x|^2)``."""
    return pushforward(w, kelvin_map(x, lam))


def kelvin_values(w, x, lam: float, y) -> np.ndarray:
    """Values of ``w_{x,lam}`` at ``y`` for any vectorised callable ``w``."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(y, dtype=float) - x
    r2 = _check_r2(d)
    n = d.shape[-1]
    return (lam * lam / r2) ** ((n - 2) / 2) * w(x + (lam * lam / r2)[..., None] * d)


def invariance_check(u: AnalyticField, phi: MobiusMap, points) -> float:
    """Max over points of the sup-norm gap between sorted eigenvalues of
    ``A^{u_phi}(x)`` and ``A^u(phi(x))``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lhs = eigenvalues(conformal_hessian_arrays(*pushforward(u, phi).jet(pts)))
    rhs = eigenvalues(conformal_hessian_arrays(*u.jet(apply(phi, pts))))
    return float(np.max(np.abs(lhs - rhs)))


def random_map(n: int, rng: np.random.Generator, length: int = 4) -> MobiusMap:
    atoms = []
    for _ in range(length):
        kind = rng.integers(3)
        if kind == 0:
            atoms.append(Translate(rng.uniform(-1, 1, n)))
        elif kind == 1:
            atoms.append(Dilate(float(np.exp(rng.uniform(-1, 1)))))
        else:
            atoms.append(Invert())
    return MobiusMap(tuple(atoms))


# ---------------------------------------------------------------------------
# bubbles in parameter form


@dataclass(frozen=True)
class BubbleParams:
    """``U^{center, mu}(x) = mu U(mu^(2/(n-2)) (x - center))``."""

    center: tuple
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))
        if not self.mu > 0:
            raise ValueError("bubble height mu must be positive")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def n(self) -> int:
        return len(self.center)

    def ab(self) -> tuple:
        """``(a, b)`` with ``U^{c,mu} = (a / (1 + b^2 |x-c|^2))^((n-2)/2)``; here a = b."""
        a = self.mu ** (2.0 / (self.n - 2))
        return a, a

    @classmethod
    def from_ab(cls, center, a: float, b: float, n: int | None = None):
        """Inverse of :meth:`ab`; requires ``a == b`` up to rounding."""
        center = tuple(np.ravel(center))
        n = n or len(center)
        if not np.isclose(a, b, rtol=1e-9):
            raise ValueError("only the a = b family are standard bubbles")
        return cls(center, a ** ((n - 2) / 2.0))


def bubble_map(params: BubbleParams) -> MobiusMap:
    return MobiusMap((Translate(-np.asarray(params.center)), Dilate(params.mu ** (2.0 / (params.n - 2)))))


def fit_vform(values, points, n: int):
    """Fit ``(a/(1 + b^2|y - c|^2))^((n-2)/2)`` to samples.

    ``v^(-2/(n-2))`` is the quadratic ``(1 + b^2|y-c|^2)/a``; a linear
    least-squares fit of that quadratic gives ``(c, a, b)``.  Returns
    ``(center, a, b, max relative residual)``.
    """
    pts = np.asarray(points, dtype=float)
    v = np.asarray(values, dtype=float)
    q = v ** (-2.0 / (n - 2))
    design = np.column_stack([np.sum(pts**2, axis=1), pts, np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(design, q, rcond=None)
    alpha, beta, gamma = coef[0], coef[1:-1], coef[-1]
    center = -beta / (2 * alpha)
    inv_a = gamma - alpha * float(center @ center)
    a = 1.0 / inv_a
    b = np.sqrt(alpha * a)
    model = (a / (1 + b * b * np.sum((pts - center) ** 2, axis=1))) ** ((n - 2) / 2)
    return center, a, b, float(np.max(np.abs(model - v) / v))
