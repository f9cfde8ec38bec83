import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from confbubble.blowup.bubbles import bubble, bubble_energy, bubble_values, standard_bubble
from confbubble.errors import NonFinite, OutOfDomain
from confbubble.fields import (
    GridField,
    argmax_on_ball,
    ball_energy,
    ball_values,
    constant_field,
    derivatives,
    fd_jet,
    function_field,
    grid_jet,
    radial_field,
    shell_energies,
    sum_fields,
    unit_ball_volume,
    unit_sphere_area,
)
from confbubble.mobius import BubbleParams


def _sympy_bubble_jet(n, center, mu, x):
    xs = sp.symbols(f"x1:{n + 1}")
    beta = sp.Rational(mu) ** sp.Rational(4, n - 2) if isinstance(mu, int) else sp.Float(mu) ** (sp.Rational(4, n - 2))
    r2 = sum((xi - ci) ** 2 for xi, ci in zip(xs, center))
    U = mu * (1 + beta * r2) ** sp.Rational(-(n - 2), 2)
    sub = dict(zip(xs, x))
    g = [float(sp.diff(U, a).subs(sub)) for a in xs]
    H = [[float(sp.diff(U, a, b).subs(sub)) for b in xs] for a in xs]
    return float(U.subs(sub)), np.array(g), np.array(H)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_bubble_jet_matches_symbolic(n):
    center = [sp.Rational(1, 10 * (i + 1)) for i in range(n)]
    x = [0.3, -0.2, 0.15, 0.05, -0.4][:n]
    v, g, H = _sympy_bubble_jet(n, center, 2, x)
    u = bubble(BubbleParams(np.array([float(c) for c in center]), 2.0))
    d = derivatives(u, np.array(x))
    assert d.value == pytest.approx(v, rel=1e-13)
    np.testing.assert_allclose(d.gradient, g, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(d.hessian, H, rtol=1e-11, atol=1e-11)


def test_bubble_jet_at_center_is_finite():
    d = derivatives(standard_bubble(3), np.zeros(3))
    assert d.value == 1.0
    np.testing.assert_allclose(d.gradient, 0.0)
    # U = (1+r^2)^(-1/2): U'' (0) = -1
    np.testing.assert_allclose(d.hessian, -np.eye(3), atol=1e-14)


def test_quadratic_exact_on_central2():
    g = GridField.centered(lambda p: np.sum(p * p, axis=-1), np.zeros(3), 1.0, 0.1)
    d = derivatives(g, np.array([0.3, -0.2, 0.1]))
    np.testing.assert_allclose(d.hessian, 2 * np.eye(3), atol=1e-10)
    np.testing.assert_allclose(d.gradient, [0.6, -0.4, 0.2], atol=1e-12)


def test_stencil_must_fit():
    g = GridField.centered(lambda p: np.ones(p.shape[:-1]), np.zeros(3), 0.3, 0.1)
    with pytest.raises(OutOfDomain):
        derivatives(g, np.array([0.3, 0.0, 0.0]))
    derivatives(g, np.array([0.2, 0.0, 0.0]))
    with pytest.raises(OutOfDomain):
        derivatives(g, np.array([0.2, 0.0, 0.0]), "central-4")


def test_nonfinite_grid_values():
    vals = np.ones((5, 5, 5))
    vals[2, 2, 3] = np.nan
    g = GridField(np.zeros(3), 0.1, vals)
    with pytest.raises(NonFinite):
        derivatives(g, np.array([0.2, 0.2, 0.2]))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_analytic_nonfinite():
    f = radial_field(np.zeros(3), lambda r: 1 / r, lambda r: -1 / r**3, lambda r: 2 / r**3)
    with pytest.raises(NonFinite):
        derivatives(f, np.zeros(3))


@pytest.mark.parametrize("scheme,order", [("central-2", 1.8), ("central-4", 3.6)])
def test_grid_derivative_convergence_order(scheme, order):
    U = standard_bubble(3)
    x = np.array([0.3, 0.2, -0.1])
    exact = derivatives(U, x)
    errs = []
    for h in (0.1, 0.05, 0.025):
        g = GridField.centered(U, x, 4 * h, h)
        d = derivatives(g, x, scheme)
        errs.append(np.max(np.abs(d.hessian - exact.hessian)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates >= order)


def test_grid_jet_matches_pointwise():
    U = standard_bubble(3)
    g = GridField.centered(U, np.zeros(3), 0.5, 0.1)
    inner, v, grad, hess = grid_jet(g, "central-4")
    idx = (1, 2, 3)
    x = g.node(tuple(i + s.start for i, s in zip(idx, inner)))
    d = derivatives(g, x, "central-4")
    assert v[idx] == d.value
    np.testing.assert_allclose(grad[idx], d.gradient, rtol=1e-12)
    np.testing.assert_allclose(hess[idx], d.hessian, rtol=1e-12, atol=1e-12)


def test_fd_jet_against_closure():
    U = standard_bubble(4)
    x = np.array([[0.2, 0.1, -0.3, 0.4]])
    v, g, H = fd_jet(U, x, 1e-3)
    v0, g0, H0 = U.jet(x)
    np.testing.assert_allclose(g, g0, atol=1e-9)
    np.testing.assert_allclose(H, H0, atol=1e-7)


def test_function_field_and_sum():
    f = function_field(3, lambda p: np.exp(p[..., 0]))
    d = derivatives(f, np.array([0.1, 0.0, 0.0]))
    assert d.hessian[0, 0] == pytest.approx(np.exp(0.1), rel=1e-7)
    s = sum_fields(constant_field(3, 2.0), standard_bubble(3))
    assert s(np.zeros(3)) == pytest.approx(3.0)


def test_interpolation_is_exact_at_nodes_and_multilinear():
    g = GridField.centered(lambda p: 1 + p[..., 0] + 2 * p[..., 1] - p[..., 2], np.zeros(3), 1.0, 0.25)
    pts = np.array([[0.1, -0.33, 0.71], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(g(pts), 1 + pts[:, 0] + 2 * pts[:, 1] - pts[:, 2], rtol=1e-14)


def test_sphere_constants():
    assert unit_sphere_area(3) == pytest.approx(4 * np.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * np.pi / 3)
    assert unit_sphere_area(5) == pytest.approx(5 * unit_ball_volume(5))


def test_argmax_tie_break_is_lexicographic():
    g = GridField(np.zeros(3) - 1, 0.5, np.zeros((5, 5, 5)))
    x, v = argmax_on_ball(g, np.zeros(3), 1.0)
    np.testing.assert_allclose(x, [-1.0, 0.0, 0.0])


def test_argmax_analytic_polish():
    u = bubble(BubbleParams(np.array([0.123, -0.05, 0.2]), 3.0))
    x, v = argmax_on_ball(u, np.zeros(3), 1.0)
    np.testing.assert_allclose(x, [0.123, -0.05, 0.2], atol=1e-6)
    assert v == pytest.approx(3.0, rel=1e-10)


def test_argmax_exclusion():
    g = GridField.centered(lambda p: bubble_values(np.array([0.5, 0, 0]), 5.0, p) + bubble_values(np.array([-0.5, 0, 0]), 2.0, p), np.zeros(3), 1.2, 0.05)
    x1, _ = argmax_on_ball(g, np.zeros(3), 1.0)
    x2, _ = argmax_on_ball(g, np.zeros(3), 1.0, exclude=[(x1, 0.4)])
    np.testing.assert_allclose(x1, [0.5, 0, 0], atol=1e-12)
    np.testing.assert_allclose(x2, [-0.5, 0, 0], atol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_radial_energy_matches_quadrature(n):
    # the bubble energy is scale invariant; energy of U^{0,mu} on B_r equals that of U on B_{r mu^(2/(n-2))}
    mu = 4.0
    u = bubble(BubbleParams(np.zeros(n), mu))
    e = ball_energy(u, np.zeros(n), 0.5, 2 * n / (n - 2))
    assert e == pytest.approx(bubble_energy(n, 0.5 * mu ** (2 / (n - 2))), rel=1e-6)


def test_bubble_total_energy_n3():
    # oracle: 4 pi int r^2 (1+r^2)^-3 dr = pi^2/4
    assert bubble_energy(3) == pytest.approx(np.pi**2 / 4, rel=1e-10)


def test_grid_energy_constant():
    g = GridField.centered(lambda p: np.ones(p.shape[:-1]), np.zeros(3), 1.2, 0.02)
    e = ball_energy(g, np.zeros(3), 1.0, 6)
    assert e == pytest.approx(4 * np.pi / 3, rel=2e-3)
    with pytest.raises(OutOfDomain):
        ball_energy(g, np.zeros(3), 1.5, 6)


def test_shell_energies_sum_to_ball():
    g = GridField.centered(standard_bubble(3), np.zeros(3), 2.0, 0.05)
    edges = np.linspace(0.5, 2, 7)
    shells = shell_energies(g, np.zeros(3), edges, 6)
    whole = ball_energy(g, np.zeros(3), 2.0, 6) - ball_energy(g, np.zeros(3), 0.5, 6)
    assert shells.sum() == pytest.approx(whole, rel=1e-12)


@given(st.floats(0.1, 2.0), st.floats(-1, 1), st.floats(-1, 1))
def test_ball_values_inside(radius, a, b):
    g = GridField.centered(standard_bubble(3), np.zeros(3), 2.0, 0.1)
    c = np.array([a, b, 0.0])
    pts, vals = ball_values(g, c, radius)
    assert np.all(np.linalg.norm(pts - c, axis=1) <= radius * (1 + 1e-9))
    np.testing.assert_allclose(vals, bubble_values(np.zeros(3), 1.0, pts), rtol=1e-12)
