import math

import numpy as np
import pytest

from confbubble.blowup import (
    ExtractionConfig,
    bubble,
    bubble_closeness,
    bubble_energy,
    centered_liouville_check,
    eps_regularity_probe,
    extract_bubbles,
    holder_gauge,
    liouville_bounds,
    log_gradient_sup,
    quantitative_liouville,
    radial_shoot,
    rescaled,
    seminorm,
    standard_bubble,
    superposition,
)
from confbubble.cones import sigma1_over_2n, sigma_k_root
from confbubble.conformal import operator_residual
from confbubble.errors import NotCentered, OutOfDomain, PreconditionError
from confbubble.fields import GridField, constant_field, function_field
from confbubble.fixtures import capped_family, gen_fixture
from confbubble.mobius import BubbleParams


def _u3_energy(T):
    # oracle: antiderivative of 4 pi r^2 (1 + r^2)^-3
    return 4 * math.pi * (math.atan(T) + T * (T * T - 1) / (1 + T * T) ** 2) / 8


def test_bubble_values():
    assert standard_bubble(4).value(np.zeros(4)) == 1.0
    assert bubble(BubbleParams([0.3, 0.1, -0.2], 7.0)).value(np.array([0.3, 0.1, -0.2])) == 7.0


def test_bubble_energy_closed_form():
    assert bubble_energy(3) == pytest.approx(math.pi**2 / 4, rel=1e-12)
    for T in (0.5, 1.0, 3.0):
        assert bubble_energy(3, T) == pytest.approx(_u3_energy(T), rel=1e-12)


# closeness


def test_closeness_exact_bubble():
    u = bubble(BubbleParams([0.2, 0.0, 0.1], 3.0))
    assert bubble_closeness(u, [0.2, 0.0, 0.1], 0.1, 0.5).ratio < 1e-15


def test_closeness_scaled_bubble():
    eps, mu, rho = 0.2, 2.0, 0.6
    n = 3
    u = function_field(n, lambda p: (1 + eps / 2) * mu * (1 + mu**4 * np.sum(p * p, axis=-1)) ** -0.5)
    got = bubble_closeness(u, np.zeros(3), eps, rho, h=rho / 40).ratio
    # oracle: the ratio is radial, so scan r directly
    r = np.linspace(0, rho, 200001)
    top = (1 + eps / 2) * mu
    ref = top * (1 + top**4 * r * r) ** -0.5
    val = (1 + eps / 2) * mu * (1 + mu**4 * r * r) ** -0.5
    want = np.max(np.abs(val - ref) / ref)
    # lattice radii fall short of rho, so the sampled sup is slightly lower
    assert want * 0.9 <= got <= want * (1 + 1e-12)
    assert want > eps / 2


def test_closeness_two_bubbles_well_separated():
    u = superposition([BubbleParams([0.5, 0, 0], 50.0), BubbleParams([-0.5, 0, 0], 80.0)])
    assert bubble_closeness(u, [-0.5, 0, 0], 0.5, 0.125).passed


# extraction


def test_extract_single_bubble():
    f = gen_fixture("single-bubble", {"h": 0.02})
    rep = extract_bubbles(f.grid)
    assert rep.m == 1
    assert np.max(np.abs(rep.centers[0] - np.array([0.2, 0, 0]))) <= f.grid.h
    for flag in ("i_dominance", "iv_closeness", "vi_local_max", "budget"):
        assert rep.flags[flag]


def test_extract_two_bubbles():
    f = gen_fixture("two-bubble", {"h": 0.02})
    rep = extract_bubbles(f.grid)
    assert rep.m == 2
    got = sorted(tuple(np.round(c, 6)) for c in rep.centers)
    assert got == [(-0.5, 0.0, 0.0), (0.5, 0.0, 0.0)]
    assert rep.heights[0] / rep.heights[1] == pytest.approx(80 / 50, rel=0.1)
    assert rep.passed
    assert rep.margins["ii_separation"] >= 0


def test_extract_three_bubbles_and_core_distance():
    rep = extract_bubbles(gen_fixture("three-bubble", {"h": 0.02}).grid)
    assert rep.m == 3
    assert rep.heights == sorted(rep.heights, reverse=True)
    assert rep.flags["core_distance"]


def test_extract_below_threshold():
    f = gen_fixture("single-bubble", {"h": 0.05})
    rep = extract_bubbles(f.grid, ExtractionConfig(c_star=1e6))
    assert rep.status == "below-threshold" and rep.m == 0 and not rep.passed


def test_report_json_shape():
    rep = extract_bubbles(gen_fixture("single-bubble", {"h": 0.05}).grid)
    d = rep.to_dict()
    assert d["m"] == 1 and set(d["constants"]) >= {"eps", "C_star", "delta_star", "K_meas", "m_budget"}


# Liouville harnesses


def test_centered_liouville_exact():
    u = bubble(BubbleParams([0, 0, 0], 2.0))
    res = centered_liouville_check(u, 0.1, 2.0)
    assert res.best_delta == 1.0 and max(res.ratios) < 1e-14


def test_centered_liouville_taper():
    u = function_field(3, lambda p: (1 + 0.05 * np.sum(p * p, axis=-1)) * (1 + np.sum(p * p, axis=-1)) ** -0.5)
    res = centered_liouville_check(u, 0.1, 2.0, deltas=[0.25, 0.5], h=1 / 16)
    # oracle: the gap is exactly 0.05 |x|^2
    assert res.ratios[1] == pytest.approx(0.05, rel=1e-9)
    assert res.ratios[0] == pytest.approx(0.05 / 4, rel=1e-9)


def test_centered_liouville_shrinks_with_second_bubble():
    best = []
    for d in (1.6, 1.2, 0.8, 0.4):
        u = superposition([BubbleParams([0, 0, 0], 20.0), BubbleParams([d, 0, 0], 10.0)])
        res = centered_liouville_check(u, 0.2, 1.0, deltas=np.linspace(0.05, 1, 20), h=1 / 64)
        best.append(res.best_delta)
    assert best == sorted(best, reverse=True) and best[0] > best[-1]


def test_centered_liouville_not_centered():
    with pytest.raises(NotCentered):
        centered_liouville_check(bubble(BubbleParams([0.5, 0, 0], 2.0)), 0.1, 2.0)


def test_quantitative_liouville_on_bubble():
    r1 = 1.0
    # nodes on the sphere |x| = r1 may round a hair outward
    gamma = (1 - 1e-12) * float(standard_bubble(3).value(np.array([r1, 0, 0])))
    g = GridField.centered(standard_bubble(3).value, np.zeros(3), 2.1, 0.05)
    res = quantitative_liouville(g, gamma, r1, 0.1, 0.125, 16.0)
    assert res.passed
    np.testing.assert_allclose(res.x_bar, 0, atol=1e-12)
    assert liouville_bounds(3, gamma, r1) == (res.height_bound, res.position_bound)
    # oracle: 4 / (gamma r1) and 2 / gamma^2 for n = 3
    assert res.height_bound == pytest.approx(4 / gamma) and res.position_bound == pytest.approx(2 / gamma**2)


def test_quantitative_liouville_precondition():
    with pytest.raises(PreconditionError):
        quantitative_liouville(standard_bubble(3), 0.9, 1.0, 0.1, 0.125, 8.0)


# Hölder gauge


def test_gauge_constant_infinite():
    res = holder_gauge(lambda p: np.full(np.shape(p)[:-1], 3.0), np.zeros(3), 0.5)
    assert not res.finite


@pytest.mark.parametrize("c", [1.0, 2.5, 10.0])
def test_gauge_cone_closed_form(c):
    x = np.array([0.2, -0.1, 0.0])
    res = holder_gauge(lambda p: c * np.linalg.norm(p - x, axis=-1), x, 0.4)
    assert res.gauge == pytest.approx(1 / c, rel=1e-9)


def test_rescaled_seminorm_is_one():
    w = bubble(BubbleParams([0, 0, 0], 3.0)).value
    x = np.array([0.3, 0.2, 0.0])
    res = holder_gauge(w, x, 0.5)
    assert res.finite
    assert seminorm(rescaled(w, x, res.gauge), np.zeros(3), 0.5, 1.0) == pytest.approx(1.0, abs=1e-4)


def test_gauge_scaling():
    w = bubble(BubbleParams([0, 0, 0], 3.0)).value
    x = np.array([0.1, 0.05, 0.0])
    c = 2.0
    a = holder_gauge(w, x, 0.5)
    b = holder_gauge(lambda p: w(c * np.asarray(p)), x / c, 0.5)
    assert b.gauge == pytest.approx(a.gauge / c, rel=1e-6)


def test_gauge_outside_domain():
    with pytest.raises(OutOfDomain):
        holder_gauge(standard_bubble(3).value, np.array([2.5, 0, 0]), 0.5)


# energy probes


def test_eps_regularity_constant():
    res = eps_regularity_probe(constant_field(3, 1.0), 40.0)
    assert res.small and res.sup_b1 == 1.0
    assert res.energy == pytest.approx(4 * math.pi / 3 * 8, rel=1e-9)


def test_eps_regularity_bubble_sweep():
    total = math.pi**2 / 4
    energies = []
    for mu in (1.0, 4.0, 16.0, 64.0):
        res = eps_regularity_probe(bubble(BubbleParams([0, 0, 0], mu)), total / 2)
        assert res.sup_b1 == pytest.approx(mu)
        assert res.energy == pytest.approx(_u3_energy(2 * mu**2), rel=1e-9)
        energies.append(res.energy)
    assert np.all(np.diff(energies) > 0) and energies[-1] < total
    big = eps_regularity_probe(bubble(BubbleParams([0, 0, 0], 1e4)), total / 2)
    assert big.kind == "LargeEnergy"


@pytest.mark.parametrize("cap", [2.0, 4.0, 8.0])
def test_gradient_estimate_sweep(cap):
    # |grad ln U^{c,mu}| <= mu^(2/(n-2)) / 2 for n = 3, whatever the centre; sums keep the max
    sups = [log_gradient_sup(superposition(capped_family(3, 3, cap, s))) for s in range(6)]
    assert max(sups) <= cap**2 / 2 * (1 + 1e-9)


# radial shooting


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (3, 3), (4, 2), (5, 3), (5, 5)])
def test_radial_shoot_recovers_bubble(n, k):
    op = sigma1_over_2n(n) if k == 1 else sigma_k_root(n, k)
    prof = radial_shoot(op, n, 1.0)
    r = np.linspace(0, min(10.0, prof.r[-1]), 400)
    v = prof.evaluate(r)[0]
    assert np.max(np.abs(v - (1 + r * r) ** (-(n - 2) / 2))) < 1e-4


def test_radial_shoot_scaling():
    mu, n = 3.0, 3
    prof = radial_shoot(sigma_k_root(n, 2), n, mu)
    r = np.linspace(0, 2.0, 100)
    ref = mu * (1 + mu**4 * r * r) ** -0.5
    np.testing.assert_allclose(prof.evaluate(r)[0], ref, rtol=1e-6, atol=1e-8)


def test_radial_shoot_self_consistent():
    n = 4
    op = sigma_k_root(n, 2)
    prof = radial_shoot(op, n, 1.0)
    u = prof.as_field()
    rng = np.random.default_rng(0)
    for r in np.linspace(0.05, 5.0, 100):
        d = rng.standard_normal(n)
        res = operator_residual(op, u, r * d / np.linalg.norm(d))
        assert res.in_cone and abs(res.value) <= 1e-6
    assert np.max(np.abs(prof.residual)) <= 1e-6


def test_radial_shoot_needs_normalised_op():
    from confbubble.cones import GammaK, OperatorSpec, sigmas

    raw = OperatorSpec(GammaK(2), lambda lam: np.sqrt(np.maximum(sigmas(lam)[..., 2], 0)))
    with pytest.raises(ValueError):
        radial_shoot(raw, 3, 1.0)
