import numpy as np
import pytest

from confbubble.cones import sigma_k_root
from confbubble.opspec import compile_expr, parse_operator


def test_expression_language():
    f = compile_expr("sum + 2*max - min + sigma(2) + sumsq/n + sqrt(abs(l1)) + pow(l2, 2)", 3)
    lam = np.array([1.0, -2.0, 4.0])
    expect = 3 + 8 + 2 + (-2 - 8 + 4) + 21 / 3 + 1 + 4
    assert f(lam) == pytest.approx(expect)


@pytest.mark.parametrize("bad", ["__import__('os')", "l1.real", "foo(1)", "[1,2]", "l9"])
def test_expression_rejects(bad):
    with pytest.raises((ValueError, SyntaxError, KeyError, NameError)):
        compile_expr(bad, 3)


def test_parse_builtin():
    op = parse_operator('{"f": "sigma_k_root", "k": 2}', 4)
    assert op.scale == sigma_k_root(4, 2).scale


def test_parse_expr_is_normalised():
    op = parse_operator({"f": "expr", "expr": "sqrt(sigma(2))", "cone": "gamma_k", "k": 2}, 3)
    lam = np.array([[1.0, 2.0, 3.0], [0.3, 0.2, 0.9]])
    np.testing.assert_allclose(op(lam), sigma_k_root(3, 2)(lam), rtol=1e-12)


def test_parse_custom_cone():
    op = parse_operator({"f": "expr", "expr": "sigma(2) + 1", "cone": "expr", "cone_expr": "sum - max", "normalize": False}, 3)
    assert op.contains([1.0, 1.0, 1.0])
    assert not op.contains([1.0, 0.0, 0.0])


def test_parse_unknown():
    with pytest.raises(ValueError):
        parse_operator({"f": "nope"}, 3)
