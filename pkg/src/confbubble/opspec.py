"""JSON declarations of operators and a tiny arithmetic expression language.

Expressions are evaluated on an eigenvalue array ``lam`` of shape (..., n).
Names: ``l1 .. ln`` (entries), ``n``; functions ``sum, sumsq, max, min,
pow, sqrt, abs, sigma(k)``; operators ``+ - * / **`` and unary minus.
"""
from __future__ import annotations

import ast
import json
import operator
from typing import Callable

import numpy as np

from .cones import CustomCone, GammaK, OperatorSpec, normalize, sigma1_over_2n, sigma2_plus_one, sigma_k_root, gamma1_counterexample, sigmas

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: np.power,
}


def compile_expr(text: str, n: int) -> Callable:
    """Compile ``text`` to a vectorised function of ``lam``."""
    tree = ast.parse(text, mode="eval")

    def ev(node, lam):
        if isinstance(node, ast.Expression):
            return ev(node.body, lam)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, lam), ev(node.right, lam))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, lam)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name):
            if node.id == "n":
                return float(n)
            if node.id.startswith("l") and node.id[1:].isdigit() and 1 <= int(node.id[1:]) <= n:
                return lam[..., int(node.id[1:]) - 1]
            if node.id == "sum":
                return np.sum(lam, axis=-1)
            if node.id == "sumsq":
                return np.sum(lam**2, axis=-1)
            if node.id == "max":
                return np.max(lam, axis=-1)
            if node.id == "min":
                return np.min(lam, axis=-1)
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            name = node.func.id
            args = [ev(a, lam) for a in node.args]
            if name == "pow" and len(args) == 2:
                return np.power(args[0], args[1])
            if name == "sqrt" and len(args) == 1:
                return np.sqrt(args[0])
            if name == "abs" and len(args) == 1:
                return np.abs(args[0])
            if name == "sigma" and len(node.args) == 1 and isinstance(node.args[0], ast.Constant):
                return sigmas(lam)[..., int(node.args[0].value)]
            if name in ("sum", "sumsq", "max", "min") and not args:
                return ev(ast.Name(id=name), lam)
            raise ValueError(f"unsupported call {name}()")
        raise ValueError(f"unsupported syntax: {ast.dump(node)}")

    ev(tree, np.ones((1, n)))  # validate eagerly

    def fn(lam):
        lam = np.asarray(lam, dtype=float)
        return np.broadcast_to(ev(tree, lam), lam.shape[:-1]) * 1.0

    return fn


def parse_cone(spec: dict, n: int):
    kind = spec.get("cone", "gamma_k")
    if kind == "gamma_k":
        return GammaK(int(spec.get("k", 1)))
    if kind == "expr":
        pred = compile_expr(spec["cone_expr"], n)
        return CustomCone(lambda lam: pred(lam) > 0, spec["cone_expr"] + " > 0")
    raise ValueError(f"unknown cone {kind!r}")


def parse_operator(spec: dict | str, n: int) -> OperatorSpec:
    """Build an operator from its JSON form.

    Builtins: ``sigma_k_root`` (needs ``k``), ``sigma1_over_2n``,
    ``sigma2_plus_one`` (not normalisable) and ``gamma1_counterexample``.
    ``{"f": "expr", "expr": ...}`` declares a custom f; it is normalised
    unless ``"normalize": false``.
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    f = spec.get("f", "sigma_k_root")
    if f == "sigma_k_root":
        return sigma_k_root(n, int(spec.get("k", 1)))
    if f == "sigma1_over_2n":
        return sigma1_over_2n(n)
    if f == "sigma2_plus_one":
        return sigma2_plus_one(n)
    if f == "gamma1_counterexample":
        return gamma1_counterexample(n)
    if f == "expr":
        op = OperatorSpec(parse_cone(spec, n), compile_expr(spec["expr"], n), name=spec["expr"])
        return normalize(op, n) if spec.get("normalize", True) else op
    raise ValueError(f"unknown operator f={f!r}")
