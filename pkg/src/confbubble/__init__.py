"""Numerical checks for conformally invariant fully nonlinear elliptic operators.

Submodules load on first attribute access so that ``confbubble.cli`` can set
thread limits before numpy starts.
"""
from importlib import import_module

__version__ = "0.1.0"

_SUBMODULES = (
    "blowup",
    "cli",
    "cones",
    "conformal",
    "errors",
    "fields",
    "fixtures",
    "gridio",
    "harmonic",
    "mobius",
    "opspec",
    "symmetry",
)


def __getattr__(name):
    if name in _SUBMODULES:
        return import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = list(_SUBMODULES)
