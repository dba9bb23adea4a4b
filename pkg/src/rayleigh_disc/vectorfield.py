"""Planar polynomial systems and the generalized Rayleigh family.

Two forms of the family are used throughout:

* ``eq1``: ``x' = y, y' = -x + a (1 - y^(2n)) y`` (the oscillator itself)
* ``eq2``: ``x' = y + a (x^(2n) - 1) x, y' = -x`` (its Lienard form)

``eq2`` is obtained from ``eq1`` by ``(x, y, t) -> (y, x, -t)``.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy

from .poly import Poly, exact, is_symbolic

__all__ = [
    "FORMS",
    "RayleighParams",
    "PlanarPolySystem",
    "rayleigh_system",
    "lienard_form",
    "build_system",
    "swap_reverse",
    "mirror_reverse",
    "reverse_time",
    "evaluate",
    "jacobian",
    "exact_jacobian",
    "symbol",
]

FORMS = ("eq1", "eq2")


@dataclass(frozen=True)
class RayleighParams:
    """Damping ``a`` and exponent ``n`` of ``x'' + x = a (1 - x'^(2n)) x'``.

    ``a`` may be a sympy symbol when a computation must hold for every value.
    """

    a: object
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, numbers.Integral):
            raise ValueError(f"n must be an integer, got {self.n!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if isinstance(self.a, bool):
            raise ValueError("a must be real")
        if not is_symbolic(self.a):
            if not isinstance(self.a, numbers.Real) or not math.isfinite(float(self.a)):
                raise ValueError(f"a must be a finite real, got {self.a!r}")

    @property
    def a_exact(self):
        return exact(self.a)

    @property
    def symbolic(self) -> bool:
        return is_symbolic(self.a)

    def sign(self) -> int:
        if self.symbolic:
            raise ValueError("sign of a symbolic parameter is undefined")
        a = self.a_exact
        return (a > 0) - (a < 0)


@dataclass(frozen=True)
class PlanarPolySystem:
    """``x' = P(x, y), y' = Q(x, y)`` with exact coefficients."""

    P: Poly
    Q: Poly
    name: str = ""

    @property
    def d(self) -> int:
        return max(self.P.degree, self.Q.degree)

    def components(self) -> tuple[Poly, Poly]:
        return self.P, self.Q

    @cached_property
    def partials(self) -> tuple[Poly, Poly, Poly, Poly]:
        """``(P_x, P_y, Q_x, Q_y)``."""
        return self.P.diff(0), self.P.diff(1), self.Q.diff(0), self.Q.diff(1)

    @cached_property
    def divergence(self) -> Poly:
        px, _, _, qy = self.partials
        return px + qy

    def field(self):
        """Fast float callable ``(x, y) -> (P, Q)``."""
        P, Q = self.P, self.Q

        def f(x, y):
            return P(x, y), Q(x, y)

        return f

    def subs(self, mapping: dict) -> PlanarPolySystem:
        return PlanarPolySystem(self.P.subs(mapping), self.Q.subs(mapping), self.name)

    def scaled(self, factor) -> PlanarPolySystem:
        return PlanarPolySystem(self.P * factor, self.Q * factor, self.name)

    def is_linear(self) -> bool:
        return self.d <= 1

    def to_json(self) -> dict:
        return {"P": self.P.to_json(), "Q": self.Q.to_json(), "d": self.d}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> PlanarPolySystem:
        sys_ = cls(Poly.from_json(obj["P"]), Poly.from_json(obj["Q"]))
        if "d" in obj and int(obj["d"]) != sys_.d:
            raise ValueError(f"stored degree {obj['d']} != recomputed {sys_.d}")
        return sys_

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlanarPolySystem):
            return NotImplemented
        return self.P == other.P and self.Q == other.Q

    def __hash__(self) -> int:
        return hash((self.P, self.Q))


def rayleigh_system(params: RayleighParams) -> PlanarPolySystem:
    a, n = params.a_exact, params.n
    P = Poly({(0, 1): 1})
    Q = Poly({(1, 0): -1, (0, 1): a, (0, 2 * n + 1): -a})
    return PlanarPolySystem(P, Q, name=f"eq1(a={params.a}, n={n})")


def lienard_form(params: RayleighParams) -> PlanarPolySystem:
    a, n = params.a_exact, params.n
    P = Poly({(0, 1): 1, (2 * n + 1, 0): a, (1, 0): -a})
    Q = Poly({(1, 0): -1})
    return PlanarPolySystem(P, Q, name=f"eq2(a={params.a}, n={n})")


def build_system(params: RayleighParams, form: str = "eq2") -> PlanarPolySystem:
    if form == "eq1":
        return rayleigh_system(params)
    if form == "eq2":
        return lienard_form(params)
    raise ValueError(f"form must be one of {FORMS}, got {form!r}")


def _swap(p: Poly) -> Poly:
    return p.remap(lambda i, j, c: (j, i, c))


def swap_reverse(sys_: PlanarPolySystem) -> PlanarPolySystem:
    """Image under ``(x, y, t) -> (y, x, -t)``; an involution."""
    return PlanarPolySystem(-_swap(sys_.Q), -_swap(sys_.P), sys_.name)


def mirror_reverse(sys_: PlanarPolySystem) -> PlanarPolySystem:
    """Image under ``(x, y, t) -> (-x, y, -t)``."""
    flip = lambda i, j, c: (i, j, c * (-1) ** i)  # noqa: E731
    return PlanarPolySystem(sys_.P.remap(flip), -sys_.Q.remap(flip), sys_.name)


def reverse_time(sys_: PlanarPolySystem) -> PlanarPolySystem:
    return PlanarPolySystem(-sys_.P, -sys_.Q, sys_.name)


def evaluate(sys_: PlanarPolySystem, pt) -> np.ndarray:
    x, y = float(pt[0]), float(pt[1])
    return np.array([sys_.P(x, y), sys_.Q(x, y)])


def jacobian(sys_: PlanarPolySystem, pt) -> np.ndarray:
    x, y = float(pt[0]), float(pt[1])
    px, py, qx, qy = sys_.partials
    return np.array([[px(x, y), py(x, y)], [qx(x, y), qy(x, y)]])


def exact_jacobian(sys_: PlanarPolySystem, pt) -> list[list]:
    """Jacobian in the coefficient domain; rational points give rational entries."""
    px, py, qx, qy = sys_.partials
    return [[px.exact_eval(*pt), py.exact_eval(*pt)],
            [qx.exact_eval(*pt), qy.exact_eval(*pt)]]


def symbol(name: str = "a"):
    """Real sympy symbol for symbolic-parameter constructions."""
    return sympy.Symbol(name, real=True)
