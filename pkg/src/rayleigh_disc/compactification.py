"""Poincare compactification in the local charts U1, U2, U3 and V1, V2, V3.

For a field ``(P, Q)`` of degree ``d`` the chart expressions are, after the
positive time factor has been removed,

* U1: ``u' = v^d (-u P(1/v, u/v) + Q(1/v, u/v))``, ``v' = -v^(d+1) P(1/v, u/v)``
* U2: ``u' = v^d (P(u/v, 1/v) - u Q(u/v, 1/v))``, ``v' = -v^(d+1) Q(u/v, 1/v)``
* U3: ``u' = P(u, v)``, ``v' = Q(u, v)``

and ``V_k = (-1)^(d-1) U_k``. Every substitution is a monomial remapping, so
the results are exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .localanalysis import EquilibriumReport, classify_equilibrium
from .poly import Poly, is_symbolic
from .vectorfield import PlanarPolySystem

__all__ = [
    "ChartId",
    "ChartSystem",
    "chart_system",
    "infinite_equilibria",
    "orientation_factor",
    "real_roots",
    "chart_transition_u1_to_u2",
    "equator_invariant",
    "compatibility_residual",
]


class ChartId(str, enum.Enum):
    U1 = "U1"
    U2 = "U2"
    U3 = "U3"
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"

    def __str__(self) -> str:
        return self.value

    @property
    def index(self) -> int:
        return int(self.value[1])

    @property
    def opposite(self) -> ChartId:
        return ChartId(("V" if self.value[0] == "U" else "U") + self.value[1])


@dataclass(frozen=True)
class ChartSystem:
    chart: ChartId
    du: Poly
    dv: Poly
    source_degree: int
    time_factor: str = "(1 + u^2 + v^2)^((1 - d)/2) removed"

    @property
    def system(self) -> PlanarPolySystem:
        return PlanarPolySystem(self.du, self.dv, name=f"chart {self.chart}")

    def to_json(self) -> dict:
        return {"chart": str(self.chart), "P": self.du.to_json(), "Q": self.dv.to_json(),
                "d": self.source_degree}

    @classmethod
    def from_json(cls, obj: dict) -> ChartSystem:
        return cls(ChartId(obj["chart"]), Poly.from_json(obj["P"]), Poly.from_json(obj["Q"]),
                   int(obj["d"]))


def orientation_factor(d: int) -> int:
    if d < 1:
        raise ValueError("degree must be >= 1")
    return 1 if (d - 1) % 2 == 0 else -1


def chart_system(sys_: PlanarPolySystem, chart: ChartId | str) -> ChartSystem:
    chart = ChartId(chart)
    d = sys_.d
    if d < 1:
        raise ValueError("constant field: compactification undefined for d = 0")
    P, Q = sys_.P, sys_.Q
    k = chart.index
    if k == 1:
        # x^i y^j at (1/v, u/v), times v^d -> u^j v^(d-i-j)
        sub = lambda i, j, c: (j, d - i - j, c)  # noqa: E731
        Pc, Qc = P.remap(sub), Q.remap(sub)
        du = Qc - Poly.x() * Pc
        dv = -(Poly.y() * Pc)
    elif k == 2:
        sub = lambda i, j, c: (i, d - i - j, c)  # noqa: E731
        Pc, Qc = P.remap(sub), Q.remap(sub)
        du = Pc - Poly.x() * Qc
        dv = -(Poly.y() * Qc)
    else:
        du, dv = P, Q
    if chart.value[0] == "V":
        s = orientation_factor(d)
        du, dv = du * s, dv * s
    return ChartSystem(chart, du, dv, d)


def real_roots(coeffs: dict[int, object]) -> list:
    """Real roots of ``sum c_k u^k``; rational roots come back as Fractions.

    Rational roots are found exactly by factoring over Q; the remaining real
    roots are isolated exactly and refined to double precision.
    """
    if not coeffs:
        raise ValueError("identically zero polynomial has no isolated roots")
    if any(is_symbolic(c) for c in coeffs.values()):
        raise ValueError("root finding needs numeric coefficients")
    u = sympy.Symbol("u")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * u**k for k, c in coeffs.items())
    poly = sympy.Poly(expr, u)
    if poly.degree() < 1:
        return []
    out = []
    for root in sorted(set(poly.real_roots()), key=lambda r: float(r)):
        if root.is_Rational:
            out.append(Fraction(int(root.p), int(root.q)))
        else:
            out.append(float(root.evalf(30)))
    return out


def infinite_equilibria(sys_: PlanarPolySystem) -> list[tuple[ChartId, tuple, EquilibriumReport]]:
    """Singular points on the equator, each followed by its diametral opposite.

    Chart U1 is searched along all of ``v = 0``; only the origin of U2 is
    needed on top of that, since it is the one direction U1 does not see.
    """
    d = sys_.d
    out = []
    u1 = chart_system(sys_, ChartId.U1)
    on_equator = u1.du.along_axis(0)
    if not on_equator:
        raise ValueError("the whole equator consists of singular points")
    for u0 in real_roots(on_equator):
        out.extend(_pair(sys_, ChartId.U1, (u0, Fraction(0)), d))
    u2 = chart_system(sys_, ChartId.U2)
    if u2.du.coeff(0, 0) == 0 and u2.dv.coeff(0, 0) == 0:
        out.extend(_pair(sys_, ChartId.U2, (Fraction(0), Fraction(0)), d))
    return out


def _pair(sys_, chart: ChartId, point, d):
    res = []
    for ch in (chart, chart.opposite):
        cs = chart_system(sys_, ch)
        rep = classify_equilibrium(cs.system, point, chart=str(ch))
        res.append((ch, point, rep))
    return res


def chart_transition_u1_to_u2(u: float, v: float, du: float, dv: float):
    """Map a U1 point and tangent vector into U2 coordinates.

    The overlap needs ``u != 0``; the U2 coordinates are ``(1/u, v/u)``.
    """
    U, V = 1.0 / u, v / u
    J = np.array([[-1.0 / u**2, 0.0], [-v / u**2, 1.0 / u]])
    return (U, V), J @ np.array([du, dv])


def equator_invariant(cs: ChartSystem) -> bool:
    """``v' = 0`` on ``v = 0``, checked on coefficients."""
    return not cs.dv.along_axis(0)


def compatibility_residual(sys_: PlanarPolySystem, u: float, v: float) -> float:
    """Mismatch of the U1 field, pushed to U2 coordinates, with the field there.

    Both vectors are normalized, so a positive scalar factor between them
    gives zero. The image point has ``V = v/u``; when ``u < 0`` it lies in
    chart V2, whose field is ``(-1)^(d-1)`` times the U2 expression.
    """
    if u == 0 or v <= 0:
        raise ValueError("the overlap needs u != 0 and v > 0")
    u1 = chart_system(sys_, ChartId.U1)
    w = np.array([u1.du(u, v), u1.dv(u, v)])
    (U, V), pushed = chart_transition_u1_to_u2(u, v, w[0], w[1])
    target = chart_system(sys_, ChartId.U2 if V > 0 else ChartId.V2)
    z = np.array([target.du(U, V), target.dv(U, V)])
    npush, nz = np.hypot(*pushed), np.hypot(*z)
    if npush == 0 or nz == 0:
        return float(abs(npush - nz))
    return float(np.hypot(*(pushed / npush - z / nz)))
