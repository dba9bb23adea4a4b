"""Local phase portraits of equilibria.

Nondegenerate points are read off the trace and determinant of the linear part.
Semi-hyperbolic points (one zero eigenvalue) are classified from the leading
term of the reduced field on the invariant curve, and the degenerate point at
the origin of chart U2 of the Lienard form is resolved with a directional
blow-up followed by a weighted one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .poly import Poly, exact, is_symbolic
from .vectorfield import (
    PlanarPolySystem,
    RayleighParams,
    build_system,
    exact_jacobian,
)

__all__ = [
    "KINDS",
    "EquilibriumReport",
    "SemiHyperbolicData",
    "BlowUpSystem",
    "NotNondegenerate",
    "UndeterminedOrder",
    "MalformedBlowUp",
    "classify_nondegenerate",
    "classify_equilibrium",
    "classify_origin_finite",
    "classify_semihyperbolic",
    "reversed_kind",
    "blowup_vertical",
    "blowup_weighted",
    "resolve_degenerate",
]

KINDS = (
    "saddle",
    "stable-node",
    "unstable-node",
    "stable-focus",
    "unstable-focus",
    "center",
    "center-or-weak-focus",
    "semi-hyperbolic-saddle",
    "semi-hyperbolic-node-stable",
    "semi-hyperbolic-node-unstable",
    "saddle-node",
    "degenerate",
    "degenerate-resolved",
)

_REVERSED = {
    "stable-node": "unstable-node",
    "unstable-node": "stable-node",
    "stable-focus": "unstable-focus",
    "unstable-focus": "stable-focus",
    "semi-hyperbolic-node-stable": "semi-hyperbolic-node-unstable",
    "semi-hyperbolic-node-unstable": "semi-hyperbolic-node-stable",
}


class NotNondegenerate(ValueError):
    """Zero determinant: use the semi-hyperbolic or blow-up path."""


class UndeterminedOrder(ArithmeticError):
    """The reduced function vanishes up to the truncation order."""


class MalformedBlowUp(ValueError):
    pass


def _num(c):
    if is_symbolic(c):
        return str(c)
    return float(c)


@dataclass
class SemiHyperbolicData:
    lam: object
    alpha: int
    lead: object
    side_data: str
    order: int
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"lambda": _num(self.lam), "alpha": self.alpha, "lead": _num(self.lead),
                "side_data": self.side_data, "order": self.order, "flags": list(self.flags)}


@dataclass
class EquilibriumReport:
    location: tuple
    chart: str
    jac: list
    delta: object
    gamma: object
    kind: str
    provenance: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    children: list[EquilibriumReport] = field(default_factory=list)
    semi: SemiHyperbolicData | None = None

    @property
    def stability(self) -> str | None:
        """``attracting``/``repelling`` for nodes and foci, else ``None``."""
        if self.kind.startswith("stable") or self.kind.endswith("node-stable"):
            return "attracting"
        if self.kind.startswith("unstable") or self.kind.endswith("node-unstable"):
            return "repelling"
        return None

    def to_dict(self) -> dict:
        return {
            "location": [_num(c) for c in self.location],
            "chart": str(self.chart),
            "jac": [[_num(c) for c in row] for row in self.jac],
            "delta": _num(self.delta),
            "gamma": _num(self.gamma),
            "kind": self.kind,
            "provenance": list(self.provenance),
            "notes": list(self.notes),
            "children": [c.to_dict() for c in self.children],
            "semi": self.semi.to_dict() if self.semi else None,
        }


def reversed_kind(kind: str) -> str:
    """Tag after reversing the direction of time."""
    return _REVERSED.get(kind, kind)


def _det_trace(jac):
    (p, q), (r, s) = jac
    return p * s - q * r, p + s


def classify_nondegenerate(jac, tol: float = 0.0) -> str:
    """Topological type from the linear part.

    Raises :class:`NotNondegenerate` when ``det(jac) == 0`` (within ``tol``).
    A repeated nonzero eigenvalue counts as a node.
    """
    delta, gamma = _det_trace(jac)
    if abs(delta) <= tol:
        raise NotNondegenerate(f"determinant {delta} vanishes")
    if delta < 0:
        return "saddle"
    if abs(gamma) <= tol:
        return "center-or-weak-focus"
    disc = gamma * gamma - 4 * delta
    stab = "stable" if gamma < 0 else "unstable"
    if disc >= 0:
        return f"{stab}-node"
    return f"{stab}-focus"


# -- semi-hyperbolic points -------------------------------------------------


def _trunc_mul(p: list, q: list, order: int) -> list:
    out = [Fraction(0)] * (order + 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j in range(min(len(q), order + 1 - i)):
            if q[j] != 0:
                out[i + j] = out[i + j] + a * q[j]
    return out


def _series_of(poly: Poly, f: list, order: int) -> list:
    """Truncated series of ``poly(x, f(x))`` in ``x``."""
    fpow = {0: [Fraction(1)] + [Fraction(0)] * order}
    out = [Fraction(0)] * (order + 1)
    for (i, j), c in poly.items():
        if i > order:
            continue
        if j not in fpow:
            k = max(fpow)
            while k < j:
                fpow[k + 1] = _trunc_mul(fpow[k], f, order)
                k += 1
        fj = fpow[j]
        for m in range(order + 1 - i):
            if fj[m] != 0:
                out[i + m] = out[i + m] + c * fj[m]
    return out


def _side_data(alpha: int, lead) -> str:
    if alpha % 2:
        if lead < 0:
            return "saddle: separatrices tangent to the x-axis"
        return "node"
    side = "positive" if lead < 0 else "negative"
    return (f"saddle-node: stable separatrix tangent to the {side} x-axis, "
            "two unstable separatrices tangent to the y-axis")


def classify_semihyperbolic(local: PlanarPolySystem, lam, order: int | None = None,
                            max_order: int = 320):
    """Classify ``x' = A(x, y), y' = lam*y + B(x, y)`` at the origin.

    ``A`` and ``B`` must start at degree two. The invariant curve ``y = f(x)``
    of ``lam*y + B(x, y) = 0`` is built by fixed-point iteration on truncated
    series, and ``g(x) = A(x, f(x)) = lead*x**alpha + ...`` decides the type.
    For ``lam < 0`` the rule is applied to the time-reversed field and the tag
    mapped back; the result carries a flag saying so.

    Returns ``(SemiHyperbolicData, kind)``.
    """
    lam = exact(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    A = local.P
    B = local.Q - Poly.monomial(0, 1, lam)
    for name, p in (("A", A), ("B", B)):
        if p and p.low_order() < 2:
            raise ValueError(f"{name} has terms of degree < 2; not in normal form")
    if A.is_symbolic() or B.is_symbolic():
        raise ValueError("semi-hyperbolic classification needs numeric coefficients")

    flags = []
    if lam < 0:
        A, B, lam = -A, -B, -lam
        flags.append("lambda<0: classified after time reversal t -> -t")
        reversed_time = True
    else:
        reversed_time = False

    if order is None:
        pure = A.along_axis(0)
        guess = min(pure) if pure else 5
        order = max(2 * guess, 10)

    while True:
        f = [Fraction(0)] * (order + 1)
        for _ in range(order + 1):
            bf = _series_of(B, f, order)
            nf = [-c / lam for c in bf]
            if nf == f:
                break
            f = nf
        g = _series_of(A, f, order)
        nz = [k for k, c in enumerate(g) if c != 0]
        if nz:
            break
        if order >= max_order:
            raise UndeterminedOrder(f"g vanishes identically up to order {order}; raise truncation")
        order *= 2

    alpha = nz[0]
    lead = g[alpha]
    if alpha < 2:
        raise ValueError("reduced function has a linear term; point is not semi-hyperbolic")
    if alpha % 2:
        kind = "semi-hyperbolic-node-unstable" if lead > 0 else "semi-hyperbolic-saddle"
    else:
        kind = "saddle-node"
    side = _side_data(alpha, lead)
    if reversed_time:
        kind = reversed_kind(kind)
        lead = -lead
        lam = -lam
        if alpha % 2 == 0:
            side = side.replace("stable separatrix", "unstable separatrix").replace(
                "two unstable separatrices", "two stable separatrices")
        elif kind.endswith("node-stable"):
            side = "node"
    data = SemiHyperbolicData(lam=lam, alpha=alpha, lead=lead, side_data=side,
                              order=order, flags=flags)
    return data, kind


def _eigvec_zero(jac):
    (p, q), (r, s) = jac
    v = (q, -p) if (p != 0 or q != 0) else (s, -r)
    return _normalize(v)


def _eigvec_lambda(jac):
    (p, q), (r, s) = jac
    v = (q, s) if (q != 0 or s != 0) else (p, r)
    return _normalize(v)


def _normalize(v):
    scale = max(abs(v[0]), abs(v[1]))
    if scale == 0:
        raise ValueError("zero eigenvector")
    first = v[0] if v[0] != 0 else v[1]
    if first < 0:
        scale = -scale
    return (v[0] / scale, v[1] / scale)


def _to_normal_form(system: PlanarPolySystem, point, jac):
    """Translate to ``point`` and change basis so the linear part is ``diag(0, lam)``."""
    x0, y0 = exact(point[0]), exact(point[1])
    v0 = _eigvec_zero(jac)
    vl = _eigvec_lambda(jac)
    # old = point + X v0 + Y vl
    X, Y = Poly.x(), Poly.y()
    ox = X * v0[0] + Y * vl[0] + x0
    oy = X * v0[1] + Y * vl[1] + y0
    P = system.P.compose(ox, oy)
    Q = system.Q.compose(ox, oy)
    det = v0[0] * vl[1] - vl[0] * v0[1]
    # inverse of [[v0x, vlx], [v0y, vly]]
    nP = (P * vl[1] - Q * vl[0]) * (1 / exact(det))
    nQ = (Q * v0[0] - P * v0[1]) * (1 / exact(det))
    return PlanarPolySystem(nP, nQ), (v0, vl)


def classify_equilibrium(system: PlanarPolySystem, point, chart: str = "finite") -> EquilibriumReport:
    """Report for a singular point of ``system``, using the cheapest method that decides it."""
    jac = exact_jacobian(system, point)
    delta, gamma = _det_trace(jac)
    loc = tuple(point)
    if delta != 0:
        kind = classify_nondegenerate(jac)
        if kind == "center-or-weak-focus" and system.is_linear():
            kind = "center"
        return EquilibriumReport(loc, chart, jac, delta, gamma, kind)
    if gamma != 0:
        local, basis = _to_normal_form(system, point, jac)
        data, kind = classify_semihyperbolic(local, gamma)
        rep = EquilibriumReport(loc, chart, jac, delta, gamma, kind, semi=data)
        rep.notes.append(f"center direction {tuple(map(_num, basis[0]))}, "
                         f"hyperbolic direction {tuple(map(_num, basis[1]))}")
        rep.notes.extend(data.flags)
        return rep
    return EquilibriumReport(loc, chart, jac, delta, gamma, "degenerate")


def classify_origin_finite(params: RayleighParams, form: str = "eq2") -> EquilibriumReport:
    """Type of the origin, the only finite singular point of the family.

    For ``eq1`` the tag is obtained from the ``eq2`` tag through the
    orientation-reversing change ``(x, y, t) -> (y, x, -t)`` and compared with
    the direct classification of the ``eq1`` Jacobian.
    """
    rep2 = classify_equilibrium(build_system(params, "eq2"), (0, 0))
    if form == "eq2":
        return rep2
    if form != "eq1":
        raise ValueError(f"unknown form {form!r}")
    derived = reversed_kind(rep2.kind)
    rep1 = classify_equilibrium(build_system(params, "eq1"), (0, 0))
    if rep1.kind != derived:
        raise AssertionError(f"eq1 origin: direct {rep1.kind} != mapped {derived}")
    rep1.notes.append("tag mapped from eq2 by (x,y,t)->(y,x,-t); agrees with the eq1 Jacobian")
    return rep1


# -- blow-ups ---------------------------------------------------------------


@dataclass(frozen=True)
class BlowUpSystem:
    """Field after a blow-up and division by the common factor.

    ``transform`` is ``"vertical"`` (``u = x, v = z x``) or ``"weighted"``
    (``x = w**weight * r, z = w``). Coordinates are stored in the ``(x, y)``
    slots of ``system``: ``(x, z)`` for vertical, ``(r, w)`` for weighted.
    """

    system: PlanarPolySystem
    transform: str
    cancelled_power: int
    source: PlanarPolySystem
    weight: int = 1

    def source_point(self, point):
        a, b = float(point[0]), float(point[1])
        if self.transform == "vertical":
            return a, b * a
        return b**self.weight * a, b

    def pullback(self, point) -> np.ndarray:
        """Source field at ``source_point(point)`` rebuilt from the blown-up field."""
        a, b = float(point[0]), float(point[1])
        fa, fb = self.system.P(a, b), self.system.Q(a, b)
        if self.transform == "vertical":
            m = a**self.cancelled_power
            xd, zd = m * fa, m * fb
            return np.array([xd, b * xd + a * zd])
        k = self.weight
        m = b**self.cancelled_power
        rd, wd = m * fa, m * fb
        return np.array([k * b ** (k - 1) * wd * a + b**k * rd, wd])

    def source_field(self, point) -> np.ndarray:
        p = self.source_point(point)
        return np.array([self.source.P(*p), self.source.Q(*p)])

    def record(self) -> dict:
        if self.transform == "vertical":
            return {"transform": "vertical", "map": "u=x, v=z*x",
                    "cancelled": f"x^{self.cancelled_power}"}
        return {"transform": "weighted", "map": f"x=w^{self.weight}*r, z=w",
                "cancelled": f"w^{self.cancelled_power}"}


def _as_system(cs) -> PlanarPolySystem:
    if isinstance(cs, PlanarPolySystem):
        return cs
    return cs.system


def _check_singular_origin(sys_: PlanarPolySystem):
    if sys_.P.coeff(0, 0) != 0 or sys_.Q.coeff(0, 0) != 0:
        raise MalformedBlowUp("origin is not a singular point")


def blowup_vertical(cs, n: int | None = None) -> BlowUpSystem:
    """Directional blow-up ``u = x, v = z x`` at the origin, common power of ``x`` removed."""
    src = _as_system(cs)
    _check_singular_origin(src)
    sub = lambda i, j, c: (i + j, j, c)  # noqa: E731  u^i v^j -> x^(i+j) z^j
    X = src.P.remap(sub)
    Zx = src.Q.remap(sub) - Poly.y() * X
    Z = Zx.divide_monomial(1, 0)
    k = min(X.min_power(0) if X else 10**9, Z.min_power(0) if Z else 10**9)
    if k == 10**9 or k < 1:
        raise MalformedBlowUp("no common factor x^k (k >= 1) after the vertical blow-up")
    if n is not None and k != 2 * n - 1:
        raise MalformedBlowUp(f"expected common factor x^{2 * n - 1}, found x^{k}")
    out = PlanarPolySystem(X.divide_monomial(k, 0), Z.divide_monomial(k, 0))
    return BlowUpSystem(out, "vertical", k, src)


def blowup_weighted(bs, n: int) -> BlowUpSystem:
    """Weighted blow-up ``x = w**(2n) r, z = w``, common power of ``w`` removed."""
    src = bs.system if isinstance(bs, BlowUpSystem) else _as_system(bs)
    _check_singular_origin(src)
    k = 2 * n
    sub = lambda i, j, c: (i, k * i + j, c)  # noqa: E731  x^i z^j -> r^i w^(k i + j)
    Xs = src.P.remap(sub)
    Ws = src.Q.remap(sub)
    # r' = (x' - k r w^(k-1) w') / w^k
    Rn = Xs - Poly.monomial(1, k - 1, k) * Ws
    R = Rn.divide_monomial(0, k)
    m = min(R.min_power(1) if R else 10**9, Ws.min_power(1) if Ws else 10**9)
    if m == 10**9 or m < 1:
        raise MalformedBlowUp("no common factor w^m (m >= 1) after the weighted blow-up")
    out = PlanarPolySystem(R.divide_monomial(0, m), Ws.divide_monomial(0, m))
    return BlowUpSystem(out, "weighted", m, src, weight=k)


def _axis_roots(poly_on_axis: Poly):
    from .compactification import real_roots
    return real_roots(poly_on_axis.along_axis(0))


def resolve_degenerate(cs, params: RayleighParams) -> EquilibriumReport:
    """Resolve the degenerate origin of chart U2 of the Lienard form.

    Vertical blow-up, then the weighted one; the singular points on the
    exceptional divisor ``w = 0`` are classified and recorded as children.
    """
    src = _as_system(cs)
    chart = str(getattr(cs, "chart", "U2"))
    if src.P.coeff(0, 0) != 0 or src.Q.coeff(0, 0) != 0:
        raise ValueError(f"origin of {chart} is not a singular point (a = {params.a})")
    jac = exact_jacobian(src, (0, 0))
    delta, gamma = _det_trace(jac)
    if delta != 0 or gamma != 0:
        raise ValueError("origin has a nonzero linear part; no blow-up needed")

    vb = blowup_vertical(src, params.n)
    wb = blowup_weighted(vb, params.n)
    children = []
    for r0 in _axis_roots(wb.system.P):
        rep = classify_equilibrium(wb.system, (r0, 0), chart="blow-up (r,w)")
        children.append(rep)
    kinds = sorted(c.kind for c in children)
    report = EquilibriumReport((0, 0), chart, jac, delta, gamma, "degenerate-resolved",
                               provenance=[vb.record(), wb.record()], children=children)
    if kinds == ["saddle", "semi-hyperbolic-saddle"]:
        report.notes.append("two hyperbolic sectors separated by the equator")
    else:
        report.notes.append(f"unrecognized sector structure from {kinds}")
    return report
