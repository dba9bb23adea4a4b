"""Hypotheses of the Zhang-type uniqueness theorem for Lienard systems.

The theorem concerns ``x' = -phi(y) - F(x), y' = g(x)``. The Rayleigh family
reaches this form from ``eq2`` by reversing time, which gives
``x' = -y + a (1 - x^(2n)) x, y' = x``, so ``g(x) = x``, ``phi(y) = y`` and
``F(x) = a x^(2n+1) - a x``. For ``a < 0`` the map ``(x, y, t) -> (-x, y, -t)``
first sends ``eq2`` with parameter ``a`` to ``eq2`` with ``-a``.

Condition (2) asks for monotonicity of ``f/g``. It is evaluated in both
directions: the printed hypothesis reads "non-increasing", while the classical
statement and the verification carried out for this family use
"non-decreasing". The verdict follows the non-decreasing reading; the other is
reported alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .poly import Poly
from .vectorfield import RayleighParams

__all__ = [
    "LienardData",
    "ConditionRecord",
    "HypothesisReport",
    "build_lienard_data",
    "check_hypotheses",
    "monotonicity_probe",
    "ratio_derivative_numerator",
    "probe_direction",
    "lienard_for_raw",
    "VERDICT_UNIQUE",
    "VERDICT_NOT_APPLICABLE",
    "VERDICT_UNDECIDED",
]

VERDICT_UNIQUE = "at most one limit cycle, stable"
VERDICT_NOT_APPLICABLE = "theorem not applicable"
VERDICT_UNDECIDED = "hypotheses fail"

EQUIVALENCE = "(x,y,t)->(-x,y,-t)"
READINGS = ("non-decreasing", "non-increasing")


@dataclass(frozen=True)
class LienardData:
    """Lienard normal-form data; polynomials live in the ``x`` slot of :class:`Poly`."""

    f: Poly
    F: Poly
    g: Poly
    G: Poly
    phi: str = "identity"
    a_effective: object = None
    n: int | None = None
    transform: str | None = None
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        names = ("x", "y")
        return {"f": self.f.pretty(names), "F": self.F.pretty(names), "g": self.g.pretty(names),
                "G": self.G.pretty(names), "phi": self.phi,
                "a_effective": str(self.a_effective), "n": self.n,
                "transform": self.transform, "flags": list(self.flags)}


@dataclass(frozen=True)
class ConditionRecord:
    cid: int
    status: str
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"condition": self.cid, "status": self.status, "witness": self.witness}


@dataclass(frozen=True)
class HypothesisReport:
    conditions: tuple[ConditionRecord, ...]
    verdict: str
    readings: dict
    measured_direction: str
    reading_used_by_family: str
    transform: str | None
    notes: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.verdict == VERDICT_UNIQUE

    def to_dict(self) -> dict:
        return {"verdict": self.verdict,
                "conditions": [c.to_dict() for c in self.conditions],
                "condition2_readings": dict(self.readings),
                "measured_direction": self.measured_direction,
                "reading_used_by_family": self.reading_used_by_family,
                "transform": self.transform, "notes": list(self.notes)}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def table(self) -> str:
        """Plain-text condition table for terminal output."""
        lines = [f"{'cond':<5} {'status':<26} witness", f"{'-' * 5} {'-' * 26} {'-' * 40}"]
        for c in self.conditions:
            wit = "; ".join(f"{k}={v}" for k, v in c.witness.items())
            lines.append(f"({c.cid})   {c.status:<26} {wit}")
        lines.append("")
        for name, ok in self.readings.items():
            lines.append(f"condition (2) read as '{name}': {'holds' if ok else 'fails'}")
        lines.append(f"f/g measured: {self.measured_direction}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _x_poly(coeffs: dict[int, object]) -> Poly:
    return Poly({(i, 0): c for i, c in coeffs.items()})


def build_lienard_data(params: RayleighParams) -> LienardData:
    """Data ``f, F, g, G, phi`` for the family; ``a < 0`` is normalized first."""
    if params.symbolic:
        raise ValueError("Lienard data needs a numeric parameter")
    a, n = params.a_exact, params.n
    transform = None
    if a < 0:
        a, transform = -a, EQUIVALENCE
    F = _x_poly({2 * n + 1: a, 1: -a})
    f = F.diff(0)
    g = _x_poly({1: 1})
    G = g.antiderivative(0)
    flags = ("f identically zero",) if f.is_zero() else ()
    return LienardData(f, F, g, G, "identity", a, n, transform, flags)


def ratio_derivative_numerator(data: LienardData) -> Poly:
    """``f' g - f g'``, the numerator of ``d/dx (f/g)`` over ``g^2``."""
    return data.f.diff(0) * data.g - data.f * data.g.diff(0)


def _sign_on_halfline(p: Poly, side: int) -> int:
    """Sign of the one-variable polynomial ``p`` on ``(0, inf)`` (side 1) or ``(-inf, 0)``.

    Returns 0 for the zero polynomial and 2 when the sign changes.
    """
    from .compactification import real_roots

    coeffs = {i: c for (i, _), c in p.items()}
    if not coeffs:
        return 0
    roots = [r for r in real_roots(coeffs) if side * r > 0] if p.degree > 0 else []
    # sample between consecutive roots; a root of odd multiplicity flips the sign
    marks = sorted(abs(float(r)) for r in roots)
    probes = [m / 2 for m in marks[:1]] + [(u + v) / 2 for u, v in zip(marks, marks[1:])]
    probes.append((marks[-1] + 1) * 2 if marks else 1.0)
    signs = set()
    for t in probes:
        v = p.exact_eval(Fraction(t) * side, 0)
        signs.add((v > 0) - (v < 0))
    signs.discard(0)
    if not signs:
        return 0
    return signs.pop() if len(signs) == 1 else 2


def _monotone_direction(signs: tuple[int, int]) -> str:
    if signs == (0, 0):
        return "constant"
    if all(s in (0, 1) for s in signs):
        return "non-decreasing"
    if all(s in (0, -1) for s in signs):
        return "non-increasing"
    return "mixed"


def check_hypotheses(data: LienardData, params: RayleighParams | None = None) -> HypothesisReport:
    """Evaluate conditions (1)-(3) exactly; failures become report entries."""
    notes = []
    # (1) g Lipschitz on compacts, x g(x) > 0, G(-inf) = G(+inf) = +inf
    g, G = data.g, data.G
    xg = Poly.x() * g
    xg_pos = all(_sign_on_halfline(xg, s) == 1 for s in (1, -1))
    lead_deg = G.degree
    G_infinite = lead_deg > 0 and lead_deg % 2 == 0 and G.coeff(lead_deg, 0) > 0
    c1 = ConditionRecord(1, "holds" if xg_pos and G_infinite else "fails", {
        "g": g.pretty(), "x*g": xg.pretty(), "G": G.pretty(),
        "G(-inf)": "+inf" if G_infinite else "finite or unequal",
        "G(+inf)": "+inf" if G_infinite else "finite or unequal",
        "lipschitz": "polynomial: bounded derivative on compact intervals"})

    # (2) f continuous, F(0) = 0, F' = f, f/g monotone on each half-line, non-constant near 0
    f, F = data.f, data.F
    N = ratio_derivative_numerator(data)
    signs = (_sign_on_halfline(N, -1), _sign_on_halfline(N, 1))
    direction = _monotone_direction(signs)
    # f/g constant near 0 only when f is a multiple of g
    nonconstant = not N.is_zero()
    base_ok = F.exact_eval(0, 0) == 0 and F.diff(0) == f
    readings = {r: bool(base_ok and nonconstant and direction == r) for r in READINGS}
    used = "non-decreasing"
    if data.transform is not None:
        status2 = "holds-after-time-reversal" if readings[used] else "fails"
    else:
        status2 = "holds" if readings[used] else "fails"
    c2 = ConditionRecord(2, status2, {
        "f": f.pretty(), "F": F.pretty(), "F(0)": str(F.exact_eval(0, 0)),
        "numerator of d/dx(f/g)": N.pretty(),
        "sign on x<0": signs[0], "sign on x>0": signs[1],
        "direction": direction, "non-constant near 0": nonconstant})
    if not nonconstant:
        notes.append("f/g is constant, the non-constancy requirement fails")

    # (3) phi = identity
    f0 = f.exact_eval(0, 0)
    c3 = ConditionRecord(3, "holds", {
        "phi": data.phi, "y*phi(y)": "y^2 > 0 for y != 0", "monotone": "non-decreasing",
        "phi'_+(0)": 1, "phi'_-(0)": 1,
        "derivative product needed": f0 == 0})

    if not nonconstant or data.f.is_zero():
        verdict = VERDICT_NOT_APPLICABLE
    elif all(c.status != "fails" for c in (c1, c2, c3)):
        verdict = VERDICT_UNIQUE
    else:
        verdict = VERDICT_UNDECIDED
    if readings["non-increasing"] != readings["non-decreasing"]:
        notes.append("the two readings of condition (2) disagree; the verdict uses non-decreasing")
    if data.transform is not None:
        notes.append(f"data built after {data.transform}")
    if verdict == VERDICT_UNIQUE:
        if data.transform is None:
            notes.append("stability refers to the Lienard form, which is eq2 in reversed time; "
                         "the cycle of eq2 itself repels")
        else:
            notes.append("the two time reversals cancel, so the cycle of eq2 itself attracts")
    return HypothesisReport((c1, c2, c3), verdict, readings, direction, used, data.transform,
                            tuple(notes))


def monotonicity_probe(data: LienardData, grid) -> list[tuple[float, float]]:
    """Samples ``(x, f(x)/g(x))``; ``grid`` must avoid zeros of ``g``."""
    out = []
    for x in grid:
        x = float(x)
        gx = data.g(x, 0.0)
        if gx == 0:
            raise ValueError(f"g vanishes at x={x}")
        out.append((x, data.f(x, 0.0) / gx))
    return out


def probe_direction(samples: list[tuple[float, float]]) -> str:
    """Monotonicity of probe samples, ordered by ``x``."""
    vals = [v for _, v in sorted(samples)]
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    if all(d > 0 for d in diffs):
        return "increasing"
    if all(d < 0 for d in diffs):
        return "decreasing"
    return "mixed"


def lienard_for_raw(params: RayleighParams) -> LienardData:
    """Data for ``a`` as given, without the sign normalization (for probes)."""
    a, n = params.a_exact, params.n
    F = _x_poly({2 * n + 1: a, 1: -a})
    g = _x_poly({1: 1})
    return LienardData(F.diff(0), F, g, g.antiderivative(0), "identity", a, n, None,
                       ("f identically zero",) if a == 0 else ())
