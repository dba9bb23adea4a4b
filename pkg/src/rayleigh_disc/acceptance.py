"""Acceptance suite shared by the test runner and ``rayleigh-disc verify``.

Each criterion is a function returning a :class:`CriterionResult`; nothing
here raises on a failed check, so every criterion always reports.
"""

from __future__ import annotations

import math
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .compactification import (ChartId, chart_system, compatibility_residual,
                               equator_invariant)
from .flow import DEFAULT_ATOL, DEFAULT_RTOL
from .lienardcheck import (EQUIVALENCE, VERDICT_NOT_APPLICABLE, VERDICT_UNIQUE,
                           build_lienard_data, check_hypotheses)
from .limitcycle import (averaging_amplitude, averaging_quadrature, find_cycle, return_map,
                         trapping_prediction, uniqueness_scan)
from .localanalysis import blowup_vertical, blowup_weighted, classify_origin_finite
from .poly import Poly
from .portrait import build_portrait, render_svg, topological_class
from .vectorfield import PlanarPolySystem, RayleighParams, build_system, symbol

__all__ = [
    "CriterionResult",
    "CRITERIA",
    "run_all",
    "printed_chart_u1",
    "printed_chart_u2",
    "printed_blowup",
    "computed_blowup",
    "lemma_tag",
    "random_system",
]

SCAN_A = (-2, -1, -0.5, -0.25, 0.25, 0.5, 1, 2)
NS = (1, 2, 3)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:>2}: {self.name} ({self.elapsed:.2f} s)"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "elapsed_s": round(self.elapsed, 3), "details": self.details,
                "failures": list(self.failures)}


# -- printed systems, typed in as literal oracles --------------------------------

def _X():
    return Poly.x()


def _Y():
    return Poly.y()


def printed_chart_u1(a, n: int) -> tuple[Poly, Poly]:
    """``u' = -a u + v^(2n) (a u - 1 - u^2)``, ``v' = -a v + v^(2n+1) (a - u)``."""
    u, v = _X(), _Y()
    du = u * (-a) + v ** (2 * n) * (u * a - 1 - u * u)
    dv = v * (-a) + v ** (2 * n + 1) * (Poly.const(a) - u)
    return du, dv


def printed_chart_u2(a, n: int) -> tuple[Poly, Poly]:
    """``u' = a u^(2n+1) + v^(2n) (1 - a u + u^2)``, ``v' = u v^(2n+1)``."""
    u, v = _X(), _Y()
    du = u ** (2 * n + 1) * a + v ** (2 * n) * (Poly.const(1) - u * a + u * u)
    dv = u * v ** (2 * n + 1)
    return du, dv


def printed_blowup(a, n: int) -> tuple[Poly, Poly]:
    """The blown-up system as printed, in variables ``(r, w)``."""
    r, w = _X(), _Y()
    k = 2 * n + 1
    rdot = r * ((Poly.const(1) + r * a) * k - w ** (2 * n) * r * (a * k) + r * r * w ** (2 * n))
    wdot = w * (Poly.const(-1) + r * a * (Poly.const(-1) + w ** (2 * n)))
    return rdot, wdot


def computed_blowup(a, n: int) -> PlanarPolySystem:
    sys_ = build_system(RayleighParams(a, n), "eq2")
    u2 = chart_system(sys_, ChartId.U2)
    return blowup_weighted(blowup_vertical(u2, n), n).system


def _to_expr(p: Poly, X, Y):
    out = 0
    for i, j, c in p.terms():
        c = sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.sympify(c)
        out += c * X**i * Y**j
    return sympy.expand(out)


def _monomial_diff(p: Poly, q: Poly) -> list[str]:
    keys = sorted(set(i for i, _ in p.items()) | set(i for i, _ in q.items()))
    out = []
    for key in keys:
        cp, cq = p.coeff(*key), q.coeff(*key)
        if sympy.simplify(sympy.sympify(cp) - sympy.sympify(cq)) != 0:
            out.append(f"r^{key[0]} w^{key[1]}: computed {cp}, printed {cq}")
    return out


# -- criteria ---------------------------------------------------------------------

def criterion_1(ns=NS) -> CriterionResult:
    res = CriterionResult(1, "chart formulas U1/U2 reproduce the printed systems", True)
    a = symbol("a")
    for n in ns:
        sys_ = build_system(RayleighParams(a, n), "eq2")
        for chart, printed in ((ChartId.U1, printed_chart_u1), (ChartId.U2, printed_chart_u2)):
            cs = chart_system(sys_, chart)
            du, dv = printed(a, n)
            ok = cs.du == du and cs.dv == dv
            res.details[f"{chart} n={n}"] = "identical" if ok else "differs"
            if not ok:
                res.passed = False
                res.failures.append(f"{chart} n={n}: computed ({cs.du}, {cs.dv})")
    return res


def criterion_2(ns=NS) -> CriterionResult:
    res = CriterionResult(2, "blow-up composition: printed system, fixed points, Jacobians", True)
    a = symbol("a")
    R, W = sympy.symbols("r w")
    for n in ns:
        comp = computed_blowup(a, n)
        pr, pw = printed_blowup(a, n)
        verbatim = comp.P == pr and comp.Q == pw
        res.details[f"n={n} verbatim"] = verbatim
        if not verbatim:
            res.passed = False
            diffs = _monomial_diff(comp.P, pr) + _monomial_diff(comp.Q, pw)
            res.failures.append(f"n={n}: differs from printed form in " + "; ".join(diffs))
        P, Q = _to_expr(comp.P, R, W), _to_expr(comp.Q, R, W)
        fixed = sorted(sympy.solve(P.subs(W, 0), R), key=str)
        want = sorted([sympy.Integer(0), -1 / a], key=str)
        fp_ok = fixed == want and all(Q.subs({W: 0, R: r0}) == 0 for r0 in fixed)
        J = sympy.Matrix([P, Q]).jacobian([R, W])
        J0 = sympy.simplify(J.subs({R: 0, W: 0}))
        J1 = sympy.simplify(J.subs({R: -1 / a, W: 0}))
        jac_ok = (J0 == sympy.diag(2 * n + 1, -1) and J1 == sympy.diag(-(2 * n + 1), 0))
        res.details[f"n={n} fixed points"] = [str(f) for f in fixed]
        res.details[f"n={n} jacobians"] = [str(J0.tolist()), str(J1.tolist())]
        if not (fp_ok and jac_ok):
            res.passed = False
            res.failures.append(f"n={n}: fixed points {fixed} / Jacobians {J0.tolist()}, {J1.tolist()}")
    return res


def lemma_tag(a) -> str:
    """Origin type of ``eq2`` tabulated by the sign and size of ``a``."""
    if a >= 2:
        return "stable-node"
    if a <= -2:
        return "unstable-node"
    if a < 0:
        return "unstable-focus"
    if a > 0:
        return "stable-focus"
    return "center"


def criterion_3(ns=NS) -> CriterionResult:
    res = CriterionResult(3, "finite classification table", True)
    good = total = 0
    for a in (-3, -2, -1, Fraction(-1, 2), 0, Fraction(1, 2), 1, 2, 3):
        for n in ns:
            total += 1
            kind = classify_origin_finite(RayleighParams(a, n), "eq2").kind
            if kind == lemma_tag(a):
                good += 1
            else:
                res.failures.append(f"a={a} n={n}: {kind} != {lemma_tag(a)}")
    res.details["correct"] = f"{good}/{total}"
    res.passed = good == total
    return res


def criterion_4(rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> CriterionResult:
    res = CriterionResult(4, "linear-center identity at a = 0", True)
    for r in (0.1, 1.0, 5.0):
        s = return_map(RayleighParams(0, 1), "eq2", r, rtol=rtol, atol=atol, estimate_error=False)
        dr, dT = abs(s.r_out - r), abs(s.period - 2 * math.pi)
        res.details[f"r={r}"] = {"|P(r)-r|": dr, "|T-2pi|": dT}
        if dr > 1e-8 or dT > 1e-8:
            res.passed = False
            res.failures.append(f"r={r}: |P(r)-r|={dr:.3g}, |T-2pi|={dT:.3g}")
    return res


def criterion_5(ns=NS, jobs: int = 1, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> CriterionResult:
    res = CriterionResult(5, "exactly one sign change of P(r)-r on [0.05, 10]", True)
    grid = np.linspace(0.05, 10.0, 100)
    for a in SCAN_A:
        for n in ns:
            count, _ = uniqueness_scan(RayleighParams(a, n), "eq2", grid, rtol=rtol, atol=atol,
                                       jobs=jobs)
            res.details[f"a={a} n={n}"] = count
            if count != 1:
                res.passed = False
                res.failures.append(f"a={a} n={n}: {count} sign changes")
    return res


def criterion_6(ns=(1, 2), rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> CriterionResult:
    res = CriterionResult(6, "small-|a| amplitude matches first-order averaging", True)
    for n in ns:
        closed, quad = averaging_amplitude(n), averaging_quadrature(n)
        res.details[f"n={n} closed form"] = closed
        res.details[f"n={n} quadrature"] = quad
        if abs(closed - quad) > 1e-10:
            res.passed = False
            res.failures.append(f"n={n}: closed form {closed!r} vs quadrature {quad!r}")
            continue
        for a in (-0.01, 0.01):
            rec = find_cycle(RayleighParams(a, n), "eq2", rtol=rtol, atol=atol)
            rel = abs(rec.r_star - closed) / closed
            res.details[f"a={a} n={n} rel. error"] = rel
            if rel > 0.02:
                res.passed = False
                res.failures.append(f"a={a} n={n}: r*={rec.r_star:.6g}, rel. error {rel:.3g}")
    return res


def criterion_7(ns=NS, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> CriterionResult:
    res = CriterionResult(7, "multiplier consistency and trapping-region side", True)
    for a in SCAN_A:
        for n in ns:
            p = RayleighParams(a, n)
            rec = find_cycle(p, "eq2", rtol=rtol, atol=atol)
            rel = abs(rec.multiplier - rec.multiplier_div) / rec.multiplier_div
            side = "stable" if a < 0 else "unstable"
            trap = trapping_prediction(p, "eq2")
            res.details[f"a={a} n={n}"] = {"mu": rec.multiplier, "exp(int div)": rec.multiplier_div,
                                           "rel": rel, "method": rec.multiplier_method,
                                           "stability": rec.stability}
            if rel > 0.05:
                res.passed = False
                res.failures.append(f"a={a} n={n}: multiplier mismatch {rel:.3g}")
            if rec.stability != side or trap != side:
                res.passed = False
                res.failures.append(f"a={a} n={n}: measured {rec.stability}, trapping {trap}, "
                                    f"expected {side}")
    # which reading of the stability statement the measurement supports
    e1 = find_cycle(RayleighParams(-1, 1), "eq1", rtol=rtol, atol=atol)
    e2 = find_cycle(RayleighParams(-1, 1), "eq2", rtol=rtol, atol=atol)
    res.details["a=-1 eq1 stability"] = e1.stability
    res.details["a=-1 eq2 stability"] = e2.stability
    res.details["supported convention"] = (
        "'stable if a<0' holds for eq2" if e2.stability == "stable" else "'stable if a<0' fails for eq2")
    res.details["eq1 convention"] = (
        "'stable if a<0' fails for eq1; its cycle is stable for a>0"
        if e1.stability == "unstable" else "'stable if a<0' holds for eq1")
    return res


def criterion_8(ns=NS) -> CriterionResult:
    res = CriterionResult(8, "uniqueness-theorem hypotheses", True)
    for a in (0.5, 1, 2, -0.5, -1, -2, 0):
        for n in ns:
            rep = check_hypotheses(build_lienard_data(RayleighParams(a, n)))
            res.details[f"a={a} n={n}"] = rep.verdict
            if a == 0:
                ok = rep.verdict == VERDICT_NOT_APPLICABLE
            elif a > 0:
                ok = rep.verdict == VERDICT_UNIQUE and rep.transform is None
            else:
                ok = rep.verdict == VERDICT_UNIQUE and rep.transform == EQUIVALENCE
            if not ok:
                res.passed = False
                res.failures.append(f"a={a} n={n}: {rep.verdict} (transform {rep.transform})")
    return res


def criterion_9(ns=(1, 3), jobs: int = 1) -> CriterionResult:
    res = CriterionResult(9, "three portrait classes split by sign(a)", True)
    models = {}
    for a in (-1, -0.3, 0, 0.5, 2):
        for n in ns:
            m = build_portrait(RayleighParams(a, n), "eq2", jobs=jobs)
            svg = render_svg(m, 400)
            ET.fromstring(svg)
            models[(a, n)] = m
    classes: list[list] = []
    for key, m in models.items():
        for cls in classes:
            if topological_class(models[cls[0]], m) == "equivalent":
                cls.append(key)
                break
        else:
            classes.append([key])
    res.details["classes"] = [[f"a={a} n={n}" for a, n in c] for c in classes]
    by_sign = {}
    for c in classes:
        signs = {int(np.sign(a)) for a, _ in c}
        if len(signs) != 1:
            res.passed = False
            res.failures.append(f"class mixes signs of a: {c}")
        for s in signs:
            by_sign.setdefault(s, 0)
            by_sign[s] += 1
    if len(classes) != 3 or any(v != 1 for v in by_sign.values()):
        res.passed = False
        res.failures.append(f"expected 3 classes one per sign of a, got {len(classes)}")
    return res


def random_system(rng: np.random.Generator, max_degree: int = 5) -> PlanarPolySystem:
    """Integer-coefficient system of exact degree in ``1..max_degree``."""
    d = int(rng.integers(1, max_degree + 1))
    comps = []
    for _ in range(2):
        terms = {}
        for i in range(d + 1):
            for j in range(d + 1 - i):
                if rng.random() < 0.5:
                    c = int(rng.integers(-3, 4))
                    if c:
                        terms[(i, j)] = c
        comps.append(terms)
    i_top = int(rng.integers(0, d + 1))
    comps[0][(i_top, d - i_top)] = int(rng.choice([-2, -1, 1, 2]))
    return PlanarPolySystem(Poly(comps[0]), Poly(comps[1]), name=f"random d={d}")


def criterion_10(seed: int = 20240611, samples: int = 50) -> CriterionResult:
    res = CriterionResult(10, "equator invariance and chart compatibility", True)
    systems = []
    a = symbol("a")
    for n in NS:
        for form in ("eq1", "eq2"):
            systems.append((f"{form} n={n} symbolic a", build_system(RayleighParams(a, n), form), False))
            for av in (-1.5, 0.75):
                systems.append((f"{form} n={n} a={av}", build_system(RayleighParams(av, n), form), True))
    rng = np.random.default_rng(seed)
    for k in range(10):
        s = random_system(rng)
        systems.append((f"random #{k} (d={s.d})", s, True))
    worst = 0.0
    for label, s, numeric in systems:
        for ch in (ChartId.U1, ChartId.U2, ChartId.V1, ChartId.V2):
            if not equator_invariant(chart_system(s, ch)):
                res.passed = False
                res.failures.append(f"{label}: {ch} leaves the equator")
        if not numeric:
            continue
        us = rng.uniform(-3, 3, samples)
        us[np.abs(us) < 0.05] = 0.5
        vs = rng.uniform(0.05, 3, samples)
        err = max(compatibility_residual(s, float(u), float(v)) for u, v in zip(us, vs))
        worst = max(worst, err)
        if err > 1e-8:
            res.passed = False
            res.failures.append(f"{label}: chart mismatch {err:.3g}")
    res.details["systems"] = len(systems)
    res.details["worst compatibility residual"] = worst
    return res


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def _timed(fn, *args, **kw) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = fn(*args, **kw)
    except Exception as exc:  # a crash is a failed criterion, not an aborted suite
        num = int(fn.__name__.rsplit("_", 1)[1])
        res = CriterionResult(num, fn.__name__, False, failures=[f"{type(exc).__name__}: {exc}"])
    res.elapsed = time.perf_counter() - t0
    return res


def run_criterion(number: int, *, quick: bool = False, jobs: int = 1,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> CriterionResult:
    ns = (1,) if quick else NS
    fn = CRITERIA[number]
    kwargs = {
        1: {"ns": ns}, 2: {"ns": ns}, 3: {"ns": ns}, 4: {"rtol": rtol, "atol": atol},
        5: {"ns": ns, "jobs": jobs, "rtol": rtol, "atol": atol},
        6: {"ns": (1,) if quick else (1, 2), "rtol": rtol, "atol": atol},
        7: {"ns": ns, "rtol": rtol, "atol": atol}, 8: {"ns": ns},
        9: {"ns": (1,) if quick else (1, 3), "jobs": jobs}, 10: {},
    }[number]
    return _timed(fn, **kwargs)


def run_all(*, quick: bool = False, jobs: int = 1, rtol: float = DEFAULT_RTOL,
            atol: float = DEFAULT_ATOL, only=None) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if only is None else sorted(only)
    return [run_criterion(k, quick=quick, jobs=jobs, rtol=rtol, atol=atol) for k in numbers]
