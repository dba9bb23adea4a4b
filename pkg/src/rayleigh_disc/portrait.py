"""Global phase portraits on the Poincare disc.

The portrait is assembled from computed features only: the type of the
origin, the limit cycle and its multiplier, the hyperbolic nodes at infinity
and the blown-up pair of degenerate points on the equator. Orbits are sampled
numerically and projected with ``p -> p / sqrt(1 + |p|^2)``.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .compactification import ChartId, chart_system, infinite_equilibria, orientation_factor
from .flow import BlowUp, integrate
from .limitcycle import LimitCycleRecord, find_cycle, infinity_attracts
from .localanalysis import (EquilibriumReport, classify_origin_finite, resolve_degenerate,
                            reversed_kind)
from .vectorfield import RayleighParams, build_system

__all__ = [
    "A_NEG",
    "CENTER",
    "A_POS",
    "disc_project",
    "disc_unproject",
    "OrbitSample",
    "InfinitePoint",
    "PortraitModel",
    "build_portrait",
    "PortraitFeatures",
    "portrait_features",
    "point_in_polygon",
    "topological_class",
    "render_svg",
]

A_NEG, CENTER, A_POS = "A_NEG", "CENTER", "A_POS"
DISC_STOP = 0.995
NEAR_TOL = 1e-3
T_CAP = 150.0


def disc_project(p) -> np.ndarray:
    """Map points of the plane (shape ``(2,)`` or ``(k, 2)``) into the open unit disc."""
    p = np.asarray(p, dtype=float)
    norm2 = np.sum(p * p, axis=-1, keepdims=True)
    return p / np.sqrt(1.0 + norm2)


def disc_unproject(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    rho2 = np.sum(q * q, axis=-1, keepdims=True)
    if np.any(rho2 >= 1.0):
        raise ValueError("points on or outside the boundary circle have no finite preimage")
    return q / np.sqrt(1.0 - rho2)


def _equator_direction(chart: ChartId, point) -> np.ndarray:
    """Boundary point of the disc for an infinite singular point in ``chart``."""
    u = float(point[0])
    if chart.index == 1:
        v = np.array([1.0, u])
    elif chart.index == 2:
        v = np.array([u, 1.0])
    else:
        raise ValueError("U3/V3 carry no infinite points")
    if chart.value[0] == "V":
        v = -v
    return v / np.hypot(*v)


@dataclass
class OrbitSample:
    """Polyline in disc coordinates, ordered by increasing time."""

    points: np.ndarray
    seed: tuple[float, float]
    kind: str = "orbit"
    end: str = ""
    qualitative: bool = False

    def to_dict(self) -> dict:
        return {"seed": list(self.seed), "kind": self.kind, "end": self.end,
                "qualitative": self.qualitative, "points": np.round(self.points, 6).tolist()}


@dataclass
class InfinitePoint:
    chart: str
    point: tuple
    disc: tuple[float, float]
    orientation: int
    report: EquilibriumReport

    def to_dict(self) -> dict:
        return {"chart": self.chart, "point": [float(c) for c in self.point],
                "disc": list(self.disc), "orientation_factor": self.orientation,
                "report": self.report.to_dict()}


@dataclass
class PortraitModel:
    params: RayleighParams
    form: str
    finite_equilibria: list[EquilibriumReport]
    infinite_equilibria: list[InfinitePoint]
    cycle: LimitCycleRecord | None
    orbits: list[OrbitSample]
    class_tag: str
    signature: tuple
    notes: list[str] = field(default_factory=list)

    @property
    def cycle_disc(self) -> np.ndarray | None:
        if self.cycle is None or self.cycle.orbit is None:
            return None
        return disc_project(self.cycle.orbit)

    def to_dict(self, with_orbits: bool = True) -> dict:
        d = {"a": float(self.params.a), "n": self.params.n, "form": self.form,
             "class_tag": self.class_tag, "signature": list(self.signature),
             "finite_equilibria": [r.to_dict() for r in self.finite_equilibria],
             "infinite_equilibria": [p.to_dict() for p in self.infinite_equilibria],
             "cycle": self.cycle.to_dict() if self.cycle else None,
             "notes": list(self.notes)}
        if with_orbits:
            d["orbits"] = [o.to_dict() for o in self.orbits]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _sign_tag(params: RayleighParams) -> str:
    s = params.sign()
    return A_NEG if s < 0 else (A_POS if s > 0 else CENTER)


def _feature_tag(signature: tuple) -> str:
    """Tag in the orientation of ``eq2``: a repelling origin means ``A_NEG``."""
    origin = signature[0]
    if origin == "center":
        return CENTER
    return A_NEG if origin == "repelling" else A_POS


def _infinite_points(params, form, sys_) -> list[InfinitePoint]:
    if sys_.d <= 1:
        return []
    out = []
    s = orientation_factor(sys_.d)
    for ch, pt, rep in infinite_equilibria(sys_):
        if rep.kind == "degenerate":
            if form == "eq2":
                rep = resolve_degenerate(chart_system(sys_, ch), params)
            else:
                # eq1 is eq2 under (x,y,t)->(y,x,-t), which swaps U1 and U2
                twin = build_system(params, "eq2")
                mapped = resolve_degenerate(chart_system(twin, ChartId(ch.value[0] + "2")), params)
                rep = EquilibriumReport(rep.location, str(ch), rep.jac, rep.delta, rep.gamma,
                                        mapped.kind, provenance=mapped.provenance,
                                        notes=mapped.notes + ["resolved on eq2 through (x,y,t)->(y,x,-t)"],
                                        children=[_reverse_report(c) for c in mapped.children])
        out.append(InfinitePoint(str(ch), tuple(pt), tuple(_equator_direction(ch, pt)),
                                 s if ch.value[0] == "V" else 1, rep))
    return out


def _reverse_report(rep: EquilibriumReport) -> EquilibriumReport:
    return EquilibriumReport(rep.location, rep.chart, rep.jac, rep.delta, rep.gamma,
                             reversed_kind(rep.kind), rep.provenance, list(rep.notes),
                             rep.children, rep.semi)


def _seed_task(args):
    a, n, form, seed, direction, cycle_pts, t_cap, outer = args
    sys_ = build_system(RayleighParams(a, n), form)
    return _trace(sys_, seed, direction, cycle_pts, t_cap, outer)


def _trace(sys_, seed, direction, cycle_pts, t_cap, outer) -> OrbitSample:
    """Integrate until near the origin, near the cycle, or past disc radius ``outer``."""
    seed_dist = None if cycle_pts is None else float(np.min(np.hypot(*(cycle_pts - seed).T)))
    reason = {"why": "time cap"}

    def stop(x, y):
        r2 = x * x + y * y
        if r2 / (1.0 + r2) >= outer * outer:
            reason["why"] = "boundary"
            return True
        if r2 <= NEAR_TOL ** 2:
            reason["why"] = "origin"
            return True
        if cycle_pts is not None and (seed_dist is None or seed_dist > NEAR_TOL):
            if np.min(np.hypot(cycle_pts[:, 0] - x, cycle_pts[:, 1] - y)) <= NEAR_TOL:
                reason["why"] = "cycle"
                return True
        return False

    t_end = t_cap if direction == "forward" else -t_cap
    try:
        traj = integrate(sys_, seed, t_end, 1e-9, 1e-11, stop=stop)
    except BlowUp as exc:
        traj = exc.trajectory
        reason["why"] = "boundary"
    pts = np.column_stack([traj.x, traj.y])
    return OrbitSample(disc_project(pts), (float(seed[0]), float(seed[1])), "orbit",
                       f"{direction}: {reason['why']}")


def _center_loops(sys_, radii) -> list[OrbitSample]:
    out = []
    for r in radii:
        traj = integrate(sys_, (r, 0.0), 2 * math.pi, 1e-10, 1e-12)
        pts = traj.sample(240)
        pts[-1] = pts[0]
        out.append(OrbitSample(disc_project(pts), (float(r), 0.0), "loop", "closed"))
    return out


def _qualitative_arcs(sys_, inf_points) -> list[OrbitSample]:
    """Hyperbolic-sector arcs near resolved degenerate points at infinity.

    The arc shape is schematic; its direction is taken from the vector field
    at the arc midpoint.
    """
    out = []
    for ip in inf_points:
        if ip.report.kind != "degenerate-resolved":
            continue
        th0 = math.atan2(ip.disc[1], ip.disc[0])
        for eps in (0.015, 0.04):
            phis = th0 + np.linspace(-0.5, 0.5, 41)
            rho = 1.0 - eps - 0.35 * (phis - th0) ** 2
            pts = np.column_stack([rho * np.cos(phis), rho * np.sin(phis)])
            mid = disc_unproject(pts[20])
            vel = np.array([sys_.P(*mid), sys_.Q(*mid)])
            tangent = disc_unproject(pts[21]) - disc_unproject(pts[19])
            if float(vel @ tangent) < 0:
                pts = pts[::-1]
            out.append(OrbitSample(pts, (float(mid[0]), float(mid[1])), "sector",
                                   f"near {ip.chart}", qualitative=True))
    return out


@dataclass
class PortraitFeatures:
    """Everything that determines the class, without sampled orbits."""

    origin: EquilibriumReport
    infinite: list[InfinitePoint]
    cycle: LimitCycleRecord | None
    signature: tuple
    class_tag: str
    notes: list[str]


def portrait_features(params: RayleighParams, form: str = "eq2", *, rtol: float | None = None,
                      atol: float | None = None) -> PortraitFeatures:
    sys_ = build_system(params, form)
    origin = classify_origin_finite(params, form)
    inf_pts = _infinite_points(params, form, sys_)
    cycle = None
    if params.a_exact != 0:
        tol = {k: v for k, v in (("rtol", rtol), ("atol", atol)) if v is not None}
        cycle = find_cycle(params, form, **tol)
        inf_stab = "attracting" if infinity_attracts(sys_) else "repelling"
        signature = (origin.stability, cycle.stability, inf_stab)
    else:
        signature = ("center", None, None)
    tag = _sign_tag(params)
    implied = _feature_tag(signature)
    notes = []
    if form == "eq2" and implied != tag:
        notes.append(f"feature-implied class {implied} differs from sign tag {tag}")
    if form == "eq1":
        notes.append(f"features match eq2 class {implied}")
    return PortraitFeatures(origin, inf_pts, cycle, signature, tag, notes)


def build_portrait(params: RayleighParams, form: str = "eq2", *, seeds: int = 8,
                   jobs: int = 1, t_cap: float = T_CAP) -> PortraitModel:
    """Collect the features of the portrait and sample orbits."""
    sys_ = build_system(params, form)
    feats = portrait_features(params, form)
    radii = np.geomspace(0.05, 8.0, seeds)
    if feats.cycle is None:
        orbits = _center_loops(sys_, radii)
    else:
        cyc = feats.cycle.orbit
        tasks = []
        for r in radii:
            for direction in ("forward", "backward"):
                tasks.append((params.a, params.n, form, np.array([r, 0.0]), direction, cyc,
                              t_cap, DISC_STOP))
        far = 30.0
        for k in range(8):
            ang = (k + 0.5) * math.pi / 4
            seed = far * np.array([math.cos(ang), math.sin(ang)])
            for direction in ("forward", "backward"):
                tasks.append((params.a, params.n, form, seed, direction, cyc, t_cap, 0.9999))
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                orbits = list(ex.map(_seed_task, tasks))
        else:
            orbits = [_seed_task(t) for t in tasks]
        orbits.extend(_qualitative_arcs(sys_, feats.infinite))
    return PortraitModel(params, form, [feats.origin], feats.infinite, feats.cycle, orbits,
                         feats.class_tag, feats.signature, feats.notes)


def topological_class(p1: PortraitModel, p2: PortraitModel) -> str:
    """``equivalent`` when the computed feature signatures coincide, else ``distinct``.

    Within one form this is the same as comparing class tags.
    """
    return "equivalent" if p1.signature == p2.signature else "distinct"


# -- SVG ----------------------------------------------------------------------

_GLYPH_COLOR = {"attracting": "#1f5fbf", "repelling": "#c0392b", None: "#333333"}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _glyph(parent, kind: str, cx: float, cy: float, s: float, color: str):
    """Equilibrium marker; only the boundary uses a circle element."""
    attrs = {"class": f"equilibrium {kind}", "fill": color, "stroke": "black", "stroke-width": "0.8"}
    if kind.endswith("node") or "node-" in kind:
        el = ET.SubElement(parent, "rect", x=_fmt(cx - s), y=_fmt(cy - s), width=_fmt(2 * s),
                           height=_fmt(2 * s), **attrs)
    elif "focus" in kind or kind == "center-or-weak-focus":
        pts = [(cx, cy - s * 1.3), (cx + s * 1.3, cy), (cx, cy + s * 1.3), (cx - s * 1.3, cy)]
        el = ET.SubElement(parent, "polygon", points=" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts),
                           **attrs)
    elif kind == "center":
        d = f"M{_fmt(cx - s)},{_fmt(cy)} H{_fmt(cx + s)} M{_fmt(cx)},{_fmt(cy - s)} V{_fmt(cy + s)}"
        el = ET.SubElement(parent, "path", d=d, stroke=color, **{"stroke-width": "2",
                                                                 "class": f"equilibrium {kind}"})
    elif kind == "saddle":
        d = (f"M{_fmt(cx - s)},{_fmt(cy - s)} L{_fmt(cx + s)},{_fmt(cy + s)} "
             f"M{_fmt(cx - s)},{_fmt(cy + s)} L{_fmt(cx + s)},{_fmt(cy - s)}")
        el = ET.SubElement(parent, "path", d=d, stroke=color, **{"stroke-width": "2",
                                                                 "class": f"equilibrium {kind}"})
    elif kind.startswith("semi-hyperbolic") or kind == "saddle-node":
        pts = [(cx, cy - s * 1.3), (cx + s * 1.2, cy + s), (cx - s * 1.2, cy + s)]
        el = ET.SubElement(parent, "polygon", points=" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts),
                           **attrs)
    else:
        # degenerate points: six-pointed star
        pts = []
        for k in range(12):
            rad = s * (1.5 if k % 2 == 0 else 0.7)
            ang = k * math.pi / 6
            pts.append((cx + rad * math.cos(ang), cy + rad * math.sin(ang)))
        el = ET.SubElement(parent, "polygon", points=" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts),
                           **attrs)
    ET.SubElement(el, "title").text = kind
    return el


def _arrow(parent, p0, p1, size: float, color: str):
    d = np.asarray(p1) - np.asarray(p0)
    norm = float(np.hypot(*d))
    if norm == 0:
        return
    d /= norm
    nrm = np.array([-d[1], d[0]])
    tip = np.asarray(p1)
    base = tip - size * d
    pts = [tip, base + 0.5 * size * nrm, base - 0.5 * size * nrm]
    ET.SubElement(parent, "polygon", points=" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts),
                  fill=color, **{"class": "arrow"})


def render_svg(model: PortraitModel, size_px: int = 600) -> str:
    """SVG 1.1 text for ``model``; ``size_px`` is the square canvas side."""
    if int(size_px) < 200:
        raise ValueError("size_px must be >= 200")
    size = int(size_px)
    margin = 0.06 * size
    R = size / 2 - margin
    c = size / 2

    def to_px(q):
        q = np.atleast_2d(q)
        return np.column_stack([c + R * q[:, 0], c - R * q[:, 1]])

    ET.register_namespace("", "http://www.w3.org/2000/svg")
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                     width=str(size), height=str(size), viewBox=f"0 0 {size} {size}")
    a, n = model.params.a, model.params.n
    ET.SubElement(svg, "title").text = f"{model.form} a={a} n={n} class {model.class_tag}"
    ET.SubElement(svg, "rect", x="0", y="0", width=str(size), height=str(size), fill="white")
    orbits = ET.SubElement(svg, "g", id="orbits", fill="none")
    arrow_size = max(6.0, size / 80)
    for orb in model.orbits:
        px = to_px(orb.points)
        if len(px) < 2:
            continue
        cls = "orbit loop" if orb.kind == "loop" else ("orbit qualitative" if orb.qualitative else "orbit")
        color = "#888888" if orb.qualitative else "#4a4a4a"
        attrs = {"class": cls, "stroke": color, "stroke-width": "1"}
        if orb.qualitative:
            attrs["stroke-dasharray"] = "4,3"
        ET.SubElement(orbits, "polyline", points=" ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in px),
                      **attrs)
        # arrow at half arc length
        seg = np.hypot(*np.diff(px, axis=0).T)
        if seg.sum() < 3 * arrow_size:
            continue
        k = int(np.searchsorted(np.cumsum(seg), seg.sum() / 2))
        k = min(max(k, 0), len(px) - 2)
        _arrow(orbits, px[k], px[k + 1], arrow_size, color)
    if model.cycle is not None and model.cycle_disc is not None:
        px = to_px(model.cycle_disc)
        d = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in px) + " Z"
        ET.SubElement(svg, "path", d=d, fill="none", stroke="#e67e22",
                      **{"stroke-width": "3", "class": "cycle highlighted"})
        k = len(px) // 4
        _arrow(svg, px[k], px[k + 1], arrow_size * 1.3, "#e67e22")
    ET.SubElement(svg, "circle", cx=_fmt(c), cy=_fmt(c), r=_fmt(R), fill="none", stroke="black",
                  **{"stroke-width": "2", "class": "boundary"})
    glyphs = ET.SubElement(svg, "g", id="equilibria")
    s = size / 110
    for rep in model.finite_equilibria:
        x, y = to_px(disc_project([float(v) for v in rep.location]))[0]
        _glyph(glyphs, rep.kind, x, y, s, _GLYPH_COLOR[rep.stability])
    for ip in model.infinite_equilibria:
        x, y = to_px(np.array(ip.disc))[0]
        g = _glyph(glyphs, ip.report.kind, x, y, s, _GLYPH_COLOR[ip.report.stability])
        g.set("data-chart", ip.chart)
        g.set("data-orientation", str(ip.orientation))
    return ET.tostring(svg, encoding="unicode", xml_declaration=False)


def point_in_polygon(pt, poly: np.ndarray) -> bool:
    """Even-odd rule test."""
    x, y = float(pt[0]), float(pt[1])
    inside = False
    xs, ys = poly[:, 0], poly[:, 1]
    j = len(poly) - 1
    for i in range(len(poly)):
        if (ys[i] > y) != (ys[j] > y):
            xc = xs[i] + (y - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i])
            if x < xc:
                inside = not inside
        j = i
    return inside
