"""Return maps on the positive x-axis, the limit cycle, and its stability.

The section radius is the x-coordinate of the crossing point. When infinity
attracts forward orbits (``eq2`` with ``a > 0``, ``eq1`` with ``a < 0``) the
forward map is undefined for large radii because those orbits escape in finite
time, so cycle search and scans use the backward map instead; it has the same
fixed points and the reciprocal multiplier.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .flow import (DEFAULT_ATOL, DEFAULT_RTOL, BlowUp, first_return, integrate,
                   line_crossing)
from .vectorfield import PlanarPolySystem, RayleighParams, build_system

__all__ = [
    "ReturnMapSample",
    "LimitCycleRecord",
    "NoCycleFound",
    "return_map",
    "displacement",
    "find_cycle",
    "uniqueness_scan",
    "averaging_amplitude",
    "averaging_quadrature",
    "mean_energy_production",
    "infinity_attracts",
    "trapping_prediction",
    "default_grid",
    "segmented_multiplier",
]


class NoCycleFound(RuntimeError):
    pass


@dataclass(frozen=True)
class ReturnMapSample:
    r_in: float
    r_out: float
    period: float
    err_est: float
    direction: str = "forward"


@dataclass
class LimitCycleRecord:
    a: float
    n: int
    form: str
    r_star: float
    period: float
    multiplier: float
    stability: str
    amp_x: float
    amp_y: float
    residual: float
    divergence_exponent: float
    multiplier_div: float
    direction: str
    multiplier_method: str = "direct"
    flagged: bool = False
    notes: list[str] = field(default_factory=list)
    orbit: np.ndarray | None = field(default=None, repr=False)

    def row(self) -> dict:
        return {"a": self.a, "n": self.n, "r_star": self.r_star, "period": self.period,
                "multiplier": self.multiplier, "stability": self.stability,
                "amp_x": self.amp_x, "amp_y": self.amp_y, "residual": self.residual}

    def to_dict(self) -> dict:
        d = self.row()
        d.update(form=self.form, divergence_exponent=self.divergence_exponent,
                 multiplier_div=self.multiplier_div, direction=self.direction,
                 multiplier_method=self.multiplier_method,
                 flagged=self.flagged, notes=list(self.notes))
        return d


def _direction_flag(direction: str) -> bool:
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return direction == "backward"


def return_map(params: RayleighParams, form: str = "eq2", r: float = 1.0, *,
               direction: str = "forward", rtol: float = DEFAULT_RTOL,
               atol: float = DEFAULT_ATOL, estimate_error: bool = True) -> ReturnMapSample:
    """One application of the return map at radius ``r``.

    ``err_est`` is the change in ``r_out`` when ``rtol`` is tightened tenfold.
    """
    if not 0 < r < 100:
        raise ValueError("r must lie in (0, 100)")
    sys_ = build_system(params, form)
    return _sample(sys_, r, _direction_flag(direction), rtol, atol, estimate_error)


def _sample(sys_, r, reverse, rtol, atol, estimate_error) -> ReturnMapSample:
    ev = first_return(sys_, r, rtol, atol, reverse=reverse)
    err = math.nan
    if estimate_error:
        fine = first_return(sys_, r, max(rtol / 10, 1e-13), max(atol / 10, 1e-13), reverse=reverse)
        err = abs(fine.radius - ev.radius)
    return ReturnMapSample(r, ev.radius, ev.period, err, "backward" if reverse else "forward")


def displacement(sys_: PlanarPolySystem, r: float, reverse: bool, rtol=DEFAULT_RTOL,
                 atol=DEFAULT_ATOL) -> float:
    """Signed quantity with the sign of ``P(r) - r`` for the forward map.

    With the backward map ``B = P^-1`` this is ``r - B(r)``, which has the same
    sign because ``P`` is increasing.
    """
    out = first_return(sys_, r, rtol, atol, reverse=reverse).radius
    return r - out if reverse else out - r


def infinity_attracts(sys_: PlanarPolySystem) -> bool:
    """True when the hyperbolic nodes at infinity attract forward orbits."""
    from .compactification import infinite_equilibria

    if sys_.d <= 1:
        return False
    stab = {rep.stability for _, _, rep in infinite_equilibria(sys_)
            if rep.kind in ("stable-node", "unstable-node")}
    if len(stab) != 1:
        raise ValueError(f"cannot read the behaviour of infinity from {stab}")
    return stab.pop() == "attracting"


def trapping_prediction(params: RayleighParams, form: str = "eq2") -> str | None:
    """Stability forced on the cycle by the origin and infinity, or ``None``.

    Origin and infinity both repelling trap orbits in an annulus in forward
    time, so the cycle attracts; both attracting gives the reverse.
    """
    from .localanalysis import classify_origin_finite

    origin = classify_origin_finite(params, form).stability
    sys_ = build_system(params, form)
    if sys_.d <= 1:
        return None
    inf = "attracting" if infinity_attracts(sys_) else "repelling"
    if origin == inf == "repelling":
        return "stable"
    if origin == inf == "attracting":
        return "unstable"
    return None


def mean_energy_production(r: float, n: int) -> float:
    """Average of ``(1 - (r sin t)^(2n)) (r sin t)^2`` over a period, by quadrature."""
    val, _ = quad(lambda th: (1.0 - (r * math.sin(th)) ** (2 * n)) * (r * math.sin(th)) ** 2,
                  0.0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val / (2 * math.pi)


def averaging_quadrature(n: int) -> float:
    """Positive root of :func:`mean_energy_production`, found numerically."""
    return brentq(mean_energy_production, 0.5, 2.0, args=(n,), xtol=1e-15, rtol=1e-15)


def averaging_amplitude(n: int) -> float:
    """First-order averaging amplitude ``(2^(2n+1) / C(2n+2, n+1))^(1/(2n))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (2 ** (2 * n + 1) / math.comb(2 * n + 2, n + 1)) ** (1.0 / (2 * n))


def default_grid(num: int = 100, lo: float = 0.05, hi: float = 10.0) -> np.ndarray:
    return np.linspace(lo, hi, num)


def _scan_task(args):
    a, n, form, r, reverse, rtol, atol = args
    sys_ = build_system(RayleighParams(a, n), form)
    return displacement(sys_, r, reverse, rtol, atol)


def uniqueness_scan(params: RayleighParams, form: str = "eq2", r_grid=None, *,
                    rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
                    zero_tol: float = 1e-8, jobs: int = 1):
    """Count sign changes of ``P(r) - r`` over ``r_grid``.

    Values within ``zero_tol`` of zero carry no sign. Returns
    ``(count, sign_pattern)``.
    """
    grid = default_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("r_grid must be increasing")
    sys_ = build_system(params, form)
    reverse = infinity_attracts(sys_)
    if jobs > 1:
        tasks = [(params.a, params.n, form, float(r), reverse, rtol, atol) for r in grid]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            disp = list(ex.map(_scan_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        disp = [displacement(sys_, float(r), reverse, rtol, atol) for r in grid]
    pattern = [0 if abs(d) <= zero_tol else (1 if d > 0 else -1) for d in disp]
    signed = [s for s in pattern if s]
    count = sum(1 for s0, s1 in zip(signed, signed[1:]) if s0 != s1)
    return count, pattern


def _bracket(D, params: RayleighParams, bracket):
    if bracket is not None:
        lo, hi = map(float, bracket)
    elif abs(float(params.a)) < 0.1:
        ravg = averaging_amplitude(params.n)
        lo, hi = 0.5 * ravg, 1.5 * ravg
    else:
        lo, hi = 0.1, 10.0
    dlo, dhi = D(lo), D(hi)
    tries = 0
    while dlo * dhi > 0:
        if tries >= 6:
            raise NoCycleFound(f"no sign change of P(r)-r on [{lo:.3g}, {hi:.3g}]")
        lo, hi = max(lo / 2, 1e-3), min(hi * 2, 99.0)
        dlo, dhi = D(lo), D(hi)
        tries += 1
    return lo, hi, dlo, dhi


def find_cycle(params: RayleighParams, form: str = "eq2", bracket=None, *,
               rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
               orbit_points: int = 2000) -> LimitCycleRecord:
    """Locate the fixed point of the return map and measure the cycle.

    Bisection down to width 1e-6, then secant steps on ``P(r) - r``. The
    multiplier comes from a central difference of the map and is checked
    against ``exp`` of the divergence integrated once around the cycle.
    """
    if params.a_exact == 0:
        raise NoCycleFound("a = 0: the origin is a linear center, every orbit is periodic")
    sys_ = build_system(params, form)
    reverse = infinity_attracts(sys_)

    def D(r):
        return displacement(sys_, r, reverse, rtol, atol)

    lo, hi, dlo, dhi = _bracket(D, params, bracket)
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        dm = D(mid)
        if dm == 0:
            lo = hi = mid
            dlo = dhi = 0.0
            break
        if (dm > 0) == (dlo > 0):
            lo, dlo = mid, dm
        else:
            hi, dhi = mid, dm
    # secant polish
    r0, d0, r1, d1 = lo, dlo, hi, dhi
    best = (abs(d0), r0) if abs(d0) < abs(d1) else (abs(d1), r1)
    for _ in range(30):
        if best[0] <= 1e-11 or d1 == d0:
            break
        r2 = r1 - d1 * (r1 - r0) / (d1 - d0)
        d2 = D(r2)
        r0, d0, r1, d1 = r1, d1, r2, d2
        if abs(d2) < best[0]:
            best = (abs(d2), r2)
    r_star = best[1]

    ev = first_return(sys_, r_star, rtol, atol, reverse=reverse, with_divergence=True,
                      keep_trajectory=True)
    residual = abs(ev.radius - r_star)
    h = max(1e-5 * r_star, 1e-6)
    method = "direct"
    try:
        plus = first_return(sys_, r_star + h, rtol, atol, reverse=reverse).radius
        minus = first_return(sys_, r_star - h, rtol, atol, reverse=reverse).radius
        spread = plus - minus
    except BlowUp:
        spread = math.nan
    # Below ~1e-8 the spread is dominated by integration error, so the
    # difference quotient says nothing about a strongly contracting map.
    if math.isfinite(spread) and abs(spread) >= 1e-8:
        mu_dir = spread / (2 * h)
        mu = 1.0 / mu_dir if reverse else mu_dir
    else:
        method = "segmented"
        mu = segmented_multiplier(sys_, ev, rtol=rtol, atol=atol)
    mu_div = math.exp(-ev.divergence_integral if reverse else ev.divergence_integral)
    div_exponent = -ev.divergence_integral if reverse else ev.divergence_integral

    pts = ev.trajectory.sample(orbit_points)
    rec = LimitCycleRecord(
        a=float(params.a), n=params.n, form=form, r_star=r_star, period=ev.period,
        multiplier=mu, stability="stable" if mu < 1 else "unstable",
        amp_x=float(np.max(np.abs(pts[:, 0]))), amp_y=float(np.max(np.abs(pts[:, 1]))),
        residual=residual, divergence_exponent=div_exponent, multiplier_div=mu_div,
        direction="backward" if reverse else "forward", multiplier_method=method, orbit=pts)
    if abs(mu - mu_div) > 0.05 * abs(mu_div):
        rec.flagged = True
        rec.notes.append(f"multiplier mismatch: finite difference {mu:.6g} vs divergence {mu_div:.6g}")
    if residual > 1e-8:
        rec.flagged = True
        rec.notes.append(f"fixed-point residual {residual:.3g} above 1e-8")
    return rec


def segmented_multiplier(sys_: PlanarPolySystem, event, segments: int = 120, h: float = 1e-6,
                         rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """Forward return-map derivative as a product of short transition-map slopes.

    The cycle in ``event.trajectory`` is cut by ``segments`` lines normal to
    the flow, equally spaced in time, with the positive x-axis as the first
    and last section. Each transition map between consecutive lines is
    differentiated by a central difference of step ``h``; the chain rule
    gives the derivative of the full map even when it is far below the
    resolution of a single difference quotient.
    """
    traj = event.trajectory
    if traj is None:
        raise ValueError("event must carry the cycle trajectory")
    T = event.period
    times = traj.t[0] + T * np.arange(segments + 1) / segments
    pts = traj.at(times)
    pts[0] = pts[-1] = (event.radius, 0.0)
    sections = []
    for k, p in enumerate(pts):
        if k in (0, segments):
            # x-axis, crossed downward: normal (0, -1), parameter = x
            sections.append((p, np.array([0.0, -1.0]), np.array([1.0, 0.0])))
            continue
        nv = np.array([sys_.P(p[0], p[1]), sys_.Q(p[0], p[1])], dtype=float)
        nv /= np.hypot(*nv)
        sections.append((p, nv, np.array([-nv[1], nv[0]])))
    # forward direction of the x-axis crossing must match the chosen normal
    if sys_.Q(event.radius, 0.0) > 0:
        sections[0] = sections[-1] = (pts[0], np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    dt = T / segments
    log_mu = 0.0
    for k in range(segments):
        p0, _, e0 = sections[k]
        p1, n1, e1 = sections[k + 1]
        out = []
        for s0 in (h, -h):
            _, z = line_crossing(sys_, p0 + s0 * e0, p1, n1, 3 * dt + 1.0, rtol, atol)
            out.append(float((z - p1) @ e1))
        slope = (out[0] - out[1]) / (2 * h)
        if slope <= 0:
            raise ArithmeticError(f"non-positive transition slope {slope:.3g} on segment {k}")
        log_mu += math.log(slope)
    return math.exp(log_mu)


def closed_orbit(sys_: PlanarPolySystem, r: float, num: int = 400, rtol=DEFAULT_RTOL,
                 atol=DEFAULT_ATOL) -> np.ndarray:
    """One revolution through ``(r, 0)`` sampled at ``num`` points (for centers)."""
    ev = first_return(sys_, r, rtol, atol)
    traj = integrate(sys_, (r, 0.0), ev.t, rtol, atol)
    return traj.sample(num)
