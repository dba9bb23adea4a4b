"""Trajectory integration and Poincare-section crossings.

Steps are taken with scipy's explicit Runge-Kutta 8(5,3) pair (DOP853), whose
7th-order continuous extension is used to place section crossings.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .vectorfield import PlanarPolySystem

__all__ = [
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
    "ESCAPE_RADIUS",
    "IntegrationError",
    "StepSizeUnderflow",
    "BlowUp",
    "NonReturningOrbit",
    "Trajectory",
    "SectionEvent",
    "integrate",
    "first_return",
    "line_crossing",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
ESCAPE_RADIUS = 1e6
EVENT_TOL = 1e-12


class IntegrationError(RuntimeError):
    def __init__(self, message: str, last_state=None, t: float | None = None):
        super().__init__(message)
        self.last_state = last_state
        self.t = t


class StepSizeUnderflow(IntegrationError):
    pass


class BlowUp(IntegrationError):
    """State left the ball of radius ``ESCAPE_RADIUS``; ``t`` estimates the escape time."""

    trajectory = None


class NonReturningOrbit(IntegrationError):
    pass


def _check_tols(rtol: float, atol: float):
    for name, v in (("rtol", rtol), ("atol", atol)):
        if not (1e-13 <= v <= 1e-3):
            raise ValueError(f"{name}={v} outside [1e-13, 1e-3]")


def _rhs(sys_: PlanarPolySystem, sign: float, with_div: bool):
    P, Q = sys_.P, sys_.Q
    if with_div:
        D = sys_.divergence

        def fun(t, s):
            x, y = s[0], s[1]
            return np.array([sign * P(x, y), sign * Q(x, y), sign * D(x, y)])
    else:
        def fun(t, s):
            x, y = s[0], s[1]
            return np.array([sign * P(x, y), sign * Q(x, y)])
    return fun


def _stepper(sys_, x0, sign, t_bound, rtol, atol, with_div, max_radius):
    """Yield the solver after every accepted step."""
    fun = _rhs(sys_, sign, with_div)
    y0 = [float(x0[0]), float(x0[1])] + ([0.0] if with_div else [])
    solver = DOP853(fun, 0.0, y0, t_bound, rtol=rtol, atol=atol)
    while solver.status == "running":
        prev = solver.y.copy()
        # trial stages near a finite-time escape may overflow; the escape
        # check below turns that into BlowUp
        with np.errstate(over="ignore", invalid="ignore"):
            msg = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"step size underflow: {msg}", last_state=prev[:2],
                                    t=sign * solver.t)
        y = solver.y
        if not (math.isfinite(y[0]) and math.isfinite(y[1])) or math.hypot(y[0], y[1]) > max_radius:
            raise BlowUp(f"orbit escaped past radius {max_radius:g} near t={sign * solver.t:.6g}",
                         last_state=prev[:2], t=sign * solver.t)
        yield solver


@dataclass(frozen=True)
class Trajectory:
    """States in ascending time order, plus the dense pieces that produced them."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)
    _pieces: tuple = field(default=(), repr=False, compare=False)
    _sign: float = field(default=1.0, repr=False, compare=False)

    @property
    def states(self) -> list[tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.x.tolist(), self.y.tolist()))

    @property
    def final(self) -> np.ndarray:
        return np.array([self.x[-1], self.y[-1]]) if self._sign > 0 else np.array([self.x[0], self.y[0]])

    def at(self, times) -> np.ndarray:
        """Dense-output states at ``times`` (within the integrated span), shape ``(k, 2)``."""
        taus = self._sign * np.atleast_1d(np.asarray(times, dtype=float))
        ends = np.array([p[1] for p in self._pieces])
        idx = np.clip(np.searchsorted(ends, taus), 0, len(self._pieces) - 1)
        out = np.empty((taus.size, 2))
        for k in np.unique(idx):
            mask = idx == k
            vals = self._pieces[k][2](taus[mask])
            out[mask] = np.asarray(vals)[:2].T
        return out

    def sample(self, num: int) -> np.ndarray:
        """``num`` points evenly spaced in time, ascending, shape ``(num, 2)``."""
        ts = np.linspace(self.t[0], self.t[-1], num)
        return self.at(ts)

    def to_csv(self, target=None) -> str | None:
        buf = io.StringIO() if target is None else None
        fh = buf if buf is not None else open(target, "w", newline="")
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "y"])
            for row in zip(self.t, self.x, self.y):
                w.writerow([repr(float(v)) for v in row])
        finally:
            if buf is None:
                fh.close()
        return buf.getvalue() if buf is not None else None


def integrate(sys_: PlanarPolySystem, x0, t_end: float, rtol: float = DEFAULT_RTOL,
              atol: float = DEFAULT_ATOL, *, max_radius: float = ESCAPE_RADIUS,
              stop=None) -> Trajectory:
    """Integrate from ``x0`` over ``[0, t_end]`` (``t_end < 0`` runs backward).

    ``stop(x, y)`` is checked after each accepted step; a true value ends the
    run there. Escape past ``max_radius`` raises :class:`BlowUp` carrying the
    partial trajectory.
    """
    _check_tols(rtol, atol)
    if not math.isfinite(t_end):
        raise ValueError("t_end must be finite")
    sign = 1.0 if t_end >= 0 else -1.0
    taus, xs, ys, pieces = [0.0], [float(x0[0])], [float(x0[1])], []
    stopped = False

    def build(reason):
        t = sign * np.array(taus)
        x, y = np.array(xs), np.array(ys)
        if sign < 0:
            t, x, y = t[::-1], x[::-1], y[::-1]
        meta = {"system": sys_.name, "rtol": rtol, "atol": atol, "steps": len(pieces),
                "end": reason}
        return Trajectory(t, x, y, meta, tuple(pieces), sign)

    try:
        if t_end != 0:
            for solver in _stepper(sys_, x0, sign, abs(t_end), rtol, atol, False, max_radius):
                pieces.append((solver.t_old, solver.t, solver.dense_output()))
                taus.append(solver.t)
                xs.append(solver.y[0])
                ys.append(solver.y[1])
                if stop is not None and stop(solver.y[0], solver.y[1]):
                    stopped = True
                    break
    except BlowUp as exc:
        exc.trajectory = build("blow-up") if pieces else None
        raise
    return build("stop" if stopped else "t_end")


@dataclass(frozen=True)
class SectionEvent:
    """Next crossing of the positive x-axis in the starting direction.

    ``t`` is signed (negative for a backward return). ``divergence_integral``
    is the integral of the divergence of the integrated field over the arc, so
    ``exp`` of it is the derivative of the return map at a fixed point.
    """

    t: float
    state: tuple[float, float]
    section: str = "positive-x-axis"
    crossing_direction: int = -1
    divergence_integral: float | None = None
    steps: int = 0
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def period(self) -> float:
        return abs(self.t)

    @property
    def radius(self) -> float:
        return self.state[0]


def first_return(sys_: PlanarPolySystem, r: float, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, *, reverse: bool = False,
                 t_max: float = 50 * 2 * math.pi, with_divergence: bool = False,
                 keep_trajectory: bool = False,
                 max_radius: float = ESCAPE_RADIUS) -> SectionEvent:
    """Return of the orbit through ``(r, 0)`` to the positive x-axis."""
    _check_tols(rtol, atol)
    if not r > 0:
        raise ValueError("r must be positive")
    sign = -1.0 if reverse else 1.0
    ydot0 = sign * sys_.Q(r, 0.0)
    if ydot0 == 0:
        raise ValueError(f"section is not transversal at r={r}")
    direction = 1 if ydot0 > 0 else -1
    Q = sys_.Q
    pieces, taus, xs, ys = [], [0.0], [r], [0.0]
    steps = 0
    for solver in _stepper(sys_, (r, 0.0), sign, t_max, rtol, atol, with_divergence, max_radius):
        steps += 1
        dense = solver.dense_output()
        if keep_trajectory:
            pieces.append((solver.t_old, solver.t, dense))
            taus.append(solver.t)
            xs.append(solver.y[0])
            ys.append(solver.y[1])
        y_old = dense(solver.t_old)[1]
        y_new = solver.y[1]
        if direction * y_old < 0 <= direction * y_new:
            tc = _locate(dense, solver.t_old, solver.t, sign, Q)
            state = dense(tc)
            if state[0] > 0:
                div = float(state[2]) if with_divergence else None
                traj = None
                if keep_trajectory:
                    taus[-1], xs[-1], ys[-1] = tc, state[0], state[1]
                    traj = Trajectory(sign * np.array(taus), np.array(xs), np.array(ys),
                                      {"system": sys_.name, "rtol": rtol, "atol": atol},
                                      tuple(pieces), sign)
                    if sign < 0:
                        traj = Trajectory(traj.t[::-1], traj.x[::-1], traj.y[::-1], traj.meta,
                                          traj._pieces, sign)
                return SectionEvent(sign * tc, (float(state[0]), float(state[1])),
                                    crossing_direction=direction, divergence_integral=div,
                                    steps=steps, trajectory=traj)
    raise NonReturningOrbit(f"no return to the section within |t| <= {t_max:.6g}",
                            last_state=None, t=sign * t_max)


def _locate(dense, t0, t1, sign, Q) -> float:
    g = lambda t: dense(t)[1]  # noqa: E731
    g0, g1 = g(t0), g(t1)
    if g1 == 0.0:
        return t1
    if g0 == 0.0:
        return t0
    tc = brentq(g, t0, t1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    for _ in range(3):
        s = dense(tc)
        yv = s[1]
        if abs(yv) <= EVENT_TOL * 1e-3:
            break
        slope = sign * Q(s[0], s[1])
        if slope == 0:
            break
        cand = tc - yv / slope
        if not (t0 <= cand <= t1):
            break
        tc = cand
    if abs(g(tc)) > EVENT_TOL:
        raise IntegrationError(f"crossing not resolved: |y|={abs(g(tc)):.3g}")
    return tc


def line_crossing(sys_: PlanarPolySystem, z0, point, normal, t_max: float,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> tuple[float, np.ndarray]:
    """First forward crossing of the line ``(z - point) . normal = 0`` from below.

    Returns ``(t, state)``. Used for short transition maps between sections
    that are not coordinate axes.
    """
    _check_tols(rtol, atol)
    p = np.asarray(point, dtype=float)
    nv = np.asarray(normal, dtype=float)
    P, Q = sys_.P, sys_.Q
    for solver in _stepper(sys_, z0, 1.0, t_max, rtol, atol, False, ESCAPE_RADIUS):
        dense = solver.dense_output()
        g = lambda t: float((dense(t)[:2] - p) @ nv)  # noqa: E731
        g0, g1 = g(solver.t_old), g(solver.t)
        if g0 < 0 <= g1:
            tc = solver.t if g1 == 0 else brentq(g, solver.t_old, solver.t, xtol=1e-15,
                                                 rtol=4 * np.finfo(float).eps, maxiter=200)
            for _ in range(2):
                s = dense(tc)[:2]
                slope = P(s[0], s[1]) * nv[0] + Q(s[0], s[1]) * nv[1]
                if slope == 0:
                    break
                cand = tc - float((s - p) @ nv) / slope
                if not (solver.t_old <= cand <= solver.t):
                    break
                tc = cand
            return tc, np.asarray(dense(tc)[:2], dtype=float)
    raise NonReturningOrbit(f"line not reached within t <= {t_max:.6g}", last_state=None, t=t_max)
