"""Closed-form and quadrature solutions built from first integrals.

V3b is solved exactly from its exponential LFIs.  For separable motions the
one-dimensional energy integral t = int dx / sqrt(2 (E - F(x))) is inverted
numerically; turning points are handled by substitutions that remove the
inverse square-root endpoint singularity.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .dynamics import State, integrate
from .errors import QuadratureDomain

QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
TABLE_SIZE = 128
MAX_REACH = 1e8


# --- one-dimensional motion ---------------------------------------------------

class _InverseTable:
    """Invert tau(s) = int_0^s g for increasing tau, s in [0, S] or [0, inf)."""

    def __init__(self, g, h, S=None):
        self.g = g
        self.S = S
        self.s = [0.0]
        self.tau = [0.0]
        self.h = h
        if S is not None:
            for s in np.linspace(0.0, S, TABLE_SIZE + 1)[1:]:
                self._push(float(s))

    def _push(self, s):
        a = self.s[-1]
        val, _ = quad(self.g, a, s, **QUAD_OPTS)
        if not math.isfinite(val):
            raise QuadratureDomain("quadrature diverged")
        self.s.append(s)
        self.tau.append(self.tau[-1] + val)

    def _extend(self, target):
        step = self.h
        while self.tau[-1] < target:
            if self.s[-1] > MAX_REACH:
                raise QuadratureDomain("motion escapes to infinity in finite time")
            self._push(self.s[-1] + step)
            step *= 1.1

    def total(self):
        return self.tau[-1]

    def __call__(self, target):
        if target <= 0:
            return 0.0
        if self.S is None:
            self._extend(target)
        elif target >= self.tau[-1]:
            return self.S
        i = int(np.searchsorted(self.tau, target)) - 1
        a, b = self.s[i], self.s[i + 1]
        base = self.tau[i]

        def resid(s):
            return base + quad(self.g, a, s, **QUAD_OPTS)[0] - target
        if resid(b) <= 0:
            return b
        return brentq(resid, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _gap(f, E, x):
    """2 (E - F(x)), the squared speed."""
    try:
        v = 2.0 * (E - float(f(x)))
    except (ZeroDivisionError, OverflowError):
        return -math.inf
    return v if math.isfinite(v) else -math.inf


def _find_turning(f, E, x0, d, poles, h0):
    """First x = x0 + d s (s > 0) with F(x) = E, or None if the way is open."""
    ahead = sorted(d * (p - x0) for p in poles if d * (p - x0) > 0)
    wall = ahead[0] if ahead else math.inf
    s_prev, s, h = 0.0, h0, h0
    while True:
        if s >= wall:
            s = wall * (1.0 - 1e-12)
            if _gap(f, E, x0 + d * s) > 0:
                raise QuadratureDomain(f"motion falls into the pole at x = {x0 + d * wall!r}")
        g = _gap(f, E, x0 + d * s)
        if g <= 0:
            if g == -math.inf and not (s >= wall * (1.0 - 1e-12)):
                raise QuadratureDomain(f"potential not finite at x = {x0 + d * s!r}")
            lo = s_prev
            if lo == 0.0:
                # shrink geometrically so the bracket is relative to the distance
                u = s
                for _ in range(2100):
                    if _gap(f, E, x0 + d * 0.5 * u) > 0:
                        lo = 0.5 * u
                        break
                    u *= 0.5
                else:
                    return x0  # no room to move in floating point
                s = u
            r = brentq(lambda u: _gap(f, E, x0 + d * u), lo, s, xtol=4 * np.finfo(float).eps * s,
                       rtol=4 * np.finfo(float).eps, maxiter=500)
            return x0 + d * r
        if s > MAX_REACH:
            return None
        s_prev = s
        h *= 1.3
        s = s + h


@dataclass
class Motion1D:
    """Solution of x'' = -F'(x) from (t0, x0, v0) by inverting the energy integral."""
    f: object
    df: object
    t0: float
    x0: float
    v0: float
    poles: tuple = ()
    kind: str = field(init=False)

    def __post_init__(self):
        f, x0, v0 = self.f, float(self.x0), float(self.v0)
        self.E = 0.5 * v0 * v0 + float(f(x0))
        scale = 1e-3 * (1.0 + abs(x0))
        slope = float(self.df(x0))
        resting = v0 == 0.0 or not (self.E - float(f(x0)) > 0)
        if resting and slope == 0.0:
            self.kind = "equilibrium"
            return
        if resting:
            # x0 is (to round-off) itself a turning point; the particle starts off downhill
            d = -1.0 if slope > 0 else 1.0
            ahead, behind = _find_turning(f, self.E, x0, d, self.poles, scale), x0
            if ahead == x0:
                # the well is below round-off
                self.kind = "equilibrium"
                return
        else:
            d = 1.0 if v0 > 0 else -1.0
            ahead = _find_turning(f, self.E, x0, d, self.poles, scale)
            behind = _find_turning(f, self.E, x0, -d, self.poles, scale)
        self._setup(ahead, behind, d, scale)

    def _check_turning(self, x, width, energy):
        # a flat turning point takes infinite time to reach; compare the slope
        # there with the energy scale of the motion over its width
        if abs(float(self.df(x))) * width <= 1e-9 * energy:
            raise QuadratureDomain(f"degenerate turning point at x = {x!r} (infinite approach time)")

    def _setup(self, ahead, behind, d, scale):
        f, E = self.f, self.E
        if ahead is not None and behind is not None:
            a, b = min(ahead, behind), max(ahead, behind)
            depth = max(0.5 * self.v0 ** 2, 0.5 * _gap(f, E, 0.5 * (a + b)))
            self._check_turning(a, b - a, depth)
            self._check_turning(b, b - a, depth)
            self.kind = "periodic"
            self.a, self.b = a, b
            fa, fb = abs(float(self.df(a))), abs(float(self.df(b)))
            half = 0.5 * (b - a)

            def g(phi):
                sa, ca = math.sin(0.5 * phi), math.cos(0.5 * phi)
                near_a = phi < 0.5 * math.pi
                x = a + 2.0 * half * sa * sa if near_a else b - 2.0 * half * ca * ca
                sq = _gap(f, E, x)
                if sq <= 0:
                    if sq < -1e-9 * (1.0 + abs(E)):
                        raise QuadratureDomain(f"nonpositive kinetic energy inside the well at x = {x!r}")
                    # round-off at a turning point: limit of the integrand there
                    return ca * math.sqrt(half / fa) if near_a else sa * math.sqrt(half / fb)
                return 2.0 * half * sa * ca / math.sqrt(sq)
            self.table = _InverseTable(g, None, S=math.pi)
            self.period = 2.0 * self.table.total()
            phi0 = math.acos(min(1.0, max(-1.0, 1.0 - (self.x0 - a) / half)))
            tau0 = self.table_tau(phi0)
            moving_up = self.v0 > 0 or (self.v0 == 0 and self.x0 == a)
            # time elapsed since the last visit to a
            self.t_a = self.t0 - (tau0 if moving_up else self.period - tau0)
        elif ahead is None and behind is None:
            self.kind = "monotone"
            x0 = self.x0

            def gp(s):
                return 1.0 / math.sqrt(self._pos_gap(x0 + s))

            def gm(s):
                return 1.0 / math.sqrt(self._pos_gap(x0 - s))
            self.fwd = _InverseTable(gp, scale * 10)
            self.bwd = _InverseTable(gm, scale * 10)
            self.sign = 1.0 if self.v0 > 0 else -1.0
        else:
            turn = behind if ahead is None else ahead
            if self.x0 != turn:
                self._check_turning(turn, abs(self.x0 - turn), 0.5 * self.v0 ** 2)
            self.kind = "escape"
            self.turn = turn
            out = math.copysign(1.0, self.x0 - turn) if self.x0 != turn else d
            self.out = out

            def gu(u):
                x = turn + out * u * u
                sq = _gap(f, E, x)
                if sq <= 0:
                    if u < 1e-6:
                        sq = 2.0 * abs(float(self.df(turn))) * u * u
                    else:
                        raise QuadratureDomain(f"nonpositive kinetic energy at x = {x!r}")
                    if sq <= 0:
                        return 2.0 / math.sqrt(2.0 * abs(float(self.df(turn))))
                return 2.0 * u / math.sqrt(sq)
            self.table = _InverseTable(gu, math.sqrt(scale) * 10)
            u0 = math.sqrt(abs(self.x0 - turn))
            tau0 = quad(gu, 0.0, u0, **QUAD_OPTS)[0] if u0 > 0 else 0.0
            leaving = (self.v0 * out) > 0 or self.v0 == 0
            self.t_turn = self.t0 - tau0 if leaving else self.t0 + tau0

    def _pos_gap(self, x):
        sq = _gap(self.f, self.E, x)
        if sq <= 0:
            raise QuadratureDomain(f"nonpositive kinetic energy at x = {x!r}")
        return sq

    def table_tau(self, phi):
        if phi <= 0:
            return 0.0
        t = self.table
        i = int(np.searchsorted(t.s, phi)) - 1
        return t.tau[i] + quad(t.g, t.s[i], phi, **QUAD_OPTS)[0]

    def position(self, t):
        t = float(t)
        if self.kind == "equilibrium":
            return self.x0
        if self.kind == "periodic":
            s = (t - self.t_a) % self.period
            half = 0.5 * self.period
            phi = self.table(s if s <= half else self.period - s)
            return self.a + 0.5 * (self.b - self.a) * (1.0 - math.cos(phi))
        if self.kind == "escape":
            u = self.table(abs(t - self.t_turn))
            return self.turn + self.out * u * u
        dt = t - self.t0
        # forward in time moves in the direction of v0
        if dt >= 0:
            s = (self.fwd if self.sign > 0 else self.bwd)(dt)
            return self.x0 + self.sign * s
        s = (self.bwd if self.sign > 0 else self.fwd)(-dt)
        return self.x0 - self.sign * s

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.position(t)
        return np.array([self.position(v) for v in np.asarray(t, dtype=float).ravel()]).reshape(np.shape(t))


# --- closed forms for catalog entries -----------------------------------------

@dataclass
class ClosedForm:
    """t -> (x, y) together with the fitted constants and how they were fitted."""
    entry: str
    s0: State
    constants: dict
    rule: str
    fx: object
    fy: object

    def __call__(self, t):
        return self.fx(t), self.fy(t)


def _v3b(entry, s0):
    k = entry.params["k"]
    fi = entry.fi_map
    c = {n: float(fi[n](s0)) for n in ("L42+", "L42-", "L43+", "L43-")}

    def fx(t):
        t = np.asarray(t, dtype=float)
        return (c["L42-"] * np.exp(k * t) - c["L42+"] * np.exp(-k * t)) / (2.0 * k)

    def fy(t):
        t = np.asarray(t, dtype=float)
        return (c["L43-"] * np.exp(k * t) - c["L43+"] * np.exp(-k * t)) / (2.0 * k)
    rule = ("c1+ = L42+(s0), c1- = L42-(s0), c2+ = L43+(s0), c2- = L43-(s0); "
            "x = (c1- e^{kt} - c1+ e^{-kt})/2k, y = (c2- e^{kt} - c2+ e^{-kt})/2k")
    return ClosedForm(entry.name, s0, {"c1+": c["L42+"], "c1-": c["L42-"], "c2+": c["L43+"],
                                       "c2-": c["L43-"]}, rule, fx, fy)


def _v2(entry, s0):
    c, F = entry.params["c"], entry.params["F"]
    c1 = float(entry.fi("L31")(s0))
    c2 = s0.y - c1 * s0.t + 0.5 * c * s0.t ** 2
    mx = Motion1D(F, F.derivative, s0.t, s0.x, s0.vx, F.poles)

    def fy(t):
        t = np.asarray(t, dtype=float)
        return -0.5 * c * t * t + c1 * t + c2
    rule = ("c1 = L31(s0), c2 = y0 - c1 t0 + c t0^2/2, y = -c t^2/2 + c1 t + c2; "
            "x by inverting t = +-int dx / sqrt(c3 - 2F(x)), c3 = 2 Q31(s0)")
    return ClosedForm(entry.name, s0, {"c1": c1, "c2": c2, "c3": 2.0 * mx.E, "x_motion": mx.kind},
                      rule, mx, fy)


def _v27(entry, s0):
    F1, F2 = entry.params["F1"], entry.params["F2"]
    mx = Motion1D(F1, F1.derivative, s0.t, s0.x, s0.vx, F1.poles)
    my = Motion1D(F2, F2.derivative, s0.t, s0.y, s0.vy, F2.poles)
    rule = "x and y by inverting t = +-int dq / sqrt(2 (E_q - F(q))) with E_x = I71a(s0)/2, E_y = I71b(s0)/2"
    return ClosedForm(entry.name, s0, {"E_x": mx.E, "E_y": my.E, "x_motion": mx.kind, "y_motion": my.kind},
                      rule, mx, my)


_SOLVERS = {"V3b": _v3b, "V2": _v2, "V27": _v27}
SOLVABLE = tuple(_SOLVERS)


def closed_form_solution(entry, s0=None):
    """Closed-form t -> (x, y) for the entries that have one (V3b, V2, V27)."""
    if entry.name not in _SOLVERS:
        raise ValueError(f"{entry.name} has no closed-form solution; available: {', '.join(SOLVABLE)}")
    s0 = entry.reference_ics if s0 is None else s0
    entry.potential.jet(s0.x, s0.y)
    return _SOLVERS[entry.name](entry, s0)


@dataclass
class Comparison:
    t: np.ndarray
    closed: np.ndarray
    numeric: np.ndarray
    rel_error: float

    def rows(self):
        return np.column_stack([self.t, self.closed, self.numeric])


def compare(entry, s0=None, dt=1e-3, t_end=5.0, integrator="rk4", every=100):
    """Closed form vs numerical integration; rel_error = max|cf - num| / max|num|."""
    s0 = entry.reference_ics if s0 is None else s0
    cf = closed_form_solution(entry, s0)
    n = int(round((t_end - s0.t) / dt))
    traj = integrate(entry.potential, s0, dt, n, integrator)
    idx = np.arange(0, len(traj), max(1, int(every)))
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    t = traj.t[idx]
    x, y = cf(t)
    closed = np.column_stack([np.broadcast_to(x, t.shape), np.broadcast_to(y, t.shape)])
    num = np.column_stack([traj.x[idx], traj.y[idx]])
    scale = float(np.max(np.abs(num)))
    err = float(np.max(np.abs(closed - num)))
    rel = err / scale if scale > 0 else err
    return Comparison(t, closed, num, rel)
