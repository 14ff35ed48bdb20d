"""Pure-Python fallback for the numerical core.

``Jet`` carries a value together with its exact first and second partial
derivatives in two variables (x, y).  Components may be Python floats or
numpy arrays of a common shape, so the same class doubles as the batch
evaluator for collocation and quadrature.

The stepping kernels mirror ``_jetc.pyx`` line for line.
"""
import math

import numpy as np


def _sqrt(v):
    return math.sqrt(v) if type(v) is float else np.sqrt(v)


def _exp(v):
    return math.exp(v) if type(v) is float else np.exp(v)


def _log(v):
    return math.log(v) if type(v) is float else np.log(v)


def _sin(v):
    return math.sin(v) if type(v) is float else np.sin(v)


def _cos(v):
    return math.cos(v) if type(v) is float else np.cos(v)


def _atan(v):
    return math.atan(v) if type(v) is float else np.arctan(v)


class Jet:
    __slots__ = ("v", "dx", "dy", "dxx", "dxy", "dyy")
    __array_ufunc__ = None

    def __init__(self, v, dx=0.0, dy=0.0, dxx=0.0, dxy=0.0, dyy=0.0):
        self.v = v
        self.dx = dx
        self.dy = dy
        self.dxx = dxx
        self.dxy = dxy
        self.dyy = dyy

    def __repr__(self):
        return (f"Jet(v={self.v!r}, dx={self.dx!r}, dy={self.dy!r}, "
                f"dxx={self.dxx!r}, dxy={self.dxy!r}, dyy={self.dyy!r})")

    def apply(self, f0, f1, f2):
        """Compose with a scalar function given its value and two derivatives."""
        dx, dy = self.dx, self.dy
        return Jet(f0, f1 * dx, f1 * dy,
                   f2 * dx * dx + f1 * self.dxx,
                   f2 * dx * dy + f1 * self.dxy,
                   f2 * dy * dy + f1 * self.dyy)

    def __add__(self, o):
        if isinstance(o, Jet):
            return Jet(self.v + o.v, self.dx + o.dx, self.dy + o.dy,
                       self.dxx + o.dxx, self.dxy + o.dxy, self.dyy + o.dyy)
        return Jet(self.v + o, self.dx, self.dy, self.dxx, self.dxy, self.dyy)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, Jet):
            return Jet(self.v - o.v, self.dx - o.dx, self.dy - o.dy,
                       self.dxx - o.dxx, self.dxy - o.dxy, self.dyy - o.dyy)
        return Jet(self.v - o, self.dx, self.dy, self.dxx, self.dxy, self.dyy)

    def __rsub__(self, o):
        return Jet(o - self.v, -self.dx, -self.dy, -self.dxx, -self.dxy, -self.dyy)

    def __neg__(self):
        return Jet(-self.v, -self.dx, -self.dy, -self.dxx, -self.dxy, -self.dyy)

    def __pos__(self):
        return self

    def __mul__(self, o):
        if isinstance(o, Jet):
            av, bv = self.v, o.v
            return Jet(av * bv,
                       self.dx * bv + av * o.dx,
                       self.dy * bv + av * o.dy,
                       self.dxx * bv + 2.0 * self.dx * o.dx + av * o.dxx,
                       self.dxy * bv + self.dx * o.dy + self.dy * o.dx + av * o.dxy,
                       self.dyy * bv + 2.0 * self.dy * o.dy + av * o.dyy)
        return Jet(self.v * o, self.dx * o, self.dy * o,
                   self.dxx * o, self.dxy * o, self.dyy * o)

    __rmul__ = __mul__

    def reciprocal(self):
        r = 1.0 / self.v
        return self.apply(r, -r * r, 2.0 * r * r * r)

    def __truediv__(self, o):
        if isinstance(o, Jet):
            return self * o.reciprocal()
        return self * (1.0 / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, p):
        if isinstance(p, Jet):
            return (p * self.log()).exp()
        if p == 2:
            return self * self
        if p == 1:
            return Jet(self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy)
        if p == -1:
            return self.reciprocal()
        if p == -2:
            r = self.reciprocal()
            return r * r
        v = self.v
        return self.apply(v ** p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __rpow__(self, base):
        return (self * _log(base)).exp()

    def sqrt(self):
        s = _sqrt(self.v)
        return self.apply(s, 0.5 / s, -0.25 / (s * self.v))

    def exp(self):
        e = _exp(self.v)
        return self.apply(e, e, e)

    def log(self):
        r = 1.0 / self.v
        return self.apply(_log(self.v), r, -r * r)

    def sin(self):
        s, c = _sin(self.v), _cos(self.v)
        return self.apply(s, c, -s)

    def cos(self):
        s, c = _sin(self.v), _cos(self.v)
        return self.apply(c, -s, -c)

    def atan(self):
        q = 1.0 / (1.0 + self.v * self.v)
        return self.apply(_atan(self.v), q, -2.0 * self.v * q * q)


def _finite(*vals):
    for v in vals:
        if v != v or v in (math.inf, -math.inf):
            return False
    return True


def verlet_run(grad, dist, t0, x, y, vx, vy, dt, n, guard):
    """Velocity-Verlet loop.

    Returns ``(out, done, status)`` where ``out[:done + 1]`` are the computed
    rows ``(t, x, y, vx, vy)``; status 0 = finished, 1 = singular approach,
    2 = non-finite force.
    """
    out = np.empty((n + 1, 5))
    out[0] = (t0, x, y, vx, vy)
    try:
        gx, gy = grad(x, y)
    except (ZeroDivisionError, ValueError, OverflowError):
        return out[:1], 0, 2
    if not _finite(gx, gy):
        return out[:1], 0, 2
    half = 0.5 * dt
    for i in range(1, n + 1):
        hvx = vx - half * gx
        hvy = vy - half * gy
        x = x + dt * hvx
        y = y + dt * hvy
        if dist is not None and dist(x, y) < guard * dt * math.hypot(hvx, hvy):
            return out[:i], i - 1, 1
        try:
            gx, gy = grad(x, y)
        except (ZeroDivisionError, ValueError, OverflowError):
            return out[:i], i - 1, 2
        if not _finite(gx, gy):
            return out[:i], i - 1, 2
        vx = hvx - half * gx
        vy = hvy - half * gy
        row = out[i]
        row[0] = t0 + i * dt
        row[1] = x
        row[2] = y
        row[3] = vx
        row[4] = vy
    return out, n, 0


def rk4_run(grad, dist, t0, x, y, vx, vy, dt, n, guard):
    """Classical Runge-Kutta loop; same return contract as ``verlet_run``."""
    out = np.empty((n + 1, 5))
    out[0] = (t0, x, y, vx, vy)
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(1, n + 1):
        try:
            g1x, g1y = grad(x, y)
            x2 = x + half * vx
            y2 = y + half * vy
            vx2 = vx - half * g1x
            vy2 = vy - half * g1y
            g2x, g2y = grad(x2, y2)
            x3 = x + half * vx2
            y3 = y + half * vy2
            vx3 = vx - half * g2x
            vy3 = vy - half * g2y
            g3x, g3y = grad(x3, y3)
            x4 = x + dt * vx3
            y4 = y + dt * vy3
            vx4 = vx - dt * g3x
            vy4 = vy - dt * g3y
            g4x, g4y = grad(x4, y4)
        except (ZeroDivisionError, ValueError, OverflowError):
            return out[:i], i - 1, 2
        if not _finite(g1x, g1y, g2x, g2y, g3x, g3y, g4x, g4y):
            return out[:i], i - 1, 2
        x = x + sixth * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4)
        y = y + sixth * (vy + 2.0 * vy2 + 2.0 * vy3 + vy4)
        vx = vx - sixth * (g1x + 2.0 * g2x + 2.0 * g3x + g4x)
        vy = vy - sixth * (g1y + 2.0 * g2y + 2.0 * g3y + g4y)
        if dist is not None and dist(x, y) < guard * dt * math.hypot(vx, vy):
            return out[:i], i - 1, 1
        row = out[i]
        row[0] = t0 + i * dt
        row[1] = x
        row[2] = y
        row[3] = vx
        row[4] = vy
    return out, n, 0
