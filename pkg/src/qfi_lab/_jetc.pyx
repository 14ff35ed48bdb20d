# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical core: scalar second-order jets and stepping loops.

Behaviour matches ``_jetpy`` exactly; only scalar (float) components are
supported here, batch evaluation always goes through the numpy fallback.
"""
from libc.math cimport sqrt, exp, log, sin, cos, atan, pow, hypot, isfinite

import numpy as np


cdef inline Jet _mk(double v, double dx, double dy, double dxx, double dxy, double dyy):
    cdef Jet r = Jet.__new__(Jet)
    r.v = v
    r.dx = dx
    r.dy = dy
    r.dxx = dxx
    r.dxy = dxy
    r.dyy = dyy
    return r


cdef class Jet:
    cdef public double v, dx, dy, dxx, dxy, dyy
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

    def __reduce__(self):
        return (Jet, (self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy))

    cdef Jet _apply(self, double f0, double f1, double f2):
        return _mk(f0, f1 * self.dx, f1 * self.dy,
                   f2 * self.dx * self.dx + f1 * self.dxx,
                   f2 * self.dx * self.dy + f1 * self.dxy,
                   f2 * self.dy * self.dy + f1 * self.dyy)

    def apply(self, f0, f1, f2):
        """Compose with a scalar function given its value and two derivatives."""
        return self._apply(f0, f1, f2)

    def __add__(self, o):
        cdef Jet b
        if isinstance(o, Jet):
            b = <Jet>o
            return _mk(self.v + b.v, self.dx + b.dx, self.dy + b.dy,
                       self.dxx + b.dxx, self.dxy + b.dxy, self.dyy + b.dyy)
        try:
            return _mk(self.v + <double>o, self.dx, self.dy, self.dxx, self.dxy, self.dyy)
        except TypeError:
            return NotImplemented

    def __radd__(self, o):
        try:
            return _mk(<double>o + self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy)
        except TypeError:
            return NotImplemented

    def __sub__(self, o):
        cdef Jet b
        if isinstance(o, Jet):
            b = <Jet>o
            return _mk(self.v - b.v, self.dx - b.dx, self.dy - b.dy,
                       self.dxx - b.dxx, self.dxy - b.dxy, self.dyy - b.dyy)
        try:
            return _mk(self.v - <double>o, self.dx, self.dy, self.dxx, self.dxy, self.dyy)
        except TypeError:
            return NotImplemented

    def __rsub__(self, o):
        try:
            return _mk(<double>o - self.v, -self.dx, -self.dy, -self.dxx, -self.dxy, -self.dyy)
        except TypeError:
            return NotImplemented

    def __neg__(self):
        return _mk(-self.v, -self.dx, -self.dy, -self.dxx, -self.dxy, -self.dyy)

    def __pos__(self):
        return self

    def __mul__(self, o):
        cdef Jet b
        cdef double c
        if isinstance(o, Jet):
            b = <Jet>o
            return _mk(self.v * b.v,
                       self.dx * b.v + self.v * b.dx,
                       self.dy * b.v + self.v * b.dy,
                       self.dxx * b.v + 2.0 * self.dx * b.dx + self.v * b.dxx,
                       self.dxy * b.v + self.dx * b.dy + self.dy * b.dx + self.v * b.dxy,
                       self.dyy * b.v + 2.0 * self.dy * b.dy + self.v * b.dyy)
        try:
            c = <double>o
        except TypeError:
            return NotImplemented
        return _mk(self.v * c, self.dx * c, self.dy * c, self.dxx * c, self.dxy * c, self.dyy * c)

    def __rmul__(self, o):
        cdef double c
        try:
            c = <double>o
        except TypeError:
            return NotImplemented
        return _mk(self.v * c, self.dx * c, self.dy * c, self.dxx * c, self.dxy * c, self.dyy * c)

    cdef Jet _recip(self):
        cdef double r = 1.0 / self.v
        return self._apply(r, -r * r, 2.0 * r * r * r)

    def reciprocal(self):
        return self._recip()

    def __truediv__(self, o):
        cdef double c
        if isinstance(o, Jet):
            return self * (<Jet>o)._recip()
        try:
            c = 1.0 / <double>o
        except TypeError:
            return NotImplemented
        return _mk(self.v * c, self.dx * c, self.dy * c, self.dxx * c, self.dxy * c, self.dyy * c)

    def __rtruediv__(self, o):
        cdef double c
        try:
            c = <double>o
        except TypeError:
            return NotImplemented
        return self._recip() * c

    def __pow__(self, p, mod):
        cdef double q, v
        cdef Jet r
        if isinstance(p, Jet):
            return (p * self.log()).exp()
        q = <double>p
        if q == 2.0:
            return self * self
        if q == 1.0:
            return _mk(self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy)
        if q == -1.0:
            return self._recip()
        if q == -2.0:
            r = self._recip()
            return r * r
        v = self.v
        return self._apply(pow(v, q), q * pow(v, q - 1.0), q * (q - 1.0) * pow(v, q - 2.0))

    def __rpow__(self, base, mod):
        return (self * log(<double>base)).exp()

    def sqrt(self):
        cdef double s = sqrt(self.v)
        return self._apply(s, 0.5 / s, -0.25 / (s * self.v))

    def exp(self):
        cdef double e = exp(self.v)
        return self._apply(e, e, e)

    def log(self):
        cdef double r = 1.0 / self.v
        return self._apply(log(self.v), r, -r * r)

    def sin(self):
        cdef double s = sin(self.v), c = cos(self.v)
        return self._apply(s, c, -s)

    def cos(self):
        cdef double s = sin(self.v), c = cos(self.v)
        return self._apply(c, -s, -c)

    def atan(self):
        cdef double q = 1.0 / (1.0 + self.v * self.v)
        return self._apply(atan(self.v), q, -2.0 * self.v * q * q)


def verlet_run(grad, dist, double t0, double x, double y, double vx, double vy,
               double dt, Py_ssize_t n, double guard):
    """Velocity-Verlet loop; see ``_jetpy.verlet_run`` for the contract."""
    cdef double[:, ::1] out
    cdef double gx, gy, hvx, hvy, half = 0.5 * dt
    cdef Py_ssize_t i
    arr = np.empty((n + 1, 5))
    out = arr
    out[0, 0] = t0
    out[0, 1] = x
    out[0, 2] = y
    out[0, 3] = vx
    out[0, 4] = vy
    try:
        gx, gy = grad(x, y)
    except (ZeroDivisionError, ValueError, OverflowError):
        return arr[:1], 0, 2
    if not (isfinite(gx) and isfinite(gy)):
        return arr[:1], 0, 2
    for i in range(1, n + 1):
        hvx = vx - half * gx
        hvy = vy - half * gy
        x = x + dt * hvx
        y = y + dt * hvy
        if dist is not None and dist(x, y) < guard * dt * hypot(hvx, hvy):
            return arr[:i], i - 1, 1
        try:
            gx, gy = grad(x, y)
        except (ZeroDivisionError, ValueError, OverflowError):
            return arr[:i], i - 1, 2
        if not (isfinite(gx) and isfinite(gy)):
            return arr[:i], i - 1, 2
        vx = hvx - half * gx
        vy = hvy - half * gy
        out[i, 0] = t0 + i * dt
        out[i, 1] = x
        out[i, 2] = y
        out[i, 3] = vx
        out[i, 4] = vy
    return arr, n, 0


def rk4_run(grad, dist, double t0, double x, double y, double vx, double vy,
            double dt, Py_ssize_t n, double guard):
    """Classical Runge-Kutta loop; see ``_jetpy.rk4_run`` for the contract."""
    cdef double[:, ::1] out
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef double g1x, g1y, g2x, g2y, g3x, g3y, g4x, g4y
    cdef double x2, y2, vx2, vy2, x3, y3, vx3, vy3, x4, y4, vx4, vy4
    cdef Py_ssize_t i
    arr = np.empty((n + 1, 5))
    out = arr
    out[0, 0] = t0
    out[0, 1] = x
    out[0, 2] = y
    out[0, 3] = vx
    out[0, 4] = vy
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
            return arr[:i], i - 1, 2
        if not (isfinite(g1x) and isfinite(g1y) and isfinite(g2x) and isfinite(g2y)
                and isfinite(g3x) and isfinite(g3y) and isfinite(g4x) and isfinite(g4y)):
            return arr[:i], i - 1, 2
        x = x + sixth * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4)
        y = y + sixth * (vy + 2.0 * vy2 + 2.0 * vy3 + vy4)
        vx = vx - sixth * (g1x + 2.0 * g2x + 2.0 * g3x + g4x)
        vy = vy - sixth * (g1y + 2.0 * g2y + 2.0 * g3y + g4y)
        if dist is not None and dist(x, y) < guard * dt * hypot(vx, vy):
            return arr[:i], i - 1, 1
        out[i, 0] = t0 + i * dt
        out[i, 1] = x
        out[i, 2] = y
        out[i, 3] = vx
        out[i, 4] = vy
    return arr, n, 0
