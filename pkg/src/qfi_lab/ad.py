"""Backend selection and elementary functions that accept jets, floats and arrays.

The compiled core is used when it imports and ``QFI_LAB_PURE_PYTHON`` is not
set.  Batch (array) jets always come from the numpy implementation.
"""
import os

import numpy as np

from . import _jetpy

if os.environ.get("QFI_LAB_PURE_PYTHON", "") not in ("", "0"):
    _core = _jetpy
else:
    try:
        from . import _jetc as _core
    except ImportError:  # pragma: no cover - depends on the build
        _core = _jetpy

BACKEND = "python" if _core is _jetpy else "compiled"
Jet = _core.Jet
ArrayJet = _jetpy.Jet
verlet_run = _core.verlet_run
rk4_run = _core.rk4_run

_JET_TYPES = (Jet,) if Jet is ArrayJet else (Jet, ArrayJet)


def is_jet(a):
    return isinstance(a, _JET_TYPES)


def variables(x, y):
    """Scalar jets seeded as the coordinate functions at (x, y)."""
    return Jet(float(x), 1.0, 0.0), Jet(float(y), 0.0, 1.0)


def array_variables(xs, ys):
    """Batch jets seeded as the coordinate functions at arrays of points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    one, zero = np.ones_like(xs), np.zeros_like(xs)
    return ArrayJet(xs, one, zero, zero, zero, zero), ArrayJet(ys, zero, one, zero, zero, zero)


def components(a):
    """Return ``(v, dx, dy, dxx, dxy, dyy)`` for a jet or a constant."""
    if is_jet(a):
        return a.v, a.dx, a.dy, a.dxx, a.dxy, a.dyy
    return a, 0.0, 0.0, 0.0, 0.0, 0.0


def value(a):
    return a.v if is_jet(a) else a


def sqrt(a):
    return a.sqrt() if is_jet(a) else np.sqrt(a)


def exp(a):
    return a.exp() if is_jet(a) else np.exp(a)


def log(a):
    return a.log() if is_jet(a) else np.log(a)


def sin(a):
    return a.sin() if is_jet(a) else np.sin(a)


def cos(a):
    return a.cos() if is_jet(a) else np.cos(a)


def atan(a):
    return a.atan() if is_jet(a) else np.arctan(a)


def compose(X, Y, g, gx, gy, gxx, gxy, gyy):
    """Jet of g(X, Y) from the value/derivatives of g at (X.v, Y.v) and the input jets."""
    x1, x2, x11, x12, x22 = X.dx, X.dy, X.dxx, X.dxy, X.dyy
    y1, y2, y11, y12, y22 = Y.dx, Y.dy, Y.dxx, Y.dxy, Y.dyy
    cls = type(X)
    return cls(g,
               gx * x1 + gy * y1,
               gx * x2 + gy * y2,
               gxx * x1 * x1 + 2.0 * gxy * x1 * y1 + gyy * y1 * y1 + gx * x11 + gy * y11,
               gxx * x1 * x2 + gxy * (x1 * y2 + x2 * y1) + gyy * y1 * y2 + gx * x12 + gy * y12,
               gxx * x2 * x2 + 2.0 * gxy * x2 * y2 + gyy * y2 * y2 + gx * x22 + gy * y22)
