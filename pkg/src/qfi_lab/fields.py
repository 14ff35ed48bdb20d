"""Potentials on the plane with exact derivatives via forward-mode jets."""
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Optional

import numpy as np

from . import ad
from .errors import BadParams, SingularPoint

# Points closer than this to the singular set count as singular.
SINGULAR_EPS = 1e-12
FD_STEP = 1e-4


@dataclass(frozen=True)
class PotentialSpec:
    """A named potential V(x, y).

    ``func`` must accept floats, numpy arrays and jets (anything supporting
    arithmetic plus the ``ad`` elementary functions).  ``distance`` returns a
    lower bound on the Euclidean distance to the singular set, or is None for
    a smooth potential.
    """
    name: str
    func: Callable
    params: dict = field(default_factory=dict)
    distance: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def singular_distance(self, x, y):
        if self.distance is None:
            return math.inf
        return float(self.distance(float(x), float(y)))

    def is_singular(self, x, y):
        return self.singular_distance(x, y) < SINGULAR_EPS

    def _check(self, x, y):
        if self.is_singular(x, y):
            raise SingularPoint(f"{self.name}: ({x!r}, {y!r}) lies on the singular set")

    def jet(self, x, y):
        """Jet of V at (x, y): value, gradient and Hessian in one pass."""
        self._check(x, y)
        X, Y = ad.variables(x, y)
        try:
            j = self.func(X, Y)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise SingularPoint(f"{self.name}: evaluation failed at ({x!r}, {y!r}): {exc}") from None
        if not ad.is_jet(j):
            j = ad.Jet(float(j))
        if not all(math.isfinite(c) for c in ad.components(j)):
            raise SingularPoint(f"{self.name}: non-finite derivatives at ({x!r}, {y!r})")
        return j

    def value(self, x, y):
        self._check(x, y)
        try:
            v = float(self.func(float(x), float(y)))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise SingularPoint(f"{self.name}: evaluation failed at ({x!r}, {y!r}): {exc}") from None
        if not math.isfinite(v):
            raise SingularPoint(f"{self.name}: non-finite value at ({x!r}, {y!r})")
        return v

    def grad(self, x, y):
        j = self.jet(x, y)
        return np.array([j.dx, j.dy])

    def hess(self, x, y):
        j = self.jet(x, y)
        return np.array([[j.dxx, j.dxy], [j.dxy, j.dyy]])

    def force_kernel(self):
        """Unchecked (x, y) -> (Vx, Vy) used inside the stepping loops."""
        func, variables = self.func, ad.variables

        def grad(x, y):
            X, Y = variables(x, y)
            j = func(X, Y)
            if ad.is_jet(j):
                return j.dx, j.dy
            return 0.0, 0.0
        return grad

    def batch(self, xs, ys):
        """Array jet of V over arrays of points (no singularity checks)."""
        X, Y = ad.array_variables(xs, ys)
        with np.errstate(all="ignore"):
            j = self.func(X, Y)
        if not ad.is_jet(j):
            z = np.zeros_like(X.v)
            j = ad.ArrayJet(z + j, z, z, z, z, z)
        return j

    def describe(self):
        return {"name": self.name, "params": {k: _jsonable(v) for k, v in self.params.items()}}


def _jsonable(v):
    if hasattr(v, "to_json"):
        return v.to_json()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def evaluate(spec, x, y):
    """Value, gradient and Hessian of ``spec`` at (x, y)."""
    j = spec.jet(x, y)
    return j.v, np.array([j.dx, j.dy]), np.array([[j.dxx, j.dxy], [j.dxy, j.dyy]])


def _check_stencil(spec, x, y, h):
    # the stencil box must not reach the singular set
    if spec.singular_distance(x, y) <= h * math.sqrt(2.0):
        raise SingularPoint(f"{spec.name}: difference stencil at ({x!r}, {y!r}) touches the singular set")


def fd_gradient(spec, x, y, h=FD_STEP):
    """Central-difference gradient (independent check on the jets)."""
    _check_stencil(spec, x, y, h)
    f = spec.value
    return np.array([(f(x + h, y) - f(x - h, y)) / (2 * h),
                     (f(x, y + h) - f(x, y - h)) / (2 * h)])


def fd_hessian(spec, x, y, h=FD_STEP):
    """Central-difference Hessian."""
    _check_stencil(spec, x, y, h)
    f = spec.value
    f0 = f(x, y)
    fxx = (f(x + h, y) - 2 * f0 + f(x - h, y)) / (h * h)
    fyy = (f(x, y + h) - 2 * f0 + f(x, y - h)) / (h * h)
    fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
    return np.array([[fxx, fxy], [fxy, fyy]])


# --- distances to common singular sets --------------------------------------

def dist_origin(x, y):
    return math.hypot(x, y)


def dist_line_x(c):
    """Distance to the vertical line x = c."""
    return lambda x, y: abs(x - c)


def dist_line_y(c):
    return lambda x, y: abs(y - c)


def dist_min(*fs):
    fs = [f for f in fs if f is not None]
    if not fs:
        return None
    if len(fs) == 1:
        return fs[0]
    return lambda x, y: min(f(x, y) for f in fs)


# --- simple built-in potentials ---------------------------------------------

def free():
    """V = 0."""
    return PotentialSpec("free", lambda X, Y: 0.0 * X)


def generic_asymmetric():
    """A smooth potential with no symmetry: only the energy survives."""
    def v(X, Y):
        return X ** 4 * Y + ad.sin(Y) + 0.3 * X * Y ** 3 + ad.exp(0.2 * X)
    return PotentialSpec("generic_asymmetric", v)


def separable_polynomial():
    """V = x^4 + y^3, a generic separable potential."""
    return PotentialSpec("separable_polynomial", lambda X, Y: X ** 4 + Y ** 3)


def check_finite_params(name, params, keys):
    for k in keys:
        v = params[k]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise BadParams(f"{name}: parameter {k!r} must be a finite number, got {v!r}")
