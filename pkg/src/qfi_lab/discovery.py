"""Numerical discovery of first integrals for a given potential.

The symmetry conditions on the potential are linear in the unknown Killing
vector / Killing tensor / generating-vector coefficients.  Evaluating them at
quasi-random collocation points gives a linear system whose nullspace (by SVD)
is the set of admissible coefficients.  Each nullspace vector is checked on a
disjoint set of held-out points.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar
from scipy.stats import qmc

from . import ad
from .dynamics import integrate
from .errors import (InsufficientPoints, PathThroughSingularity, SingularApproach,
                     SingularPoint, ValidationFailed)
from .integrals import (FirstIntegral, TimeTerm, drift, flow_derivative, hamiltonian,
                        independence_rank, poisson_bracket, random_states, evaluate)

SCHEMA_VERSION = 1
R_MIN, R_MAX = 0.3, 3.0
MIN_CLEARANCE = 0.1
NULL_TOL = 1e-9
HELDOUT_TOL = 1e-8
NEAR_HIT = 1e-4
NODES_PER_UNIT = 64
PIECE_NODES = 16


# --- parameter types --------------------------------------------------------

@dataclass(frozen=True)
class KTParams:
    """Coefficients of the general second-order Killing tensor of the plane."""
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    A: float = 0.0
    B: float = 0.0
    C: float = 0.0

    def as_array(self):
        return np.array([self.alpha, self.beta, self.gamma, self.A, self.B, self.C])

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))

    def matrix(self, X, Y):
        """(Cxx, Cxy, Cyy) at (X, Y); works with floats, arrays and jets."""
        a, b, g = self.alpha, self.beta, self.gamma
        cxx = g * Y * Y + 2.0 * a * Y + self.A
        cxy = -g * X * Y - a * X - b * Y + self.C
        cyy = g * X * X + 2.0 * b * X + self.B
        return cxx, cxy, cyy


@dataclass(frozen=True)
class KVParams:
    """Killing vector (b1 + b3 y, b2 - b3 x) and the constant s = L . grad V."""
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    s: float = 0.0

    def as_array(self):
        return np.array([self.b1, self.b2, self.b3, self.s])

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class LVecParams:
    """Generating vector for exponential-in-time QFIs, plus the rate lambda."""
    alpha: float = 0.0
    beta: float = 0.0
    A: float = 0.0
    B: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0
    lam: float = 1.0

    def as_array(self):
        return np.array([self.alpha, self.beta, self.A, self.B, self.a1, self.a2, self.a3, self.a4])

    @classmethod
    def from_array(cls, a, lam):
        return cls(*(float(v) for v in a), lam=float(lam))

    def vector(self, X, Y):
        a, b = self.alpha, self.beta
        lx = -2.0 * b * Y * Y + 2.0 * a * X * Y + self.A * X + self.a1 * Y + self.a4
        ly = -2.0 * a * X * X + 2.0 * b * X * Y + self.a3 * X + self.B * Y + self.a2
        return lx, ly

    def killing_tensor(self):
        """Symmetrized derivative of the vector, as KTParams (2C = a1 + a3)."""
        return KTParams(self.alpha, self.beta, 0.0, self.A, self.B, 0.5 * (self.a1 + self.a3))

    def overlaps_integral1(self, tol=1e-8):
        """alpha = beta = 0 and a1 = a3: the third condition reduces to the autonomous one."""
        return abs(self.alpha) <= tol and abs(self.beta) <= tol and abs(self.a1 - self.a3) <= tol


# --- verbatim residuals -----------------------------------------------------

def _derivs(spec, x, y):
    j = spec.jet(x, y)
    return j.dx, j.dy, j.dxx, j.dxy, j.dyy


def bd_residual(params, spec, x, y):
    """Second-order Bertrand-Darboux residual of V for the Killing tensor ``params``."""
    Vx, Vy, Vxx, Vxy, Vyy = _derivs(spec, x, y)
    a, b, g, A, B, C = params.alpha, params.beta, params.gamma, params.A, params.B, params.C
    return ((g * x * y + a * x + b * y - C) * (Vxx - Vyy)
            + (g * (y * y - x * x) - 2.0 * b * x + 2.0 * a * y + A - B) * Vxy
            - 3.0 * (g * x + b) * Vy + 3.0 * (g * y + a) * Vx)


def lfi_residual(params, spec, x, y):
    """(b1 + b3 y) Vx + (b2 - b3 x) Vy - s."""
    Vx, Vy, _, _, _ = _derivs(spec, x, y)
    p = params
    return (p.b1 + p.b3 * y) * Vx + (p.b2 - p.b3 * x) * Vy - p.s


def integral3_residuals(params, spec, x, y):
    """The three conditions for an exp(lambda t) QFI generated by the vector L."""
    Vx, Vy, Vxx, Vxy, Vyy = _derivs(spec, x, y)
    p = params
    a, b, A, B, a1, a3 = p.alpha, p.beta, p.A, p.B, p.a1, p.a3
    l2 = p.lam * p.lam
    C = 0.5 * (a1 + a3)
    Lx, Ly = p.vector(x, y)
    r1 = Lx * Vxx + Ly * Vxy + (-6.0 * a * x + 2.0 * a3 + a1) * Vy + 3.0 * (2.0 * a * y + A) * Vx + l2 * Lx
    r2 = Ly * Vyy + Lx * Vxy + 3.0 * (2.0 * b * x + B) * Vy + (-6.0 * b * y + 2.0 * a1 + a3) * Vx + l2 * Ly
    r3 = ((a * x + b * y - C) * (Vxx - Vyy) + (-2.0 * b * x + 2.0 * a * y + A - B) * Vxy
          - 3.0 * b * Vy + 3.0 * a * Vx + 0.5 * l2 * (6.0 * a * x - 6.0 * b * y + a1 - a3))
    return np.array([r1, r2, r3])


# --- linear operators (rows of the collocation matrix) ----------------------

class BDOperator:
    name = "bertrand-darboux"
    dim = 6
    rows_per_point = 1
    labels = ("alpha", "beta", "gamma", "A", "B", "C")

    def rows(self, j, x, y):
        Vx, Vy, Vxx, Vxy, Vyy = j.dx, j.dy, j.dxx, j.dxy, j.dyy
        D = Vxx - Vyy
        return np.column_stack([
            x * D + 2.0 * y * Vxy + 3.0 * Vx,
            y * D - 2.0 * x * Vxy - 3.0 * Vy,
            x * y * D + (y * y - x * x) * Vxy - 3.0 * x * Vy + 3.0 * y * Vx,
            Vxy,
            -Vxy,
            -D,
        ])


class LFIOperator:
    name = "killing-vector"
    dim = 4
    rows_per_point = 1
    labels = ("b1", "b2", "b3", "s")

    def rows(self, j, x, y):
        return np.column_stack([j.dx, j.dy, y * j.dx - x * j.dy, -np.ones_like(x)])


class Integral3Operator:
    """Rows for fixed lambda; rows = M0 + lambda^2 M1."""
    name = "exponential-vector"
    dim = 8
    rows_per_point = 3
    labels = ("alpha", "beta", "A", "B", "a1", "a2", "a3", "a4")

    def __init__(self, lam):
        self.lam = float(lam)

    @staticmethod
    def split(j, x, y):
        Vx, Vy, Vxx, Vxy, Vyy = j.dx, j.dy, j.dxx, j.dxy, j.dyy
        z = np.zeros_like(x)
        one = np.ones_like(x)
        D = Vxx - Vyy
        m0 = [
            np.column_stack([2 * x * y * Vxx - 2 * x * x * Vxy - 6 * x * Vy + 6 * y * Vx,
                             -2 * y * y * Vxx + 2 * x * y * Vxy,
                             x * Vxx + 3 * Vx, y * Vxy, y * Vxx + Vy, Vxy, x * Vxy + 2 * Vy, Vxx]),
            np.column_stack([-2 * x * x * Vyy + 2 * x * y * Vxy,
                             2 * x * y * Vyy - 2 * y * y * Vxy + 6 * x * Vy - 6 * y * Vx,
                             x * Vxy, y * Vyy + 3 * Vy, y * Vxy + 2 * Vx, Vyy, x * Vyy + Vx, Vxy]),
            np.column_stack([x * D + 2 * y * Vxy + 3 * Vx, y * D - 2 * x * Vxy - 3 * Vy,
                             Vxy, -Vxy, -0.5 * D, z, -0.5 * D, z]),
        ]
        m1 = [
            np.column_stack([2 * x * y, -2 * y * y, x, z, y, z, z, one]),
            np.column_stack([-2 * x * x, 2 * x * y, z, y, z, one, x, z]),
            np.column_stack([3 * x, -3 * y, z, z, 0.5 * one, z, -0.5 * one, z]),
        ]
        # interleave the three conditions point by point
        M0 = np.stack(m0, axis=1).reshape(-1, 8)
        M1 = np.stack(m1, axis=1).reshape(-1, 8)
        return M0, M1

    def rows(self, j, x, y):
        M0, M1 = self.split(j, x, y)
        return M0 + self.lam ** 2 * M1


BD_OPERATOR = BDOperator()
LFI_OPERATOR = LFIOperator()


# --- collocation ------------------------------------------------------------

def _max_threads():
    from .config import max_threads
    return max_threads()


def collocation_points(spec, n, skip=0, r_min=R_MIN, r_max=R_MAX, clearance=MIN_CLEARANCE):
    """First ``n`` regular Halton points in the annulus after skipping ``skip`` regular ones."""
    sampler = qmc.Halton(d=2, scramble=False)
    xs, ys = [], []
    need = n + skip
    drawn = 0
    while len(xs) < need:
        if drawn > 200 * need + 10000:
            raise InsufficientPoints(f"{spec.name}: only {len(xs)} regular collocation points found")
        u = sampler.random(max(64, need))
        drawn += len(u)
        r = np.sqrt(r_min ** 2 + u[:, 0] * (r_max ** 2 - r_min ** 2))
        th = 2.0 * np.pi * u[:, 1]
        px, py = r * np.cos(th), r * np.sin(th)
        j = spec.batch(px, py)
        finite = np.isfinite(j.v) & np.isfinite(j.dx) & np.isfinite(j.dy) & np.isfinite(j.dxx) \
            & np.isfinite(j.dxy) & np.isfinite(j.dyy)
        for i in range(len(px)):
            if not finite[i]:
                continue
            if spec.distance is not None and spec.singular_distance(px[i], py[i]) < clearance:
                continue
            xs.append(px[i])
            ys.append(py[i])
            if len(xs) >= need:
                break
    return np.array(xs[skip:need]), np.array(ys[skip:need])


def _derivative_scale(j):
    return float(max(np.max(np.abs(c)) for c in (j.dx, j.dy, j.dxx, j.dxy, j.dyy)))


def _normalize_rows(M):
    n = np.linalg.norm(M, axis=1)
    n[n == 0] = 1.0
    return M / n[:, None]


def _canonical_signs(basis):
    out = basis.copy()
    for i, v in enumerate(out):
        k = int(np.argmax(np.abs(v)))
        if v[k] < 0:
            out[i] = -v
    return out


@dataclass
class NullspaceResult:
    operator: str
    basis: np.ndarray
    residual_norms: np.ndarray
    singular_values: np.ndarray
    tolerance: float
    derivative_scale: float
    n_points: int
    n_heldout: int
    validated: bool = True

    @property
    def dimension(self):
        return len(self.basis)

    def as_dict(self):
        return {
            "operator": self.operator,
            "dimension": self.dimension,
            "basis": [[float(v) for v in b] for b in self.basis],
            "residual_norms": [float(r) for r in self.residual_norms],
            "singular_values": [float(s) for s in self.singular_values],
            "heldout_tolerance": self.tolerance,
            "n_points": self.n_points,
            "n_heldout": self.n_heldout,
            "validated": self.validated,
        }


def _points_and_jets(spec, n_points):
    x, y = collocation_points(spec, n_points)
    xh, yh = collocation_points(spec, 2 * n_points, skip=n_points)
    return (x, y, spec.batch(x, y)), (xh, yh, spec.batch(xh, yh))


def default_points(op):
    return 8 * op.dim


def _nullspace(M, tol):
    s, vt = np.linalg.svd(_normalize_rows(M), full_matrices=True)[1:]
    sv = np.zeros(M.shape[1])
    sv[:len(s)] = s
    smax = sv[0] if sv[0] > 0 else 1.0
    null = vt[sv <= tol * smax]
    return null, sv / smax


def nullspace_solve(op, spec, n_points=None, tol=NULL_TOL, _cache=None):
    """Orthonormal nullspace of the collocation matrix of ``op`` for ``spec``.

    Returns a ``NullspaceResult``; raises ValidationFailed (carrying the
    result) when a basis vector fails the held-out residual check.
    """
    if n_points is None:
        n_points = default_points(op)
    if n_points * op.rows_per_point < 3 * op.dim or n_points < 3 * op.dim // op.rows_per_point:
        raise InsufficientPoints(f"need at least {3 * op.dim} residual rows, got n_points={n_points}")
    fit, held = _cache if _cache is not None else _points_and_jets(spec, n_points)
    x, y, j = fit
    xh, yh, jh = held
    M = op.rows(j, x, y)
    null, sv = _nullspace(M, tol)
    null = _canonical_signs(null) if len(null) else null.reshape(0, op.dim)
    Mh = op.rows(jh, xh, yh)
    res = np.abs(Mh @ null.T).max(axis=0) if len(null) else np.zeros(0)
    scale = max(_derivative_scale(j), _derivative_scale(jh))
    bound = HELDOUT_TOL * (1.0 + scale)
    result = NullspaceResult(op.name, null, res, sv, bound, scale, len(x), len(xh))
    if np.any(res > bound):
        result.validated = False
        raise ValidationFailed(f"{spec.name}: {op.name} nullspace vector fails held-out check "
                               f"(max residual {res.max():.3e} > {bound:.3e})", result)
    return result


TRIVIAL_KT = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0)


def split_trivial(basis, tol=1e-8):
    """Put the metric direction A = B first; return (has_trivial, trivial_list, nontrivial)."""
    basis = np.asarray(basis).reshape(-1, 6)
    if len(basis) == 0:
        return False, basis, basis
    proj = basis @ TRIVIAL_KT
    if abs(np.linalg.norm(proj) - 1.0) > tol:
        return False, basis[:0], basis
    P = basis - np.outer(basis @ TRIVIAL_KT, TRIVIAL_KT)
    u, s, vt = np.linalg.svd(P, full_matrices=False)
    rest = vt[s > 1e-6] if len(s) else vt[:0]  # basis is orthonormal
    return True, TRIVIAL_KT[None, :], _canonical_signs(_reduce(rest))


def _reduce(basis):
    """Re-orthonormalize with the sparsest-looking rotation (QR with column pivoting)."""
    if len(basis) <= 1:
        return basis
    from scipy.linalg import qr
    _, _, piv = qr(basis, pivoting=True)
    lead = basis[:, piv[:len(basis)]]
    R = np.linalg.solve(lead, basis)
    q, _ = np.linalg.qr(R.T)
    return q.T


# --- line integration of the scalar part ------------------------------------

@lru_cache(maxsize=None)
def _gl(n):
    return leggauss(n)


def _segment_clear(spec, p0, p1):
    if spec.distance is None:
        return True
    d0 = spec.singular_distance(*p0)
    d1 = spec.singular_distance(*p1)
    dmin = min(d0, d1)
    if dmin <= 0:
        return False
    L = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
    n = max(2, int(math.ceil(L / (0.25 * min(dmin, 1.0)))) + 1)
    for s in np.linspace(0.0, 1.0, n):
        q = (p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1]))
        if spec.singular_distance(*q) < 0.5 * dmin:
            return False
    return True


def _segment_integral(params, spec, p0, p1):
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    L = math.hypot(dx, dy)
    if L == 0:
        return 0.0
    pieces = max(1, int(math.ceil(L * NODES_PER_UNIT / PIECE_NODES)))
    t, w = _gl(PIECE_NODES)
    edges = np.linspace(0.0, 1.0, pieces + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    s = (0.5 * (hi - lo) * t[None, :] + 0.5 * (hi + lo)).ravel()
    ws = (0.5 * (hi - lo) * w[None, :]).ravel()
    xs, ys = p0[0] + s * dx, p0[1] + s * dy
    j = spec.batch(xs, ys)
    cxx, cxy, cyy = params.matrix(xs, ys)
    gx = 2.0 * (cxx * j.dx + cxy * j.dy)
    gy = 2.0 * (cxy * j.dx + cyy * j.dy)
    val = float(np.sum(ws * (gx * dx + gy * dy)))
    if not math.isfinite(val):
        raise PathThroughSingularity(f"{spec.name}: non-finite integrand on segment {p0} -> {p1}")
    return val


def choose_path(spec, base, target):
    candidates = [
        [base, target],
        [base, (base[0], target[1]), target],
        [base, (target[0], base[1]), target],
    ]
    for path in candidates:
        if any(spec.is_singular(*p) for p in path):
            continue
        if all(_segment_clear(spec, a, b) for a, b in zip(path[:-1], path[1:])):
            return path
    raise PathThroughSingularity(f"{spec.name}: no admissible path from {base} to {target}")


def reconstruct_scalar(params, spec, base_point, target):
    """G(target) with G(base_point) = 0 and dG = 2 C_ab V^b dq^a, by Gauss-Legendre line integration."""
    base = (float(base_point[0]), float(base_point[1]))
    target = (float(target[0]), float(target[1]))
    for p in (base, target):
        if spec.is_singular(*p):
            raise SingularPoint(f"{spec.name}: {p} lies on the singular set")
    path = choose_path(spec, base, target)
    return sum(_segment_integral(params, spec, a, b) for a, b in zip(path[:-1], path[1:]))


def loop_integral(params, spec, corners):
    """Closed-polygon integral of 2 C_ab V^b dq^a (zero when the curl condition holds)."""
    pts = list(corners) + [corners[0]]
    return sum(_segment_integral(params, spec, a, b) for a, b in zip(pts[:-1], pts[1:]))


def default_base_point(spec, preferred=(1.0, 1.0)):
    """(1, 1) unless singular; otherwise the nearest clear point on a small spiral."""
    if spec.singular_distance(*preferred) >= 0.3:
        return preferred
    for k in range(1, 200):
        r = 0.1 * k
        for m in range(8):
            th = m * math.pi / 4
            p = (preferred[0] + r * math.cos(th), preferred[1] + r * math.sin(th))
            if spec.singular_distance(*p) >= 0.3:
                return p
    raise PathThroughSingularity(f"{spec.name}: no regular base point near {preferred}")


class ReconstructedScalar:
    """Callable G(X, Y) defined by line integration from a base point.

    Values come from quadrature (cached); first and second derivatives come
    exactly from the defining relation G_a = 2 C_ab V^b.  With
    ``base="half-plane"`` the base point is (sign(x), 1), one per side of the
    y axis.
    """

    def __init__(self, params, spec, base=None, cache_size=65536):
        self.params = params
        self.spec = spec
        self.base = base
        self._value = lru_cache(maxsize=cache_size)(self._compute)

    def base_for(self, x, y):
        if self.base == "half-plane":
            return (math.copysign(1.0, x), 1.0)
        if self.base is None:
            return default_base_point(self.spec)
        return self.base

    def _compute(self, x, y):
        return reconstruct_scalar(self.params, self.spec, self.base_for(x, y), (x, y))

    def value(self, x, y):
        return self._value(float(x), float(y))

    def _spatial_jet(self, x, y):
        j = self.spec.jet(x, y)
        p = self.params
        cxx, cxy, cyy = p.matrix(x, y)
        a, b, g = p.alpha, p.beta, p.gamma
        dcxx = (0.0, 2.0 * g * y + 2.0 * a)
        dcxy = (-g * y - a, -g * x - b)
        dcyy = (2.0 * g * x + 2.0 * b, 0.0)
        Vx, Vy = j.dx, j.dy
        gx = 2.0 * (cxx * Vx + cxy * Vy)
        gy = 2.0 * (cxy * Vx + cyy * Vy)
        gxx = 2.0 * (dcxx[0] * Vx + dcxy[0] * Vy + cxx * j.dxx + cxy * j.dxy)
        gyy = 2.0 * (dcxy[1] * Vx + dcyy[1] * Vy + cxy * j.dxy + cyy * j.dyy)
        gxy_a = 2.0 * (dcxx[1] * Vx + dcxy[1] * Vy + cxx * j.dxy + cxy * j.dyy)
        gxy_b = 2.0 * (dcxy[0] * Vx + dcyy[0] * Vy + cxy * j.dxx + cyy * j.dxy)
        return gx, gy, gxx, 0.5 * (gxy_a + gxy_b), gyy

    def __call__(self, X, Y):
        if ad.is_jet(X):
            x, y = float(X.v), float(Y.v)
            return ad.compose(X, Y, self.value(x, y), *self._spatial_jet(x, y))
        if np.ndim(X) == 0 and np.ndim(Y) == 0:
            return self.value(X, Y)
        Xb, Yb = np.broadcast_arrays(np.asarray(X, float), np.asarray(Y, float))
        out = np.empty(Xb.shape)
        for idx in np.ndindex(Xb.shape):
            out[idx] = self.value(Xb[idx], Yb[idx])
        return out


def kt_first_integral(name, params, spec, base=None):
    """QFI C_ab v^a v^b + G for a Killing tensor satisfying the integrability condition."""
    G = ReconstructedScalar(params, spec, base)
    return FirstIntegral(name, (TimeTerm(quad=params.matrix, scalar=G),))


def kv_first_integral(name, params):
    """LFI (b1 + b3 y) vx + (b2 - b3 x) vy + s t."""
    p = params
    terms = [TimeTerm(lin=lambda X, Y: (p.b1 + p.b3 * Y, p.b2 - p.b3 * X))]
    if p.s != 0:
        terms.append(TimeTerm(power=1, scalar=lambda X, Y: p.s + 0.0 * X))
    return FirstIntegral(name, tuple(terms))


# --- integral-3 scan --------------------------------------------------------

@dataclass
class Integral3Hit:
    lam: float
    ratio: float
    basis: list
    residual_norms: list
    overlap: list
    validated: bool = True

    def as_dict(self):
        return {"lambda": self.lam, "sigma_ratio": self.ratio,
                "basis": [[float(v) for v in p.as_array()] for p in self.basis],
                "residual_norms": [float(r) for r in self.residual_norms],
                "overlaps_integral1": list(self.overlap), "validated": self.validated}


def default_lambda_grid():
    return np.logspace(-2.0, 2.0, 64)


def integral3_scan(spec, lambda_grid=None, n_points=None, tol=NULL_TOL, threads=None):
    """Scan lambda for nontrivial generating vectors; returns a list of Integral3Hit."""
    grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("lambda_grid must be nonempty and positive")
    grid = np.sort(grid)
    if n_points is None:
        n_points = default_points(Integral3Operator)
    cache = _points_and_jets(spec, n_points)
    x, y, j = cache[0]
    M0, M1 = Integral3Operator.split(j, x, y)

    def ratio(lam):
        s = np.linalg.svd(_normalize_rows(M0 + lam * lam * M1), compute_uv=False)
        return float(s[-1] / s[0]) if s[0] > 0 else 0.0

    def polish(lam):
        # rows are linear in mu = lambda^2: alternate the near-null vector v
        # with the least-squares mu for fixed v and fixed row weights
        mu = lam * lam
        for _ in range(50):
            M = M0 + mu * M1
            w = np.linalg.norm(M, axis=1)
            w[w == 0] = 1.0
            v = np.linalg.svd(M / w[:, None])[2][-1]
            a, b = (M0 @ v) / w, (M1 @ v) / w
            bb = float(b @ b)
            if bb == 0:
                break
            new = -float(a @ b) / bb
            if not new > 0:
                break
            done = abs(new - mu) <= 1e-15 * mu
            mu = new
            if done:
                break
        return math.sqrt(mu)

    workers = threads or _max_threads()
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            ratios = np.array(list(ex.map(ratio, grid)))
    else:
        ratios = np.array([ratio(l) for l in grid])

    brackets = []
    n = len(grid)
    for i in range(n):
        left = ratios[i - 1] if i > 0 else np.inf
        right = ratios[i + 1] if i < n - 1 else np.inf
        if ratios[i] < NEAR_HIT or (ratios[i] <= left and ratios[i] <= right):
            lo = grid[max(i - 1, 0)]
            hi = grid[min(i + 1, n - 1)]
            brackets.append((lo, hi, grid[i]))

    hits = []
    for lo, hi, mid in brackets:
        if hi > lo:
            opt = minimize_scalar(ratio, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-13 * hi, "maxiter": 500})
            lam, r = float(opt.x), float(opt.fun)
            if ratio(mid) < r:
                lam, r = float(mid), ratio(mid)
        else:
            lam, r = float(mid), ratio(mid)
        if r < NEAR_HIT:
            p = polish(lam)
            if lo <= p <= hi or lo == hi:
                rp = ratio(p)
                if rp < r:
                    lam, r = p, rp
        if r > tol:
            continue
        if any(abs(lam - h.lam) <= 1e-6 * lam for h in hits):
            continue
        op = Integral3Operator(lam)
        try:
            res = nullspace_solve(op, spec, n_points, tol=max(tol, 10 * r), _cache=cache)
            validated = True
        except ValidationFailed as exc:
            res, validated = exc.result, False
        params = [LVecParams.from_array(v, lam) for v in res.basis]
        hits.append(Integral3Hit(lam, r, params, list(res.residual_norms),
                                 [p.overlaps_integral1() for p in params], validated))
    return hits


# --- report -----------------------------------------------------------------

@dataclass
class DiscoveryOptions:
    n_points: Optional[int] = None
    tol: float = NULL_TOL
    scan: bool = True
    lambda_grid: Optional[list] = None
    base_point: Optional[tuple] = None
    seed: int = 0
    n_validation: int = 20
    validation_steps: int = 1000
    validation_dt: float = 1e-3
    involution_tol: float = 1e-8
    threads: Optional[int] = None


@dataclass
class ReconstructedFI:
    fi: FirstIntegral
    kt: KTParams
    flow_derivative_max: float
    drift: float
    validated: bool

    def as_dict(self):
        return {"name": self.fi.name, "kt": [float(v) for v in self.kt.as_array()],
                "flow_derivative_max": self.flow_derivative_max, "trajectory_drift": self.drift,
                "validated": self.validated}


@dataclass
class DiscoveryReport:
    potential: dict
    lfi_basis: list
    kt_basis: list
    kt_trivial_present: bool
    integral3_hits: list
    residual_norms: dict
    singular_values: dict
    reconstructed: list
    verdict: str
    notes: list = field(default_factory=list)
    lfi_validated: bool = True
    kt_validated: bool = True

    @property
    def reconstructed_fis(self):
        return [r.fi for r in self.reconstructed]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "potential": self.potential,
            "lfi_basis": [[float(v) for v in p.as_array()] for p in self.lfi_basis],
            "kt_basis": [[float(v) for v in p.as_array()] for p in self.kt_basis],
            "kt_trivial_present": self.kt_trivial_present,
            "integral3_hits": [h.as_dict() for h in self.integral3_hits],
            "residual_norms": self.residual_norms,
            "singular_values": self.singular_values,
            "validated": {"lfi": self.lfi_validated, "kt": self.kt_validated},
            "reconstructed_fis": [r.as_dict() for r in self.reconstructed],
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def _validation_states(spec, base, rng, n):
    def ok(x, y):
        return spec.singular_distance(x, y) >= 0.3

    states = random_states(rng, n, box=(-0.5, 0.5), vbox=(-0.5, 0.5), t_range=(0.0, 0.0),
                           accept=lambda x, y: ok(x + base[0], y + base[1]))
    from .dynamics import State
    return [State(s.t, s.x + base[0], s.y + base[1], s.vx, s.vy) for s in states]


def _validate_fi(I, spec, states, steps, dt):
    fd = max(abs(flow_derivative(I, spec, s)) / (1.0 + abs(evaluate(I, s))) for s in states)
    try:
        traj = integrate(spec, states[0], dt, steps, "rk4")
        dr = drift(I, traj)
    except (SingularApproach, PathThroughSingularity, SingularPoint):
        dr = math.inf
    return float(fd), float(dr)


def assemble_report(spec, options=None):
    """Run every discovery stage and summarize what was found."""
    opt = options or DiscoveryOptions()
    notes = []
    res_norms, svals = {}, {}

    try:
        lfi = nullspace_solve(LFI_OPERATOR, spec, opt.n_points and max(opt.n_points, 12), opt.tol)
        lfi_ok = True
    except ValidationFailed as exc:
        lfi, lfi_ok = exc.result, False
        notes.append(str(exc))
    res_norms["lfi"] = [float(r) for r in lfi.residual_norms]
    svals["lfi"] = [float(s) for s in lfi.singular_values]
    lfi_basis = [KVParams.from_array(v) for v in lfi.basis]

    try:
        bd = nullspace_solve(BD_OPERATOR, spec, opt.n_points and max(opt.n_points, 18), opt.tol)
        kt_ok = True
    except ValidationFailed as exc:
        bd, kt_ok = exc.result, False
        notes.append(str(exc))
    has_trivial, trivial, nontrivial = split_trivial(bd.basis)
    if not has_trivial:
        notes.append("metric direction missing from the Killing-tensor nullspace")
    res_norms["kt"] = [float(r) for r in bd.residual_norms]
    svals["kt"] = [float(s) for s in bd.singular_values]
    kt_basis = [KTParams.from_array(v) for v in list(trivial) + list(nontrivial)]

    hits = []
    if opt.scan:
        hits = integral3_scan(spec, opt.lambda_grid, None, opt.tol, opt.threads)
        if any(any(h.overlap) for h in hits):
            notes.append("some integral-3 hits reduce to autonomous Killing-tensor solutions")

    base = tuple(opt.base_point) if opt.base_point else default_base_point(spec)
    rng = np.random.default_rng(opt.seed)
    states = _validation_states(spec, base, rng, opt.n_validation)
    H = hamiltonian(spec)

    recon = []
    if kt_ok:
        for i, v in enumerate(nontrivial):
            kt = KTParams.from_array(v)
            I = kt_first_integral(f"K{i + 1}", kt, spec, base)
            try:
                fd, dr = _validate_fi(I, spec, states, opt.validation_steps, opt.validation_dt)
            except PathThroughSingularity as exc:
                notes.append(str(exc))
                fd, dr = math.inf, math.inf
            recon.append(ReconstructedFI(I, kt, fd, dr, fd <= 1e-8 and dr <= 1e-8))

    pool = [H] + [r.fi for r in recon if r.validated]
    if lfi_ok:
        pool += [kv_first_integral(f"L{i + 1}", p) for i, p in enumerate(lfi_basis)]
    verdict = "none"
    if len(pool) >= 3 and independence_rank(pool, states) >= 3:
        verdict = "superintegrable-candidate"
    else:
        for F in pool[1:]:
            commute = all(abs(poisson_bracket(H, F, s)) <= opt.involution_tol for s in states)
            if commute and independence_rank([H, F], states) >= 2:
                verdict = "integrable-candidate"
                break
    if verdict == "superintegrable-candidate":
        commuting = any(all(abs(poisson_bracket(H, F, s)) <= opt.involution_tol for s in states)
                        for F in pool[1:])
        if not commuting:
            notes.append("rank 3 reached but no first integral commutes with H")

    return DiscoveryReport(spec.describe(), lfi_basis, kt_basis, has_trivial, hits, res_norms, svals,
                           recon, verdict, notes, lfi_ok, kt_ok)
