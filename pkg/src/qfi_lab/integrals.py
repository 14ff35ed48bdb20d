"""First integrals quadratic in the velocities, Poisson brackets and rank tests.

A first integral is a finite sum of terms

    g(t) * (K_ab(q) v^a v^b + K_a(q) v^a + K(q)),

with g(t) = t**p or exp(rate * t).  The coefficient closures take two
arguments (X, Y) that may be floats, numpy arrays or jets; through jets every
phase-space derivative up to second order is exact.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import ad
from .dynamics import State, _write_rows

# Symplectic form in the coordinate order (x, y, vx, vy).
J4 = np.array([[0.0, 0.0, 1.0, 0.0],
               [0.0, 0.0, 0.0, 1.0],
               [-1.0, 0.0, 0.0, 0.0],
               [0.0, -1.0, 0.0, 0.0]])

RANK_TOL = 1e-9


@dataclass(frozen=True)
class TimeTerm:
    """One time factor together with its quadratic, linear and scalar parts.

    ``quad(X, Y) -> (Kxx, Kxy, Kyy)`` so that the quadratic part is
    Kxx vx^2 + 2 Kxy vx vy + Kyy vy^2; ``lin(X, Y) -> (Kx, Ky)``;
    ``scalar(X, Y) -> K``.
    """
    power: int = 0
    rate: Optional[float] = None
    quad: Optional[Callable] = None
    lin: Optional[Callable] = None
    scalar: Optional[Callable] = None

    def __post_init__(self):
        if self.rate is not None and self.rate == 0:
            raise ValueError("exponential time factor needs a nonzero rate")
        if self.power < 0 or int(self.power) != self.power:
            raise ValueError("polynomial time factor needs a non-negative integer power")

    def factor(self, t):
        if self.rate is not None:
            return np.exp(self.rate * t)
        return t ** self.power if self.power else 1.0 + 0.0 * t

    def dfactor(self, t):
        if self.rate is not None:
            return self.rate * np.exp(self.rate * t)
        if self.power == 0:
            return 0.0 * t
        return self.power * t ** (self.power - 1)

    def slots(self, X, Y):
        """Coefficients [Kxx, Kxy, Kyy, Kx, Ky, K]; missing parts are 0."""
        out = [0.0] * 6
        if self.quad is not None:
            out[0:3] = self.quad(X, Y)
        if self.lin is not None:
            out[3:5] = self.lin(X, Y)
        if self.scalar is not None:
            out[5] = self.scalar(X, Y)
        return out


@dataclass(frozen=True)
class FirstIntegral:
    name: str
    terms: tuple
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("a first integral needs at least one term")

    @property
    def kind(self):
        return "QFI" if any(t.quad is not None for t in self.terms) else "LFI"

    @property
    def time_dependence(self):
        if any(t.rate is not None for t in self.terms):
            return "exponential"
        if any(t.power for t in self.terms):
            return "polynomial"
        return "autonomous"

    def __call__(self, s):
        return evaluate(self, s)

    def scaled(self, c, name=None):
        return combine(name or f"{c!r}*{self.name}", [(c, self)])


def _scale_closure(fn, c):
    if fn is None:
        return None

    def scaled(X, Y):
        r = fn(X, Y)
        if isinstance(r, tuple):
            return tuple(c * v for v in r)
        return c * r
    return scaled


def combine(name, pairs, constant=0.0):
    """Linear combination sum(c_i * I_i) + constant as a new FirstIntegral."""
    terms = []
    for c, fi in pairs:
        for t in fi.terms:
            terms.append(TimeTerm(t.power, t.rate, _scale_closure(t.quad, c),
                                  _scale_closure(t.lin, c), _scale_closure(t.scalar, c)))
    if constant:
        terms.append(TimeTerm(scalar=lambda X, Y, k=float(constant): k + 0.0 * X))
    return FirstIntegral(name, tuple(terms))


def hamiltonian(spec, name="H"):
    """The energy (v^2)/2 + V as a FirstIntegral."""
    return FirstIntegral(name, (TimeTerm(quad=lambda X, Y: (0.5, 0.0, 0.5), scalar=spec.func),))


def evaluate(I, s):
    """Value of I at a state; also vectorizes over array-valued states."""
    t, X, Y, vx, vy = s.t, s.x, s.y, s.vx, s.vy
    total = 0.0
    for term in I.terms:
        kxx, kxy, kyy, kx, ky, k = term.slots(X, Y)
        p = kxx * vx * vx + 2.0 * kxy * vx * vy + kyy * vy * vy + kx * vx + ky * vy + k
        total = total + term.factor(t) * p
    return total


def evaluate_along(I, traj):
    """Values of I at every sample of a trajectory."""
    with np.errstate(all="ignore"):
        vals = evaluate(I, traj)
    return np.broadcast_to(np.asarray(vals, dtype=float), traj.t.shape).copy()


def drift(I, traj):
    """max |I(t) - I(0)| / (1 + |I(0)|) along a trajectory."""
    vals = evaluate_along(I, traj)
    return float(np.max(np.abs(vals - vals[0])) / (1.0 + abs(vals[0])))


def write_trace_csv(path_or_file, traj, fis):
    cols = [evaluate_along(I, traj) for I in fis]
    rows = np.column_stack([traj.t] + cols)
    _write_rows(path_or_file, ["t"] + [I.name for I in fis], rows)


@dataclass(frozen=True)
class Expansion:
    """Value, time derivative, phase gradient and Hessian in (x, y, vx, vy)."""
    value: float
    dt: float
    grad: np.ndarray
    hess: np.ndarray


def expand(I, s):
    X, Y = ad.variables(s.x, s.y)
    vx, vy, t = float(s.vx), float(s.vy), float(s.t)
    w = np.array([vx * vx, 2.0 * vx * vy, vy * vy, vx, vy, 1.0])
    wvx = np.array([2.0 * vx, 2.0 * vy, 0.0, 1.0, 0.0, 0.0])
    wvy = np.array([0.0, 2.0 * vx, 2.0 * vy, 0.0, 1.0, 0.0])
    val = 0.0
    It = 0.0
    g = np.zeros(4)
    H = np.zeros((4, 4))
    for term in I.terms:
        C = np.array([ad.components(c) for c in term.slots(X, Y)], dtype=float)
        f = float(term.factor(t))
        df = float(term.dfactor(t))
        P = w @ C
        Pvx = wvx @ C
        Pvy = wvy @ C
        val += f * P[0]
        It += df * P[0]
        g += f * np.array([P[1], P[2], Pvx[0], Pvy[0]])
        H += f * np.array([
            [P[3], P[4], Pvx[1], Pvy[1]],
            [P[4], P[5], Pvx[2], Pvy[2]],
            [Pvx[1], Pvx[2], 2.0 * C[0, 0], 2.0 * C[1, 0]],
            [Pvy[1], Pvy[2], 2.0 * C[1, 0], 2.0 * C[2, 0]],
        ])
    return Expansion(float(val), float(It), g, H)


def phase_gradient(I, s):
    """(dI/dt, [I_x, I_y, I_vx, I_vy]) at a state."""
    e = expand(I, s)
    return e.dt, e.grad


def phase_hessian(I, s):
    return expand(I, s).hess


def flow_derivative(I, spec, s):
    """dI/dt along the flow: I_t + v . grad_q I - grad V . grad_v I."""
    e = expand(I, s)
    Vx, Vy = spec.grad(s.x, s.y)
    g = e.grad
    return e.dt + g[0] * s.vx + g[1] * s.vy - g[2] * Vx - g[3] * Vy


def poisson_bracket(F, G, s):
    """{F, G} = F_x G_vx - F_vx G_x + F_y G_vy - F_vy G_y."""
    return float(expand(F, s).grad @ J4 @ expand(G, s).grad)


def bracket_gradient(F, G, s):
    """Phase gradient of {F, G}, from the Hessians (exact chain rule)."""
    eF, eG = expand(F, s), expand(G, s)
    return eF.hess @ J4 @ eG.grad - eG.hess @ J4 @ eF.grad


def jacobi_residual(F, G, K, s):
    """{F,{G,K}} + {G,{K,F}} + {K,{F,G}} using bracket gradients."""
    eF, eG, eK = expand(F, s).grad, expand(G, s).grad, expand(K, s).grad
    return float(eF @ J4 @ bracket_gradient(G, K, s)
                 + eG @ J4 @ bracket_gradient(K, F, s)
                 + eK @ J4 @ bracket_gradient(F, G, s))


def gradient_matrix(fis, s):
    return np.array([expand(I, s).grad for I in fis])


def independence_rank(fis, states, tol=RANK_TOL):
    """Maximum over the sample states of the numerical rank of the gradient matrix."""
    best = 0
    for s in states:
        M = gradient_matrix(fis, s)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv.size == 0 or sv[0] == 0:
            continue
        best = max(best, int(np.sum(sv > tol * sv[0])))
    return best


@dataclass(frozen=True)
class NoetherData:
    """Gauged generator eta_a = -K_ab v^b - K_a and gauge function f = K."""
    fi: FirstIntegral

    def eta(self, s):
        X, Y, t = s.x, s.y, s.t
        ex = ey = 0.0
        for term in self.fi.terms:
            kxx, kxy, kyy, kx, ky, _ = (ad.value(c) for c in term.slots(X, Y))
            f = term.factor(t)
            ex -= f * (kxx * s.vx + kxy * s.vy + kx)
            ey -= f * (kxy * s.vx + kyy * s.vy + ky)
        return np.array([ex, ey])

    def gauge(self, s):
        total = 0.0
        for term in self.fi.terms:
            total += term.factor(s.t) * ad.value(term.slots(s.x, s.y)[5])
        return total

    def reconstruct(self, s):
        """f - eta_a v^a, which equals the first integral."""
        e = self.eta(s)
        return self.gauge(s) - e[0] * s.vx - e[1] * s.vy


def noether_readout(I):
    return NoetherData(I)


def random_states(rng, n, box=(-2.0, 2.0), vbox=(-1.0, 1.0), t_range=(0.0, 1.0), accept=None):
    """Uniform random states, rejecting positions where ``accept`` is False."""
    out = []
    while len(out) < n:
        x, y = rng.uniform(*box, size=2)
        if accept is not None and not accept(x, y):
            continue
        vx, vy = rng.uniform(*vbox, size=2)
        t = rng.uniform(*t_range)
        out.append(State(float(t), float(x), float(y), float(vx), float(vy)))
    return out
