"""Registry of known potentials together with their linear and quadratic first integrals.

Every entry is built by a function of its (validated) parameters and returns a
``CatalogEntry`` carrying the potential, the first integrals, the Poisson
bracket identities they satisfy, a classification and a reference state.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import ad, functions
from .dynamics import State
from .errors import BadParams
from .fields import PotentialSpec, dist_line_x, dist_line_y, dist_min, dist_origin
from .integrals import FirstIntegral, TimeTerm, hamiltonian, poisson_bracket, evaluate

CLASSIFICATIONS = ("integrable", "superintegrable", "LFI-only")


# --- parameter schema -------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "real" or "function"
    default: object
    doc: str = ""

    def coerce(self, entry, value):
        if self.kind == "function":
            try:
                return functions.named(value)
            except BadParams as exc:
                raise BadParams(f"{entry}: parameter {self.name!r}: {exc}") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise BadParams(f"{entry}: parameter {self.name!r} must be a real number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise BadParams(f"{entry}: parameter {self.name!r} must be finite")
        return value

    def schema(self):
        d = self.default.name if isinstance(self.default, functions.Fn) else self.default
        return {"name": self.name, "kind": self.kind, "default": d, "doc": self.doc}


def _real(name, default, doc=""):
    return Param(name, "real", default, doc)


def _func(name, default, doc=""):
    return Param(name, "function", default, doc)


# --- entries ----------------------------------------------------------------

@dataclass(frozen=True)
class BracketIdentity:
    """{F, G} = sum(coef * I) + constant."""
    F: str
    G: str
    terms: tuple = ()
    constant: float = 0.0

    def expected(self, fis, s):
        return self.constant + sum(c * evaluate(fis[n], s) for n, c in self.terms)

    def error(self, fis, s):
        return poisson_bracket(fis[self.F], fis[self.G], s) - self.expected(fis, s)

    def describe(self):
        parts = [f"{c!r}*{n}" for n, c in self.terms]
        if self.constant or not parts:
            parts.append(repr(self.constant))
        return f"{{{self.F},{self.G}}} = " + " + ".join(parts)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    family: str
    potential: PotentialSpec
    fis: tuple
    bracket_identities: tuple
    classification: str
    reference_ics: State
    independent: tuple
    commuting: Optional[tuple]
    table_ref: str
    params: dict = field(default_factory=dict)
    closed_form: bool = False

    def fi(self, name):
        for I in self.fis:
            if I.name == name:
                return I
        raise KeyError(f"{self.name} has no first integral named {name!r}")

    @property
    def fi_map(self):
        return {I.name: I for I in self.fis}

    @property
    def fi_names(self):
        return [I.name for I in self.fis]


@dataclass(frozen=True)
class EntryDef:
    name: str
    family: str
    params: tuple
    build: Callable
    table_ref: str
    closed_form: bool = False
    summary: str = ""


_REGISTRY = {}


def _register(name, family, params, table_ref, closed_form=False, summary=""):
    def deco(fn):
        _REGISTRY[name] = EntryDef(name, family, tuple(params), fn, table_ref, closed_form, summary)
        return fn
    return deco


# --- small helpers for writing first integrals ------------------------------

def T(quad=None, lin=None, scalar=None, power=0, rate=None):
    return TimeTerm(power, rate, quad, lin, scalar)


def FI(name, *terms, description=""):
    return FirstIntegral(name, terms, description)


def const(c):
    return lambda X, Y: c + 0.0 * X


def _angular(X, Y):
    # (y vx - x vy)^2
    return (Y * Y, -X * Y, X * X)


def _mixed_x(X, Y):
    # vx (y vx - x vy)
    return (Y, -0.5 * X, 0.0 * X)


def _mixed_y(X, Y):
    # vy (x vy - y vx)
    return (0.0 * X, -0.5 * Y, X)


def _half_x(X, Y):
    return (0.5, 0.0, 0.0)


def _half_y(X, Y):
    return (0.0, 0.0, 0.5)


def _ident(F, G, constant=0.0, **terms):
    return BracketIdentity(F, G, tuple(terms.items()), constant)


def _fn_poles_distance(fn, which):
    """Distance to the lines where a one-variable ingredient has poles."""
    if not fn.poles:
        return None
    mk = dist_line_x if which == "x" else dist_line_y
    return dist_min(*(mk(p) for p in fn.poles))


def _require(cond, msg):
    if not cond:
        raise BadParams(msg)


def _ray_distance(sign):
    """Distance to the ray {x = 0, sign * y >= 0}."""
    def d(x, y):
        if sign * y >= 0:
            return abs(x)
        return math.hypot(x, y)
    return d


# --- Class I ----------------------------------------------------------------

@_register("V1", "Class I",
           [_real("c", 0.05), _real("b", 0.5), _func("F", "square", "F(w), w = y - b x, F'' != 0")],
           "Class I integrable: V1 = c x + F(y - b x)",
           summary="linear plus a function of one oblique coordinate")
def _v1(c, b, F):
    def V(X, Y):
        return c * X + F(Y - b * X)

    def lin(X, Y):
        return (1.0, b)

    pot = PotentialSpec("V1", V, dict(c=c, b=b, F=F))
    fis = (hamiltonian(pot),
           FI("L21", T(lin=lin), T(scalar=const(c), power=1)),
           FI("L22", T(lin=lin, power=1), T(scalar=lambda X, Y: -(X + b * Y)),
              T(scalar=const(0.5 * c), power=2)),
           FI("Q21", T(quad=lambda X, Y: (1.0, b, b * b), scalar=lambda X, Y: 2.0 * c * (X + b * Y))))
    ids = (_ident("L21", "L22", 1.0 + b * b),
           _ident("H", "L22", L21=1.0),
           _ident("H", "L21", c),
           _ident("H", "Q21"),
           _ident("Q21", "L21", 2.0 * c * (1.0 + b * b)),
           _ident("Q21", "L22", L21=2.0 * (1.0 + b * b)))
    return dict(potential=pot, fis=fis, identities=ids, classification="integrable",
                ics=State(0.0, 0.3, 0.2, 0.1, -0.2), independent=("H", "Q21"), commuting=("H", "Q21"))


@_register("V1a", "Class I", [_real("c", 0.1), _real("lambda", 0.2)],
           "Class I superintegrable: V1a = c x + lambda y",
           summary="uniform force field")
def _v1a(c, lam):
    pot = PotentialSpec("V1a", lambda X, Y: c * X + lam * Y, {"c": c, "lambda": lam})
    Q11 = FI("Q11", T(quad=_half_x, scalar=lambda X, Y: c * X))
    fis = (hamiltonian(pot),
           FI("L11", T(lin=lambda X, Y: (1.0, 0.0)), T(scalar=const(c), power=1)),
           FI("L12", T(lin=lambda X, Y: (0.0, 1.0)), T(scalar=const(lam), power=1)),
           Q11,
           FI("Q12", T(quad=_half_y, scalar=lambda X, Y: lam * Y)),
           FI("I2", T(lin=lambda X, Y: (lam, -c))),
           FI("I3", *Q11.terms))
    ids = (_ident("Q11", "Q12"),
           _ident("L11", "Q11", -c),
           _ident("H", "I2"),
           _ident("H", "I3"),
           _ident("I2", "I3", -c * lam))
    return dict(potential=pot, fis=fis, identities=ids, classification="superintegrable",
                ics=State(0.0, 0.5, -0.4, 0.3, 0.2), independent=("H", "I2", "I3"), commuting=("H", "I3"))


@_register("V1b", "Class I", [_real("c", 0.1), _real("lambda", 0.3, "nonzero")],
           "Class I superintegrable: V1b = c x - lambda^2 y^2 / 2",
           summary="uniform force plus an inverted oscillator")
def _v1b(c, lam):
    _require(lam != 0, "V1b: lambda must be nonzero")
    pot = PotentialSpec("V1b", lambda X, Y: c * X - 0.5 * lam * lam * Y * Y, {"c": c, "lambda": lam})
    fis = (hamiltonian(pot),
           FI("L11", T(lin=lambda X, Y: (1.0, 0.0)), T(scalar=const(c), power=1)),
           FI("L22", T(lin=lambda X, Y: (1.0, 0.0), power=1), T(scalar=lambda X, Y: -X),
              T(scalar=const(0.5 * c), power=2)),
           FI("L23", T(lin=lambda X, Y: (0.0, 1.0), scalar=lambda X, Y: -lam * Y, rate=lam)),
           FI("Q2e1", T(quad=_half_x, scalar=lambda X, Y: c * X)),
           FI("Q2e2", T(quad=_half_y, scalar=lambda X, Y: -0.5 * lam * lam * Y * Y)))
    ids = (_ident("H", "L23", L23=lam),
           _ident("Q2e2", "L23", L23=lam),
           _ident("Q2e1", "L23"),
           _ident("H", "L22", L11=1.0),
           _ident("L11", "L22", 1.0))
    return dict(potential=pot, fis=fis, identities=ids, classification="superintegrable",
                ics=State(0.0, 0.4, 0.3, -0.2, -0.1), independent=("Q2e1", "Q2e2", "L23"),
                commuting=("H", "Q2e1"))


@_register("V2", "Class I", [_real("c", 0.1), _func("F", "square", "F(x), F'' != 0")],
           "Class I integrable: V2 = c y + F(x)", closed_form=True,
           summary="uniform force in y, arbitrary motion in x")
def _v2(c, F):
    pot = PotentialSpec("V2", lambda X, Y: c * Y + F(X), {"c": c, "F": F},
                        _fn_poles_distance(F, "x"))
    fis = (hamiltonian(pot),
           FI("L31", T(lin=lambda X, Y: (0.0, 1.0)), T(scalar=const(c), power=1)),
           FI("Q31", T(quad=_half_x, scalar=lambda X, Y: F(X))),
           FI("Q32", T(quad=_half_y, scalar=lambda X, Y: c * Y)))
    ids = (_ident("H", "L31", c), _ident("H", "Q31"), _ident("Q31", "Q32"), _ident("Q31", "L31"))
    return dict(potential=pot, fis=fis, identities=ids, classification="integrable",
                ics=State(0.0, 0.5, 0.0, 0.3, 0.2), independent=("H", "Q31"), commuting=("H", "Q31"))


@_register("V2a", "Class I", [_real("c", 0.1), _real("lambda", 0.3, "nonzero")],
           "Class I superintegrable: V2a = c y - lambda^2 x^2 / 2",
           summary="uniform force in y, inverted oscillator in x")
def _v2a(c, lam):
    _require(lam != 0, "V2a: lambda must be nonzero")
    pot = PotentialSpec("V2a", lambda X, Y: c * Y - 0.5 * lam * lam * X * X, {"c": c, "lambda": lam})
    fis = (hamiltonian(pot),
           FI("L31", T(lin=lambda X, Y: (0.0, 1.0)), T(scalar=const(c), power=1)),
           FI("Q31a", T(quad=_half_x, scalar=lambda X, Y: -0.5 * lam * lam * X * X)),
           FI("Q32", T(quad=_half_y, scalar=lambda X, Y: c * Y)),
           FI("L32", T(lin=lambda X, Y: (1.0, 0.0), scalar=lambda X, Y: -lam * X, rate=lam)))
    ids = (_ident("H", "L32", L32=lam), _ident("H", "L31", c), _ident("Q31a", "Q32"),
           _ident("Q31a", "L32", L32=lam), _ident("Q32", "L32"))
    return dict(potential=pot, fis=fis, identities=ids, classification="superintegrable",
                ics=State(0.0, 0.3, 0.1, -0.1, 0.2), independent=("Q31a", "Q32", "L32"),
                commuting=("H", "Q31a"))


@_register("V3", "Class I",
           [_real("c", 0.01), _real("b1", 0.6), _real("b2", -0.8),
            _func("F", "square", "F(w), w = (x^2 + y^2)/2 + b1 y - b2 x")],
           "Class I: V3 = c atan((y + b1)/(b2 - x)) + F(w); LFI-only for c != 0, integrable for c = 0",
           summary="rotational symmetry about (b2, -b1) broken by an angular term")
def _v3(c, b1, b2, F):
    def V(X, Y):
        w = 0.5 * (X * X + Y * Y) + b1 * Y - b2 * X
        if c == 0:
            return F(w)
        return c * ad.atan((Y + b1) / (b2 - X)) + F(w)

    # the angular term is discontinuous on x = b2; F may add poles in w
    pot = PotentialSpec("V3", V, dict(c=c, b1=b1, b2=b2, F=F), dist_line_x(b2) if c != 0 else None)
    L51 = FI("L51", T(lin=lambda X, Y: (Y + b1, b2 - X)), T(scalar=const(c), power=1))
    fis = (hamiltonian(pot), L51)
    ids = (_ident("H", "L51", c),)
    if c == 0:
        return dict(potential=pot, fis=fis, identities=ids, classification="integrable",
                    ics=State(0.0, 0.4, -0.6, 0.0, 0.05), independent=("H", "L51"),
                    commuting=("H", "L51"))
    return dict(potential=pot, fis=fis, identities=ids, classification="LFI-only",
                ics=State(0.0, 0.4, -0.6, 0.0, 0.05), independent=("H", "L51"), commuting=None)


@_register("V3a", "Class I",
           [_real("lambda", 0.5, "nonzero"), _real("b1", 0.3), _real("b2", -0.2)],
           "Class I superintegrable: V3a = lambda ((x^2 + y^2)/2 + b1 y - b2 x)",
           summary="shifted isotropic oscillator")
def _v3a(lam, b1, b2):
    _require(lam != 0, "V3a: lambda must be nonzero")
    pot = PotentialSpec("V3a", lambda X, Y: lam * (0.5 * (X * X + Y * Y) + b1 * Y - b2 * X),
                        {"lambda": lam, "b1": b1, "b2": b2})
    fis = (hamiltonian(pot),
           FI("L41", T(lin=lambda X, Y: (Y + b1, b2 - X))),
           FI("Q41", T(quad=_half_x, scalar=lambda X, Y: 0.5 * lam * X * X - lam * b2 * X)),
           FI("Q42", T(quad=_half_y, scalar=lambda X, Y: 0.5 * lam * Y * Y + lam * b1 * Y)),
           FI("Q43", T(quad=lambda X, Y: (0.0, 0.5, 0.0),
                       scalar=lambda X, Y: lam * (X * Y + b1 * X - b2 * Y))))
    ids = (_ident("H", "L41"), _ident("H", "Q41"),
           _ident("L41", "Q41", lam * b1 * b2, Q43=-1.0),
           _ident("L41", "Q42", -lam * b1 * b2, Q43=1.0),
           _ident("L41", "Q43", lam * (b2 * b2 - b1 * b1), Q41=2.0, Q42=-2.0),
           _ident("Q41", "Q42"),
           _ident("Q41", "Q43", L41=-lam),
           _ident("Q43", "Q42", L41=-lam))
    return dict(potential=pot, fis=fis, identities=ids, classification="superintegrable",
                ics=State(0.0, 0.6, 0.4, 0.2, -0.3), independent=("H", "L41", "Q41"),
                commuting=("H", "L41"))


@_register("V3b", "Class I", [_real("k", 0.2, "nonzero")],
           "Class I superintegrable: V3b = -k^2 (x^2 + y^2)/2", closed_form=True,
           summary="isotropic inverted oscillator")
def _v3b(k):
    _require(k != 0, "V3b: k must be nonzero")
    k2 = k * k
    pot = PotentialSpec("V3b", lambda X, Y: -0.5 * k2 * (X * X + Y * Y), {"k": k})
    fis = (hamiltonian(pot),
           FI("L41b", T(lin=lambda X, Y: (Y, -X))),
           FI("Q41b", T(quad=_half_x, scalar=lambda X, Y: -0.5 * k2 * X * X)),
           FI("Q42b", T(quad=_half_y, scalar=lambda X, Y: -0.5 * k2 * Y * Y)),
           FI("Q43b", T(quad=lambda X, Y: (0.0, 0.5, 0.0), scalar=lambda X, Y: -k2 * X * Y)),
           FI("L42+", T(lin=lambda X, Y: (1.0, 0.0), scalar=lambda X, Y: -k * X, rate=k)),
           FI("L42-", T(lin=lambda X, Y: (1.0, 0.0), scalar=lambda X, Y: k * X, rate=-k)),
           FI("L43+", T(lin=lambda X, Y: (0.0, 1.0), scalar=lambda X, Y: -k * Y, rate=k)),
           FI("L43-", T(lin=lambda X, Y: (0.0, 1.0), scalar=lambda X, Y: k * Y, rate=-k)))
    lam = -k2
    ids = (_ident("H", "L41b"), _ident("H", "Q41b"),
           _ident("L41b", "Q41b", Q43b=-1.0),
           _ident("L41b", "Q42b", Q43b=1.0),
           _ident("L41b", "Q43b", Q41b=2.0, Q42b=-2.0),
           _ident("Q41b", "Q42b"),
           _ident("Q41b", "Q43b", L41b=-lam),
           _ident("Q43b", "Q42b", L41b=-lam),
           BracketIdentity("H", "L42+", (("L42+", k),)),
           BracketIdentity("H", "L42-", (("L42-", -k),)),
           BracketIdentity("H", "L43+", (("L43+", k),)),
           BracketIdentity("H", "L43-", (("L43-", -k),)))
    return dict(potential=pot, fis=fis, identities=ids, classification="superintegrable",
                ics=State(0.0, 0.3, -0.2, 0.1, 0.15), independent=("H", "L41b", "Q41b"),
                commuting=("H", "L41b"))


# --- Class II integrable ----------------------------------------------------

@_register("V21", "Class II",
           [_func("F1", "0.2*square", "F1(y/x)"), _func("F2", "0.5*square", "F2(x^2 + y^2)")],
           "Class II integrable: V21 = F1(y/x)/(x^2 + y^2) + F2(x^2 + y^2)",
           summary="angular function over r^2 plus a radial function")
def _v21(F1, F2):
    def V(X, Y):
        r2 = X * X + Y * Y
        return F1(Y / X) / r2 + F2(r2)

    pot = PotentialSpec("V21", V, {"F1": F1, "F2": F2}, dist_line_x(0.0))
    fis = (hamiltonian(pot),
           FI("I11", T(quad=_angular, scalar=lambda X, Y: 2.0 * F1(Y / X))))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I11"),),
                classification="integrable", ics=State(0.0, 0.5, 0.5, 0.1, 0.1),
                independent=("H", "I11"), commuting=("H", "I11"))


def _dist_v21a(ell):
    if ell > 0:
        return dist_origin
    if ell == 0:
        return dist_line_x(0.0)
    m = math.sqrt(-ell)
    n = math.sqrt(1.0 + m * m)
    return lambda x, y: min(abs(x - m * y), abs(x + m * y)) / n


@_register("V21a", "Class II",
           [_real("k", 0.2), _real("ell", 0.5), _func("F2", "0.5*square", "F2(x^2 + y^2)")],
           "Class II integrable: V21a = k/(x^2 + ell y^2) + F2(x^2 + y^2)",
           summary="anisotropic inverse-square term plus a radial function")
def _v21a(k, ell, F2):
    def V(X, Y):
        r2 = X * X + Y * Y
        return k / (X * X + ell * Y * Y) + F2(r2)

    pot = PotentialSpec("V21a", V, {"k": k, "ell": ell, "F2": F2}, _dist_v21a(ell))
    fis = (hamiltonian(pot),
           FI("I11a", T(quad=_angular,
                        scalar=lambda X, Y: 2.0 * k * (1.0 - ell) * Y * Y / (X * X + ell * Y * Y))))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I11a"),),
                classification="integrable", ics=State(0.0, 1.0, 0.4, 0.1, -0.2),
                independent=("H", "I11a"), commuting=("H", "I11a"))


def v21b(k, F2=None):
    """V = k/(2x^2 + y^2) + F2(x^2 + y^2) with I11b = L^2 + k y^2/(2x^2 + y^2).

    Coincides with V21a at ell = 1/2 and coupling k/2.
    """
    F2 = functions.named(F2 if F2 is not None else "0.5*square")

    def V(X, Y):
        return k / (2.0 * X * X + Y * Y) + F2(X * X + Y * Y)

    pot = PotentialSpec("V21b", V, {"k": k, "F2": F2}, dist_origin)
    I = FI("I11b", T(quad=_angular, scalar=lambda X, Y: k * Y * Y / (2.0 * X * X + Y * Y)))
    return pot, I


def _elliptic(A):
    sA = math.sqrt(A)

    def uv(X, Y):
        r2 = X * X + Y * Y
        s = r2 + A
        D = ad.sqrt(s * s - 4.0 * A * X * X)
        u2 = s + D
        v2 = 4.0 * A * X * X / u2
        u = ad.sqrt(u2)
        v = 2.0 * sA * X / u
        return u, v, u2, v2, D
    return uv


@_register("V22", "Class II",
           [_real("A", 1.0, "A > 0"), _func("F1", "0.25*quartic", "F1(u)"),
            _func("F2", "0.125*quartic", "F2(v)")],
           "Class II integrable: V22 = (F1(u) - F2(v))/(u^2 - v^2), elliptic coordinates",
           summary="Darboux potential separable in elliptic coordinates")
def _v22(A, F1, F2):
    _require(A > 0, "V22: A must be positive")
    uv = _elliptic(A)

    def V(X, Y):
        u, v, u2, v2, D = uv(X, Y)
        return (F1(u) - F2(v)) / (2.0 * D)

    def G(X, Y):
        u, v, u2, v2, D = uv(X, Y)
        return (v2 * F1(u) - u2 * F2(v)) / (2.0 * D)

    sA = math.sqrt(A)
    pot = PotentialSpec("V22", V, {"A": A, "F1": F1, "F2": F2},
                        lambda x, y: min(math.hypot(x - sA, y), math.hypot(x + sA, y)))
    fis = (hamiltonian(pot),
           FI("I21", T(quad=lambda X, Y: (Y * Y + A, -X * Y, X * X), scalar=G)))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I21"),),
                classification="integrable", ics=State(0.0, 0.2, 1.0, 0.2, -0.1),
                independent=("H", "I21"), commuting=("H", "I21"))


def _v24_parts(F1, F2, swap):
    def V(X, Y):
        if swap:
            X, Y = Y, X
        r = ad.sqrt(X * X + Y * Y)
        return (F1(r + Y) + F2(r - Y)) / r

    def G(X, Y):
        if swap:
            X, Y = Y, X
        r = ad.sqrt(X * X + Y * Y)
        return ((r + Y) * F2(r - Y) - (r - Y) * F1(r + Y)) / r
    return V, G


@_register("V24", "Class II", [_func("F1", "square"), _func("F2", "square")],
           "Class II integrable: V24 = (F1(r + y) + F2(r - y))/r",
           summary="separable in parabolic coordinates")
def _v24(F1, F2):
    V, G = _v24_parts(F1, F2, False)
    pot = PotentialSpec("V24", V, {"F1": F1, "F2": F2}, dist_origin)
    fis = (hamiltonian(pot), FI("I41", T(quad=_mixed_x, scalar=G)))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I41"),),
                classification="integrable", ics=State(0.0, 1.0, 0.5, 0.1, -0.2),
                independent=("H", "I41"), commuting=("H", "I41"))


@_register("V24b", "Class II", [_func("F1", "square"), _func("F2", "square")],
           "Class II integrable: V24b = V24 with x and y exchanged",
           summary="parabolic separable potential, rotated")
def _v24b(F1, F2):
    V, G = _v24_parts(F1, F2, True)
    pot = PotentialSpec("V24b", V, {"F1": F1, "F2": F2}, dist_origin)
    fis = (hamiltonian(pot), FI("I41b", T(quad=_mixed_y, scalar=G)))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I41b"),),
                classification="integrable", ics=State(0.0, 0.5, 1.0, -0.2, 0.1),
                independent=("H", "I41b"), commuting=("H", "I41b"))


def _sep_fis(F1, F2):
    return (FI("I71a", T(quad=_half_x, scalar=lambda X, Y: F1(X))),
            FI("I71b", T(quad=_half_y, scalar=lambda X, Y: F2(Y))))


@_register("V27", "Class II", [_func("F1", "square"), _func("F2", "0.25*quartic")],
           "Class II integrable: V27 = F1(x) + F2(y)", closed_form=True,
           summary="separable in Cartesian coordinates")
def _v27(F1, F2):
    pot = PotentialSpec("V27", lambda X, Y: F1(X) + F2(Y), {"F1": F1, "F2": F2},
                        dist_min(_fn_poles_distance(F1, "x"), _fn_poles_distance(F2, "y")))
    fis = (hamiltonian(pot),) + _sep_fis(F1, F2)
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I71a"), _ident("I71a", "I71b")),
                classification="integrable", ics=State(0.0, 0.8, -0.5, 0.2, 0.3),
                independent=("H", "I71a"), commuting=("H", "I71a"))


def _line_poles(fn, m):
    """Distance to the lines y + m x = p for the poles p of fn."""
    if not fn.poles:
        return None
    n = math.sqrt(1.0 + m * m)
    return lambda x, y: min(abs(y + m * x - p) for p in fn.poles) / n


@_register("V28", "Class II",
           [_real("A", 1.5), _real("B", 1.0), _real("C", 1.0, "nonzero"),
            _func("F1", "0.5*square"), _func("F2", "0.25*quartic")],
           "Class II integrable: V28 = F1(y + (b0 + s) x) + F2(y + (b0 - s) x), b0 = (A - B)/2C, s = sqrt(b0^2 + 1)",
           summary="separable in rotated Cartesian coordinates")
def _v28(A, B, C, F1, F2):
    _require(C != 0, "V28: C must be nonzero")
    b0 = (A - B) / (2.0 * C)
    sg = math.sqrt(b0 * b0 + 1.0)
    m1, m2 = b0 + sg, b0 - sg

    def V(X, Y):
        return F1(Y + m1 * X) + F2(Y + m2 * X)

    def G(X, Y):
        return (A + B) * V(X, Y) + 2.0 * C * sg * (F1(Y + m1 * X) - F2(Y + m2 * X))

    pot = PotentialSpec("V28", V, dict(A=A, B=B, C=C, F1=F1, F2=F2),
                        dist_min(_line_poles(F1, m1), _line_poles(F2, m2)))
    fis = (hamiltonian(pot), FI("I81", T(quad=lambda X, Y: (A, C, B), scalar=G)))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I81"),),
                classification="integrable", ics=State(0.0, 0.3, 0.4, -0.2, 0.1),
                independent=("H", "I81"), commuting=("H", "I81"))


@_register("V28_b0", "Class II", [_func("F1", "square"), _func("F2", "0.25*quartic")],
           "Class II integrable: V28 with b0 = 0, V = F1(y + x) + F2(y - x)",
           summary="separable along the diagonals")
def _v28_b0(F1, F2):
    pot = PotentialSpec("V28_b0", lambda X, Y: F1(Y + X) + F2(Y - X), {"F1": F1, "F2": F2},
                        dist_min(_line_poles(F1, 1.0), _line_poles(F2, -1.0)))
    fis = (hamiltonian(pot),
           FI("I82", T(quad=lambda X, Y: (0.0, 0.5, 0.0), scalar=lambda X, Y: F1(Y + X) - F2(Y - X))))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "I82"),),
                classification="integrable", ics=State(0.0, 0.3, 0.4, -0.2, 0.1),
                independent=("H", "I82"), commuting=("H", "I82"))


# --- Class II superintegrable -----------------------------------------------

def _i72(which, k, c):
    """Quadratic FI with t^2 terms for an inverse-square wall at q = -c (which = 'a': y, 'b': x)."""
    if which == "a":
        quad = lambda X, Y: (0.0, 0.0, -0.5)
        lin = lambda X, Y: (0.0 * X, Y + c)
        wall = lambda X, Y: -k / ((Y + c) * (Y + c))
        rest = lambda X, Y: -0.5 * Y * Y - c * Y
        name = "I72a"
    else:
        quad = lambda X, Y: (-0.5, 0.0, 0.0)
        lin = lambda X, Y: (X + c, 0.0 * X)
        wall = lambda X, Y: -k / ((X + c) * (X + c))
        rest = lambda X, Y: -0.5 * X * X - c * X
        name = "I72b"
    return FI(name, T(quad=quad, scalar=wall, power=2), T(lin=lin, power=1), T(scalar=rest))


def _i73(which, lam, k, c):
    """exp(lambda t) FI of the inverted oscillator with an inverse-square wall."""
    if which == "a":
        quad = lambda X, Y: (-1.0, 0.0, 0.0)
        lin = lambda X, Y: (lam * (X + c), 0.0 * X)
        sc = lambda X, Y: -0.25 * lam * lam * (X + c) * (X + c) + 2.0 * k / ((X + c) * (X + c))
        name = "I73a"
    else:
        quad = lambda X, Y: (0.0, 0.0, -1.0)
        lin = lambda X, Y: (0.0 * X, lam * (Y + c))
        sc = lambda X, Y: -0.25 * lam * lam * (Y + c) * (Y + c) + 2.0 * k / ((Y + c) * (Y + c))
        name = "I73b"
    return FI(name, T(quad=quad, lin=lin, scalar=sc, rate=lam))


@_register("Vs1", "Class II", [_real("k", 1.0), _real("b", 0.1), _real("c", 0.1)],
           "Class II superintegrable: Vs1 = k (x^2 + y^2)/2 + b/x^2 + c/y^2",
           summary="isotropic oscillator with two inverse-square walls")
def _vs1(k, b, c):
    def V(X, Y):
        return 0.5 * k * (X * X + Y * Y) + b / (X * X) + c / (Y * Y)

    dists = []
    if b != 0:
        dists.append(dist_line_x(0.0))
    if c != 0:
        dists.append(dist_line_y(0.0))
    pot = PotentialSpec("Vs1", V, {"k": k, "b": b, "c": c}, dist_min(*dists))
    fis = [hamiltonian(pot),
           FI("Is1a", T(quad=_angular, scalar=lambda X, Y: 2.0 * b * Y * Y / (X * X) + 2.0 * c * X * X / (Y * Y))),
           FI("Is1b", T(quad=_half_x, scalar=lambda X, Y: 0.5 * k * X * X + b / (X * X))),
           FI("Is1c", T(quad=_half_y, scalar=lambda X, Y: 0.5 * k * Y * Y + c / (Y * Y)))]
    ids = [_ident("H", "Is1a"), _ident("H", "Is1b"), _ident("Is1b", "Is1c")]
    if k == 0:
        fis += [_i72("a", c, 0.0), _i72("b", b, 0.0)]
    elif k < 0:
        lam = 2.0 * math.sqrt(-k)
        fis += [_i73("a", lam, -b, 0.0), _i73("b", lam, -c, 0.0)]
        ids += [BracketIdentity("H", "I73a", (("I73a", lam),)), BracketIdentity("H", "I73b", (("I73b", lam),))]
    return dict(potential=pot, fis=tuple(fis), identities=tuple(ids), classification="superintegrable",
                ics=State(0.0, 1.0, 0.8, 0.2, -0.3), independent=("H", "Is1a", "Is1b"),
                commuting=("H", "Is1b"))


@_register("Vs2", "Class II", [_real("k1", 1.0), _real("k2", 0.1), _real("k3", 0.2)],
           "Class II superintegrable: Vs2 = k1 (x^2 + 4 y^2)/2 + k2/x^2 + k3 y",
           summary="1:2 anisotropic oscillator with an inverse-square wall")
def _vs2(k1, k2, k3):
    def V(X, Y):
        return 0.5 * k1 * (X * X + 4.0 * Y * Y) + k2 / (X * X) + k3 * Y

    pot = PotentialSpec("Vs2", V, {"k1": k1, "k2": k2, "k3": k3},
                        dist_line_x(0.0) if k2 != 0 else None)
    fis = (hamiltonian(pot),
           FI("Is2a", T(quad=_mixed_x,
                        scalar=lambda X, Y: -k1 * Y * X * X + 2.0 * k2 * Y / (X * X) - 0.5 * k3 * X * X)),
           FI("Is2b", T(quad=_half_x, scalar=lambda X, Y: 0.5 * k1 * X * X + k2 / (X * X))),
           FI("Is2c", T(quad=_half_y, scalar=lambda X, Y: 2.0 * k1 * Y * Y + k3 * Y)))
    return dict(potential=pot, fis=fis,
                identities=(_ident("H", "Is2a"), _ident("H", "Is2b"), _ident("Is2b", "Is2c")),
                classification="superintegrable", ics=State(0.0, 1.0, 0.2, 0.1, 0.2),
                independent=("H", "Is2a", "Is2b"), commuting=("H", "Is2b"))


@_register("Vs3", "Class II", [_real("k1", 0.5), _real("k2", -1.0), _real("k3", 0.1)],
           "Class II superintegrable: Vs3 = k1/x^2 + k2/r + k3 y/(r x^2)",
           summary="Coulomb field with an angular inverse-square term")
def _vs3(k1, k2, k3):
    def V(X, Y):
        r = ad.sqrt(X * X + Y * Y)
        return k1 / (X * X) + k2 / r + k3 * Y / (r * X * X)

    pot = PotentialSpec("Vs3", V, {"k1": k1, "k2": k2, "k3": k3}, dist_line_x(0.0))

    def ga(X, Y):
        r = ad.sqrt(X * X + Y * Y)
        return 2.0 * k1 * Y * Y / (X * X) + 2.0 * k3 * r * Y / (X * X)

    def gb(X, Y):
        r = ad.sqrt(X * X + Y * Y)
        return 2.0 * k1 * Y / (X * X) + k2 * Y / r + k3 * (X * X + 2.0 * Y * Y) / (r * X * X)

    fis = (hamiltonian(pot), FI("Is3a", T(quad=_angular, scalar=ga)), FI("Is3b", T(quad=_mixed_x, scalar=gb)))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "Is3a"), _ident("H", "Is3b")),
                classification="superintegrable", ics=State(0.0, 1.0, 0.0, 0.1, 0.9),
                independent=("H", "Is3a", "Is3b"), commuting=("H", "Is3a"))


@_register("Vs4", "Class II", [_real("k1", 1.0), _real("k2", -1.0), _real("k3", -1.0)],
           "Class II superintegrable: Vs4 = k1/r + k2 sqrt(r + y)/r + k3 sqrt(r - y)/r",
           summary="parabolic-type potential; second QFI scalar by line integration")
def _vs4(k1, k2, k3):
    from .discovery import KTParams, ReconstructedScalar

    def V(X, Y):
        r = ad.sqrt(X * X + Y * Y)
        out = k1 / r
        if k2 != 0:
            out = out + k2 * ad.sqrt(r + Y) / r
        if k3 != 0:
            out = out + k3 * ad.sqrt(r - Y) / r
        return out

    dists = [dist_origin]
    if k2 != 0:
        dists.append(_ray_distance(-1.0))
    if k3 != 0:
        dists.append(_ray_distance(1.0))
    pot = PotentialSpec("Vs4", V, {"k1": k1, "k2": k2, "k3": k3}, dist_min(*dists))

    def ga(X, Y):
        r = ad.sqrt(X * X + Y * Y)
        out = k1 * Y / r
        if k3 != 0:
            out = out + k3 * (r + Y) * ad.sqrt(r - Y) / r
        if k2 != 0:
            out = out - k2 * (r - Y) * ad.sqrt(r + Y) / r
        return out

    G = ReconstructedScalar(KTParams(beta=0.5), pot, base="half-plane")
    fis = (hamiltonian(pot), FI("Is4a", T(quad=_mixed_x, scalar=ga)), FI("Is4b", T(quad=_mixed_y, scalar=G)))
    return dict(potential=pot, fis=fis, identities=(_ident("H", "Is4a"), _ident("H", "Is4b")),
                classification="superintegrable", ics=State(0.0, 1.0, 0.1, 0.1, 0.2),
                independent=("H", "Is4a", "Is4b"), commuting=("H", "Is4a"))


def _walls(k1, c1, k2, c2):
    return dist_min(dist_line_x(-c1) if k1 != 0 else None, dist_line_y(-c2) if k2 != 0 else None)


@_register("V271", "Class II",
           [_real("k1", 0.1), _real("k2", 0.1), _real("c1", 0.5), _real("c2", 0.5)],
           "Class II superintegrable: V271 = k1/(x + c1)^2 + k2/(y + c2)^2",
           summary="two inverse-square walls")
def _v271(k1, k2, c1, c2):
    f1 = lambda X, Y: k1 / ((X + c1) * (X + c1))
    f2 = lambda X, Y: k2 / ((Y + c2) * (Y + c2))
    pot = PotentialSpec("V271", lambda X, Y: f1(X, Y) + f2(X, Y), dict(k1=k1, k2=k2, c1=c1, c2=c2),
                        _walls(k1, c1, k2, c2))
    fis = (hamiltonian(pot),
           FI("I71a", T(quad=_half_x, scalar=f1)),
           FI("I71b", T(quad=_half_y, scalar=f2)),
           _i72("a", k2, c2), _i72("b", k1, c1))
    return dict(potential=pot, fis=fis,
                identities=(_ident("H", "I71a"), _ident("I71a", "I71b"), _ident("I71a", "I72a")),
                classification="superintegrable", ics=State(0.0, 0.5, 0.4, 0.1, -0.1),
                independent=("I71a", "I71b", "I72a"), commuting=("I71a", "I71b"))


@_register("V272", "Class II", [_func("F1", "square"), _real("k2", 0.1), _real("c2", 0.5)],
           "Class II superintegrable: V272 = F1(x) + k2/(y + c2)^2",
           summary="arbitrary x motion plus an inverse-square wall in y")
def _v272(F1, k2, c2):
    f2 = lambda X, Y: k2 / ((Y + c2) * (Y + c2))
    pot = PotentialSpec("V272", lambda X, Y: F1(X) + f2(X, Y), dict(F1=F1, k2=k2, c2=c2),
                        dist_min(_fn_poles_distance(F1, "x"), _walls(0.0, 0.0, k2, c2)))
    fis = (hamiltonian(pot),
           FI("I71a", T(quad=_half_x, scalar=lambda X, Y: F1(X))),
           FI("I71b", T(quad=_half_y, scalar=f2)),
           _i72("a", k2, c2))
    return dict(potential=pot, fis=fis,
                identities=(_ident("H", "I71a"), _ident("I71a", "I71b"), _ident("I71a", "I72a")),
                classification="superintegrable", ics=State(0.0, 0.5, 0.4, 0.1, -0.1),
                independent=("I71a", "I71b", "I72a"), commuting=("I71a", "I71b"))


@_register("V273", "Class II", [_func("F2", "square"), _real("k1", 0.1), _real("c1", 0.5)],
           "Class II superintegrable: V273 = F2(y) + k1/(x + c1)^2",
           summary="arbitrary y motion plus an inverse-square wall in x")
def _v273(F2, k1, c1):
    f1 = lambda X, Y: k1 / ((X + c1) * (X + c1))
    pot = PotentialSpec("V273", lambda X, Y: F2(Y) + f1(X, Y), dict(F2=F2, k1=k1, c1=c1),
                        dist_min(_fn_poles_distance(F2, "y"), _walls(k1, c1, 0.0, 0.0)))
    fis = (hamiltonian(pot),
           FI("I71a", T(quad=_half_x, scalar=f1)),
           FI("I71b", T(quad=_half_y, scalar=lambda X, Y: F2(Y))),
           _i72("b", k1, c1))
    return dict(potential=pot, fis=fis,
                identities=(_ident("H", "I71b"), _ident("I71a", "I71b"), _ident("I71b", "I72b")),
                classification="superintegrable", ics=State(0.0, 0.4, 0.5, -0.1, 0.1),
                independent=("I71a", "I71b", "I72b"), commuting=("I71a", "I71b"))


@_register("V274", "Class II",
           [_real("lambda", 0.4, "nonzero"), _real("k1", -0.1), _real("k2", -0.1),
            _real("c1", 0.5), _real("c2", 0.5)],
           "Class II superintegrable: V274 = -lambda^2 (x^2 + y^2)/8 - lambda^2 (c1 x + c2 y)/4 - k1/(x + c1)^2 - k2/(y + c2)^2",
           summary="inverted oscillator with two inverse-square walls")
def _v274(lam, k1, k2, c1, c2):
    _require(lam != 0, "V274: lambda must be nonzero")
    l2 = lam * lam
    f1 = lambda X, Y: -0.125 * l2 * X * X - 0.25 * l2 * c1 * X - k1 / ((X + c1) * (X + c1))
    f2 = lambda X, Y: -0.125 * l2 * Y * Y - 0.25 * l2 * c2 * Y - k2 / ((Y + c2) * (Y + c2))
    pot = PotentialSpec("V274", lambda X, Y: f1(X, Y) + f2(X, Y),
                        {"lambda": lam, "k1": k1, "k2": k2, "c1": c1, "c2": c2}, _walls(k1, c1, k2, c2))
    fis = (hamiltonian(pot),
           FI("I71a", T(quad=_half_x, scalar=f1)),
           FI("I71b", T(quad=_half_y, scalar=f2)),
           _i73("a", lam, k1, c1), _i73("b", lam, k2, c2))
    ids = (_ident("H", "I71a"), _ident("I71a", "I71b"),
           BracketIdentity("H", "I73a", (("I73a", lam),)), BracketIdentity("H", "I73b", (("I73b", lam),)),
           BracketIdentity("I71a", "I73a", (("I73a", lam),)), _ident("I71b", "I73a"))
    return dict(potential=pot, fis=fis, identities=ids, classification="superintegrable",
                ics=State(0.0, 0.4, 0.3, 0.1, -0.1), independent=("I71a", "I71b", "I73a"),
                commuting=("I71a", "I71b"))


# --- public API -------------------------------------------------------------

def names():
    return list(_REGISTRY)


def definition(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise BadParams(f"unknown potential {name!r}; known: {', '.join(_REGISTRY)}") from None


def list_entries():
    """(name, classification, parameter schema) for every registered entry."""
    out = []
    for name, d in _REGISTRY.items():
        out.append((name, default_classification(name), [p.schema() for p in d.params]))
    return out


def default_classification(name):
    return instantiate(name).classification


def resolve_params(name, params=None):
    d = definition(name)
    params = dict(params or {})
    known = {p.name for p in d.params}
    unknown = sorted(set(params) - known)
    if unknown:
        raise BadParams(f"{name}: unknown parameter(s) {unknown}; expected {sorted(known)}")
    out = {}
    for p in d.params:
        out[p.name] = p.coerce(name, params.get(p.name, p.default))
    return out


def instantiate(name, params=None):
    """Build the entry ``name`` with ``params`` overriding the defaults."""
    d = definition(name)
    values = resolve_params(name, params)
    built = d.build(*values.values())
    return CatalogEntry(name=name, family=d.family, potential=built["potential"], fis=tuple(built["fis"]),
                        bracket_identities=tuple(built["identities"]),
                        classification=built["classification"], reference_ics=built["ics"],
                        independent=tuple(built["independent"]),
                        commuting=tuple(built["commuting"]) if built["commuting"] else None,
                        table_ref=d.table_ref, params=values, closed_form=d.closed_form)


def manifest():
    """JSON-ready description of the registry (the content of catalog.json)."""
    rows = []
    for name, d in _REGISTRY.items():
        e = instantiate(name)
        rows.append({
            "name": name,
            "class": d.family,
            "classification": e.classification,
            "summary": d.summary,
            "parameters": [p.schema() for p in d.params],
            "first_integrals": [{"name": I.name, "kind": I.kind, "time_dependence": I.time_dependence}
                                for I in e.fis],
            "bracket_identities": [b.describe() for b in e.bracket_identities],
            "independent_set": list(e.independent),
            "commuting_pair": list(e.commuting) if e.commuting else None,
            "closed_form": d.closed_form,
            "table_ref": d.table_ref,
        })
    return {"schema_version": 1, "entries": rows}
