"""One-variable functions used as free ingredients of the catalog potentials.

An ``Fn`` knows its first two derivatives, so it composes with jets exactly.
Named functions can be referenced from JSON as ``"name"`` or ``"a*name"``.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ad
from .errors import BadParams


@dataclass(frozen=True)
class Fn:
    name: str
    f: Callable
    df: Callable
    d2f: Callable
    poles: tuple = ()

    def __call__(self, u):
        if ad.is_jet(u):
            v = u.v
            return u.apply(self.f(v), self.df(v), self.d2f(v))
        return self.f(u)

    def derivative(self, u):
        return self.df(u)

    def scaled(self, a):
        a = float(a)
        f, df, d2f = self.f, self.df, self.d2f
        return Fn(f"{a!r}*{self.name}",
                  lambda u: a * f(u), lambda u: a * df(u), lambda u: a * d2f(u),
                  self.poles)

    def to_json(self):
        return self.name


def _zero(u):
    return 0.0 * u


def _const(c):
    return lambda u: 0.0 * u + c


_BASE = {
    "zero": Fn("zero", _zero, _zero, _zero),
    "linear": Fn("linear", lambda u: u, _const(1.0), _zero),
    "square": Fn("square", lambda u: 0.5 * u * u, lambda u: u, _const(1.0)),
    "cube": Fn("cube", lambda u: u ** 3, lambda u: 3.0 * u * u, lambda u: 6.0 * u),
    "quartic": Fn("quartic", lambda u: u ** 4, lambda u: 4.0 * u ** 3, lambda u: 12.0 * u * u),
    "inv_square": Fn("inv_square", lambda u: 1.0 / (u * u), lambda u: -2.0 / u ** 3,
                     lambda u: 6.0 / u ** 4, poles=(0.0,)),
    "cos": Fn("cos", np.cos, lambda u: -np.sin(u), lambda u: -np.cos(u)),
    "sin": Fn("sin", np.sin, np.cos, lambda u: -np.sin(u)),
    "exp": Fn("exp", np.exp, np.exp, np.exp),
}

NAMES = tuple(sorted(_BASE))


def named(spec):
    """Resolve ``"name"`` or ``"a*name"`` (a a float literal) to an ``Fn``."""
    if isinstance(spec, Fn):
        return spec
    if not isinstance(spec, str):
        raise BadParams(f"function reference must be a string, got {spec!r}")
    text = spec.replace(" ", "")
    if "*" in text:
        coef, _, base = text.partition("*")
        try:
            a = float(coef)
        except ValueError:
            raise BadParams(f"bad coefficient in function reference {spec!r}") from None
        if base not in _BASE:
            raise BadParams(f"unknown function {base!r}; known: {', '.join(NAMES)}")
        return _BASE[base].scaled(a)
    if text not in _BASE:
        raise BadParams(f"unknown function {text!r}; known: {', '.join(NAMES)}")
    return _BASE[text]


def custom(name, f, df, d2f, poles=()):
    """Wrap user callables; they must accept floats and numpy arrays."""
    return Fn(name, f, df, d2f, tuple(poles))
