"""Checks that a catalog entry is internally consistent.

Used by the ``verify`` and ``brackets`` commands and by the acceptance tests.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import integrate
from .errors import SingularApproach
from .integrals import (drift, evaluate, flow_derivative, independence_rank, poisson_bracket,
                        random_states)

DRIFT_TOL = {"verlet": 1e-6, "rk4": 1e-8}
FLOW_TOL = 1e-10
BRACKET_TOL = 1e-9
R_MIN, R_MAX = 0.3, 3.0
TUBE = 0.1


def sample_states(spec, rng, n, t_range=(0.0, 1.0)):
    """States with positions in the annulus R_MIN <= r <= R_MAX, off a tube around the singular set."""
    def ok(x, y):
        return R_MIN <= math.hypot(x, y) <= R_MAX and spec.singular_distance(x, y) >= TUBE
    return random_states(rng, n, box=(-R_MAX, R_MAX), vbox=(-1.0, 1.0), t_range=t_range, accept=ok)


@dataclass
class EntryReport:
    name: str
    params: dict
    table_ref: str
    classification: str
    drift: dict = field(default_factory=dict)          # integrator -> {fi: drift}
    flow: dict = field(default_factory=dict)           # fi -> max relative flow derivative
    brackets: list = field(default_factory=list)       # [{identity, max_error}]
    rank: int = 0
    expected_rank: int = 0
    commuting: dict = None
    errors: list = field(default_factory=list)

    @property
    def ok(self):
        if self.errors:
            return False
        for integ, d in self.drift.items():
            if any(not (v <= DRIFT_TOL[integ]) for v in d.values()):
                return False
        if any(not (v <= FLOW_TOL) for v in self.flow.values()):
            return False
        if any(not (b["max_error"] <= BRACKET_TOL) for b in self.brackets):
            return False
        if self.rank < self.expected_rank:
            return False
        if self.commuting is not None and not (self.commuting["max_bracket"] <= BRACKET_TOL):
            return False
        return True

    def to_dict(self):
        return {
            "name": self.name,
            "params": self.params,
            "table_ref": self.table_ref,
            "classification": self.classification,
            "drift": self.drift,
            "drift_tolerance": {k: DRIFT_TOL[k] for k in self.drift},
            "flow_derivative": self.flow,
            "flow_tolerance": FLOW_TOL,
            "brackets": self.brackets,
            "bracket_tolerance": BRACKET_TOL,
            "independence_rank": self.rank,
            "expected_rank": self.expected_rank,
            "commuting_pair": self.commuting,
            "errors": self.errors,
            "ok": self.ok,
        }


def expected_rank(entry):
    return 3 if entry.classification == "superintegrable" else 2


def verify_entry(entry, integrators=("verlet",), dt=1e-3, t_end=10.0, seed=0, n_states=20):
    """Drift along the reference trajectory, flow derivatives, bracket identities and ranks."""
    from .fields import _jsonable
    rep = EntryReport(entry.name, {k: _jsonable(v) for k, v in entry.params.items()},
                      entry.table_ref, entry.classification)
    spec = entry.potential
    rng = np.random.default_rng(seed)
    states = sample_states(spec, rng, n_states)
    fis = entry.fi_map

    n = int(round((t_end - entry.reference_ics.t) / dt))
    for integ in integrators:
        try:
            traj = integrate(spec, entry.reference_ics, dt, n, integ)
        except SingularApproach as exc:
            rep.errors.append(f"{integ}: {exc}")
            continue
        rep.drift[integ] = {I.name: drift(I, traj) for I in entry.fis}

    for I in entry.fis:
        rep.flow[I.name] = max(abs(flow_derivative(I, spec, s)) / (1.0 + abs(evaluate(I, s)))
                               for s in states)

    for b in entry.bracket_identities:
        err = max(abs(b.error(fis, s)) for s in states)
        rep.brackets.append({"identity": b.describe(), "max_error": err})

    rep.rank = independence_rank([fis[n] for n in entry.independent], states)
    rep.expected_rank = expected_rank(entry)
    if entry.commuting:
        F, G = (fis[n] for n in entry.commuting)
        rep.commuting = {"pair": list(entry.commuting),
                         "max_bracket": max(abs(poisson_bracket(F, G, s)) for s in states)}
    return rep


def bracket_table(entry, seed=0, n_states=20):
    """{F, G} for every ordered pair of first integrals at seeded sample states."""
    rng = np.random.default_rng(seed)
    states = sample_states(entry.potential, rng, n_states)
    names = entry.fi_names
    fis = entry.fi_map
    values = np.zeros((len(states), len(names), len(names)))
    for k, s in enumerate(states):
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                values[k, i, j] = poisson_bracket(fis[a], fis[b], s)
    return names, states, values
