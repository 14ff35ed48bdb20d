import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qfi_lab import catalog
from qfi_lab.dynamics import State
from qfi_lab.verification import sample_states

settings.register_profile("qfi", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "qfi"))

ALL_ENTRIES = catalog.names()


@pytest.fixture(scope="session")
def entries():
    return {n: catalog.instantiate(n) for n in ALL_ENTRIES}


def states_for(spec, n=20, seed=0, t_range=(0.0, 1.0)):
    return sample_states(spec, np.random.default_rng(seed), n, t_range)


def annulus_points(spec, n, seed=0, tube=0.1):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        x, y = rng.uniform(-3, 3, size=2)
        if 0.3 <= math.hypot(x, y) <= 3 and spec.singular_distance(x, y) >= tube:
            out.append((float(x), float(y)))
    return out


def at(t=0.0, x=0.0, y=0.0, vx=0.0, vy=0.0):
    return State(t, x, y, vx, vy)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def report_criterion(number, title, ok, detail):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
