import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfi_lab import catalog
from qfi_lab.dynamics import State
from qfi_lab.errors import QuadratureDomain
from qfi_lab.solutions import SOLVABLE, Motion1D, closed_form_solution, compare

TOL = 1e-4


def test_v3b_exponential_example():
    e = catalog.instantiate("V3b", {"k": 1.0})
    cf = closed_form_solution(e, State(0.0, 1.0, 0.0, 1.0, 0.0))
    assert cf.constants["c1+"] == pytest.approx(0.0, abs=1e-15)
    assert cf.constants["c1-"] == pytest.approx(2.0, rel=1e-15)
    x, y = cf(1.0)
    assert float(x) == pytest.approx(math.e, rel=1e-14)
    assert float(y) == pytest.approx(0.0, abs=1e-15)


def test_v3b_constants_are_the_integrals():
    e = catalog.instantiate("V3b", {"k": 0.7})
    s0 = State(0.3, 0.2, -0.4, 0.5, 0.1)
    cf = closed_form_solution(e, s0)
    assert cf.constants["c2-"] == e.fi("L43-")(s0)
    x, y = cf(s0.t)
    assert float(x) == pytest.approx(s0.x, abs=1e-14)
    assert float(y) == pytest.approx(s0.y, abs=1e-14)


def test_v2_at_rest_in_x():
    e = catalog.instantiate("V2", {"c": 0.0})
    cf = closed_form_solution(e, State(0.0, 0.0, 1.0, 0.0, 0.5))
    assert cf.constants["x_motion"] == "equilibrium"
    t = np.linspace(0, 5, 11)
    x, y = cf(t)
    np.testing.assert_allclose(x, 0.0, atol=0)
    np.testing.assert_allclose(y, 1.0 + 0.5 * t, rtol=1e-14)


def test_v27_harmonic():
    e = catalog.instantiate("V27", {"F1": "square", "F2": "square"})
    s0 = State(0.0, 0.8, -0.3, 0.2, 0.6)
    cf = closed_form_solution(e, s0)
    t = np.linspace(0.0, 7.0, 57)
    x, y = cf(t)
    np.testing.assert_allclose(x, 0.8 * np.cos(t) + 0.2 * np.sin(t), atol=1e-6)
    np.testing.assert_allclose(y, -0.3 * np.cos(t) + 0.6 * np.sin(t), atol=1e-6)


@pytest.mark.parametrize("name", SOLVABLE)
def test_matches_numerical_integration(name):
    cmp = compare(catalog.instantiate(name), t_end=5.0)
    assert cmp.rel_error <= TOL
    assert cmp.t[0] == 0.0 and cmp.t[-1] == pytest.approx(5.0)
    assert cmp.rows().shape == (len(cmp.t), 5)


# velocities are either exactly zero or of physical size; sub-1e-3 speeds give
# wells so narrow that the error normalisation by max|numeric| is meaningless
speed = st.just(0.0) | st.floats(1e-3, 1.0) | st.floats(-1.0, -1e-3)


@settings(max_examples=8)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), speed, speed)
def test_v27_random_states_match_integration(x, y, vx, vy):
    e = catalog.instantiate("V27")
    cmp = compare(e, State(0.0, x, y, vx, vy), t_end=3.0)
    assert cmp.rel_error <= TOL


@settings(max_examples=20)
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.0, 2.0))
def test_closed_form_starts_at_initial_state(x, vx, t0):
    e = catalog.instantiate("V2")
    s0 = State(t0, x, 0.5, vx, -0.2)
    cx, cy = closed_form_solution(e, s0)(t0)
    assert float(cx) == pytest.approx(x, abs=1e-9)
    assert float(cy) == pytest.approx(0.5, abs=1e-12)


def test_underflowing_kinetic_energy_is_rest():
    m = Motion1D(lambda u: 0.25 * u ** 4, lambda u: u ** 3, 0.0, 0.0, 2e-173)
    assert m.kind == "equilibrium"
    assert m(3.0) == 0.0


def test_tiny_oscillation():
    m = Motion1D(lambda u: 0.5 * u * u, lambda u: u, 0.0, 1e-6, 0.0)
    assert m.kind == "periodic"
    assert m(1.0) == pytest.approx(1e-6 * math.cos(1.0), rel=1e-9)


def test_separatrix_motion():
    # x'' = x with zero energy: x = e^{-t} approaches the top of the hill in infinite time
    m = Motion1D(lambda u: -0.5 * u * u, lambda u: -u, 0.0, 1.0, -1.0)
    assert m.kind == "monotone"
    assert m(1.0) == pytest.approx(math.exp(-1.0), rel=1e-9)


def test_fall_into_pole():
    e = catalog.instantiate("V27", {"F1": "-1*inv_square"})
    with pytest.raises(QuadratureDomain):
        closed_form_solution(e, State(0.0, 1.0, 0.5, 0.0, 0.0))


def test_finite_time_escape():
    with pytest.raises(QuadratureDomain):
        Motion1D(lambda u: -u ** 4, lambda u: -4 * u ** 3, 0.0, 1.0, 1.0)(5.0)


def test_unsupported_entry():
    with pytest.raises(ValueError):
        closed_form_solution(catalog.instantiate("V1"))
