import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfi_lab import catalog
from qfi_lab.dynamics import State, integrate
from qfi_lab.integrals import (FirstIntegral, TimeTerm, bracket_gradient, combine, drift, evaluate,
                               expand, flow_derivative, hamiltonian, independence_rank,
                               jacobi_residual, noether_readout, phase_gradient, poisson_bracket,
                               write_trace_csv)

from conftest import ALL_ENTRIES, states_for

real = st.floats(-2.0, 2.0)


def inst(name, **params):
    return catalog.instantiate(name, params)


# --- evaluation ---------------------------------------------------------------

def test_angular_momentum_value():
    I = inst("V3b", k=1).fi("L41b")
    assert evaluate(I, State(0, 1, 0, 0, 1)) == -1.0


def test_energy_at_rest_at_origin():
    e = inst("V1a", c=1, **{"lambda": 1})
    assert evaluate(e.fi("H"), State(0, 0, 0, 0, 0)) == 0.0


def test_exponential_lfi_value():
    I = inst("V1b", **{"lambda": 1.0}).fi("L23")
    assert evaluate(I, State(1.0, 0.0, 2.0, 0.0, 3.0)) == pytest.approx(math.e, rel=1e-15)


def test_kinds_and_time_dependence():
    e = inst("V1b")
    assert e.fi("H").kind == "QFI" and e.fi("H").time_dependence == "autonomous"
    assert e.fi("L22").kind == "LFI" and e.fi("L22").time_dependence == "polynomial"
    assert e.fi("L23").time_dependence == "exponential"


def test_time_term_validation():
    with pytest.raises(ValueError):
        TimeTerm(rate=0.0)
    with pytest.raises(ValueError):
        TimeTerm(power=-1)
    with pytest.raises(ValueError):
        FirstIntegral("empty", ())


# --- flow derivative ------------------------------------------------------------

@pytest.mark.parametrize("name", ALL_ENTRIES)
def test_energy_flow_derivative_vanishes(name):
    e = catalog.instantiate(name)
    for s in states_for(e.potential, 20, seed=11):
        assert abs(flow_derivative(e.fi("H"), e.potential, s)) <= 1e-12 * (1 + abs(evaluate(e.fi("H"), s)))


@given(c=real, lam=real, x=real, y=real, vx=real, vy=real, t=real)
def test_l11_flow_derivative_exact(c, lam, x, y, vx, vy, t):
    e = inst("V1a", c=c, **{"lambda": lam})
    assert flow_derivative(e.fi("L11"), e.potential, State(t, x, y, vx, vy)) == 0.0


def test_wrong_integral_detected():
    e = inst("Vs2")
    spec = e.potential
    wrong = FirstIntegral("H2V", (TimeTerm(quad=lambda X, Y: (0.5, 0.0, 0.5),
                                           scalar=lambda X, Y: 2.0 * spec.func(X, Y)),))
    vals = [abs(flow_derivative(wrong, spec, s)) for s in states_for(spec, 10)]
    assert max(vals) > 1e-3


@pytest.mark.parametrize("name", ALL_ENTRIES)
def test_flow_derivative_equals_time_part_plus_bracket(name):
    e = catalog.instantiate(name)
    H = e.fi("H")
    for s in states_for(e.potential, 10, seed=5):
        for I in e.fis:
            It, _ = phase_gradient(I, s)
            a = flow_derivative(I, e.potential, s)
            b = It + poisson_bracket(I, H, s)
            assert abs(a - b) <= 1e-10 * (1 + abs(It))


def test_gradient_matches_finite_differences():
    e = inst("V3a")
    I = e.fi("Q43")
    s = State(0.3, 0.7, -0.4, 0.2, 0.5)
    g = expand(I, s).grad
    h = 1e-6
    fd = []
    for k in range(4):
        d = np.zeros(5)
        d[k + 1] = h
        up = State.from_array(s.as_array() + d)
        dn = State.from_array(s.as_array() - d)
        fd.append((evaluate(I, up) - evaluate(I, dn)) / (2 * h))
    np.testing.assert_allclose(g, fd, rtol=1e-7, atol=1e-9)


def test_bracket_gradient_matches_finite_differences():
    e = inst("V1a")
    F, G = e.fi("I2"), e.fi("Q12")
    s = State(0.0, 0.4, 0.6, -0.3, 0.8)
    g = bracket_gradient(F, G, s)
    h = 1e-6
    for k in range(4):
        d = np.zeros(5)
        d[k + 1] = h
        up = poisson_bracket(F, G, State.from_array(s.as_array() + d))
        dn = poisson_bracket(F, G, State.from_array(s.as_array() - d))
        assert g[k] == pytest.approx((up - dn) / (2 * h), abs=1e-8)


# --- brackets -----------------------------------------------------------------------

@given(b=st.floats(-3, 3), c=real, x=real, y=real, vx=real, vy=real, t=real)
def test_l21_l22_bracket(b, c, x, y, vx, vy, t):
    e = inst("V1", b=b, c=c)
    v = poisson_bracket(e.fi("L21"), e.fi("L22"), State(t, x, y, vx, vy))
    assert v == pytest.approx(1 + b * b, abs=1e-12 * (1 + b * b))


@given(c=real, lam=real, x=real, y=real, vx=real, vy=real)
def test_i2_i3_bracket(c, lam, x, y, vx, vy):
    e = inst("V1a", c=c, **{"lambda": lam})
    assert poisson_bracket(e.fi("I2"), e.fi("I3"), State(0, x, y, vx, vy)) == pytest.approx(-c * lam, abs=1e-12)


def test_v3a_l41_q41_identity():
    e = inst("V3a", **{"lambda": 0.7, "b1": 0.4, "b2": -1.1})
    lam, b1, b2 = 0.7, 0.4, -1.1
    for s in states_for(e.potential, 20, seed=3):
        val = poisson_bracket(e.fi("L41"), e.fi("Q41"), s) + evaluate(e.fi("Q43"), s) - lam * b1 * b2
        assert abs(val) <= 1e-9


def test_h_l22_equals_l21():
    e = inst("V1")
    for s in states_for(e.potential, 20, seed=4):
        assert poisson_bracket(e.fi("H"), e.fi("L22"), s) == pytest.approx(evaluate(e.fi("L21"), s), abs=1e-12)


@pytest.mark.parametrize("name", ["V3a", "V1", "Vs1", "V274", "V22", "Vs4"])
def test_antisymmetry(name):
    e = catalog.instantiate(name)
    for s in states_for(e.potential, 5, seed=8):
        for F in e.fis:
            for G in e.fis:
                assert poisson_bracket(F, G, s) + poisson_bracket(G, F, s) == pytest.approx(0.0, abs=1e-13)


@given(a=real, b=real, seed=st.integers(0, 1000))
def test_bilinearity(a, b, seed):
    e = inst("V3a")
    F, G, K = e.fi("L41"), e.fi("Q41"), e.fi("Q43")
    s = states_for(e.potential, 1, seed=seed)[0]
    lhs = poisson_bracket(F, combine("aG+bK", [(a, G), (b, K)]), s)
    rhs = a * poisson_bracket(F, G, s) + b * poisson_bracket(F, K, s)
    assert lhs == pytest.approx(rhs, abs=1e-11)


@pytest.mark.parametrize("name", ["V3a", "V1", "V1b", "Vs1", "V274", "V28", "Vs3", "V3b"])
def test_jacobi_identity(name):
    e = catalog.instantiate(name)
    fis = e.fis[:4]
    for s in states_for(e.potential, 5, seed=9):
        for i in range(len(fis)):
            for j in range(i + 1, len(fis)):
                for k in range(j + 1, len(fis)):
                    assert abs(jacobi_residual(fis[i], fis[j], fis[k], s)) <= 1e-9


# --- independence -----------------------------------------------------------------------

def test_rank_v1a():
    e = inst("V1a")
    assert independence_rank([e.fi(n) for n in ("H", "I2", "I3")], states_for(e.potential, 5)) == 3


def test_rank_dependent_pair():
    e = inst("V1a")
    H = e.fi("H")
    assert independence_rank([H, H.scaled(2.0)], states_for(e.potential, 5)) == 1


def test_rank_v2():
    e = inst("V2")
    assert independence_rank([e.fi(n) for n in ("Q31", "Q32", "L31")], states_for(e.potential, 5)) == 3


# --- Noether readout -----------------------------------------------------------------

def test_noether_energy():
    e = inst("Vs2")
    nd = noether_readout(e.fi("H"))
    s = State(0.0, 0.8, 0.5, 0.3, -0.7)
    np.testing.assert_allclose(nd.eta(s), [-0.15, 0.35])
    assert nd.gauge(s) == pytest.approx(e.potential.value(0.8, 0.5), rel=1e-15)


def test_noether_l11():
    e = inst("V1a", c=0.3)
    nd = noether_readout(e.fi("L11"))
    s = State(2.0, 0.1, 0.2, 0.3, 0.4)
    np.testing.assert_allclose(nd.eta(s), [-1.0, 0.0])
    assert nd.gauge(s) == pytest.approx(0.6)


@pytest.mark.parametrize("name", ["V3b", "V1", "V274", "Vs1", "V22"])
def test_noether_reconstruction(name):
    e = catalog.instantiate(name)
    for s in states_for(e.potential, 20, seed=12):
        for I in e.fis:
            nd = noether_readout(I)
            assert nd.reconstruct(s) == pytest.approx(evaluate(I, s), rel=1e-13, abs=1e-13)


# --- traces --------------------------------------------------------------------------

def test_trace_csv_and_drift():
    e = inst("V3a")
    traj = integrate(e.potential, e.reference_ics, 1e-2, 100, "rk4")
    buf = io.StringIO()
    write_trace_csv(buf, traj, e.fis)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t," + ",".join(e.fi_names)
    assert len(lines) == 102
    assert drift(hamiltonian(e.potential), traj) < 1e-8
