import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfi_lab import catalog, fields
from qfi_lab.dynamics import (State, Trajectory, energy, integrate, read_trajectory_csv, step_rk4,
                              step_verlet)
from qfi_lab.errors import SingularApproach, SingularPoint


def pot(name, **params):
    return catalog.instantiate(name, params).potential


@pytest.mark.parametrize("step", [step_verlet, step_rk4])
def test_free_particle_step(step):
    s = step(fields.free(), State(0, 0, 0, 1, 0), 0.1)
    assert (s.t, s.x, s.y, s.vx, s.vy) == pytest.approx((0.1, 0.1, 0.0, 1.0, 0.0), abs=1e-15)


def test_inverted_oscillator_pushes_outward():
    s = step_verlet(pot("V3b", k=1), State(0, 1, 0, 0, 0), 0.01)
    assert s.x > 1.0 and s.vx > 0 and s.y == 0.0


def test_inverted_oscillator_matches_cosh():
    traj = integrate(pot("V3b", k=1), State(0, 1, 0, 0, 0), 1e-3, 10000, "verlet")
    expect = (math.exp(10) + math.exp(-10)) / 2
    assert traj.final.t == pytest.approx(10.0, abs=1e-12)
    assert abs(traj.final.x - expect) / expect <= 1e-4


def test_rk4_harmonic_energy():
    spec = pot("V3a", **{"lambda": 1.0, "b1": 0.0, "b2": 0.0})
    s0 = State(0, 1.0, 0.0, 0.0, 1.0)
    traj = integrate(spec, s0, 1e-3, 10000, "rk4")
    e = np.array([energy(spec, s) for s in traj.states])
    assert np.max(np.abs(e - e[0])) / abs(e[0]) <= 1e-9
    assert traj.final.x == pytest.approx(math.cos(10.0), abs=1e-9)


def test_verlet_and_rk4_agree_to_second_order():
    spec = pot("Vs2")
    s0 = State(0, 1.0, 0.2, 0.1, 0.2)
    for dt in (1e-2, 1e-3):
        a, b = step_verlet(spec, s0, dt), step_rk4(spec, s0, dt)
        diff = np.max(np.abs(a.as_array() - b.as_array()))
        assert diff <= 10 * dt ** 2


@pytest.mark.parametrize("name", ["Vs1", "V22", "V1b", "Vs4"])
def test_verlet_time_reversible(name):
    e = catalog.instantiate(name)
    s0 = e.reference_ics
    fwd = integrate(e.potential, s0, 1e-3, 2000, "verlet").final
    back = integrate(e.potential, State(fwd.t, fwd.x, fwd.y, -fwd.vx, -fwd.vy), 1e-3, 2000, "verlet").final
    np.testing.assert_allclose([back.x, back.y, -back.vx, -back.vy], [s0.x, s0.y, s0.vx, s0.vy],
                               rtol=0, atol=1e-10)


@given(x=st.floats(0.5, 2.0), y=st.floats(0.5, 2.0), vx=st.floats(-1, 1), vy=st.floats(-1, 1))
def test_verlet_reversible_property(x, y, vx, vy):
    spec = pot("Vs1")
    s = State(0.0, x, y, vx, vy)
    f = integrate(spec, s, 1e-3, 200, "verlet").final
    b = integrate(spec, State(0.0, f.x, f.y, -f.vx, -f.vy), 1e-3, 200, "verlet").final
    assert max(abs(b.x - x), abs(b.y - y), abs(-b.vx - vx), abs(-b.vy - vy)) <= 1e-10


def test_trajectory_shape_and_times():
    traj = integrate(pot("V27"), State(0.5, 0.3, 0.2, 0.1, 0.0), 0.01, 50, "rk4")
    assert len(traj) == 51
    assert traj.integrator == "rk4" and traj.dt == 0.01
    np.testing.assert_allclose(np.diff(traj.t), 0.01, rtol=1e-9)
    assert traj[0] == State(0.5, 0.3, 0.2, 0.1, 0.0)


def test_singular_approach_reports_last_state():
    spec = pot("Vs1", k=0.0, b=-0.5, c=0.0)  # attractive wall: falls into x = 0
    with pytest.raises(SingularApproach) as info:
        integrate(spec, State(0, 0.5, 0.3, -1.0, 0.0), 1e-3, 5000, "verlet")
    exc = info.value
    assert exc.last_state is not None and exc.last_state.x > 0
    assert spec.singular_distance(exc.last_state.x, exc.last_state.y) >= 10 * 1e-3 * 0.5
    assert len(exc.trajectory) >= 1


def test_singular_start_rejected():
    with pytest.raises(SingularPoint):
        integrate(pot("Vs1"), State(0, 0.0, 1.0, 0.1, 0.1), 1e-3, 10)


def test_step_verlet_into_singular_set():
    with pytest.raises(SingularPoint):
        # negligible force; the drift lands exactly on y = 0
        step_verlet(pot("Vs1", k=0.0, b=0.0, c=1e-300), State(0, 1.0, 0.1, 0.0, -1.0), 0.1)


@pytest.mark.parametrize("bad", [dict(dt=0.0), dict(dt=-1e-3), dict(n_steps=-1), dict(integrator="euler")])
def test_integrate_rejects_bad_arguments(bad):
    args = dict(spec=fields.free(), s0=State(0, 0, 0, 1, 0), dt=1e-3, n_steps=10, integrator="verlet")
    args.update(bad)
    with pytest.raises(ValueError):
        integrate(**args)


def test_csv_roundtrip(tmp_path):
    traj = integrate(pot("V2"), State(0, 0.5, 0.0, 0.3, 0.2), 0.1, 5)
    buf = io.StringIO()
    traj.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x,y,vx,vy"
    assert len(lines) == 7
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    back = read_trajectory_csv(path)
    np.testing.assert_array_equal(back.data, traj.data)  # %.17g is exact
