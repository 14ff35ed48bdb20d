"""Equations of motion q'' = -grad V and fixed-step integrators."""
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import SingularApproach, SingularPoint

# Abort when the distance to the singular set drops below GUARD * dt * speed.
GUARD = 10.0
INTEGRATORS = ("verlet", "rk4")


@dataclass(frozen=True)
class State:
    t: float
    x: float
    y: float
    vx: float
    vy: float

    def as_array(self):
        return np.array([self.t, self.x, self.y, self.vx, self.vy])

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))

    @property
    def position(self):
        return (self.x, self.y)

    @property
    def velocity(self):
        return (self.vx, self.vy)


class Trajectory:
    """Uniformly spaced samples; columns t, x, y, vx, vy."""

    def __init__(self, data, dt, integrator):
        self.data = np.asarray(data, dtype=float)
        self.dt = float(dt)
        self.integrator = integrator

    t = property(lambda self: self.data[:, 0])
    x = property(lambda self: self.data[:, 1])
    y = property(lambda self: self.data[:, 2])
    vx = property(lambda self: self.data[:, 3])
    vy = property(lambda self: self.data[:, 4])

    def __len__(self):
        return len(self.data)

    def __getitem__(self, i):
        return State.from_array(self.data[i])

    @property
    def states(self):
        return [State.from_array(r) for r in self.data]

    @property
    def final(self):
        return self[-1]

    def to_csv(self, path_or_file):
        _write_rows(path_or_file, ["t", "x", "y", "vx", "vy"], self.data)


def _fmt(v):
    return "%.17g" % v


def _write_rows(path_or_file, header, rows):
    if hasattr(path_or_file, "write"):
        _emit(path_or_file, header, rows)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _emit(fh, header, rows)


def _emit(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def read_trajectory_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["t", "x", "y", "vx", "vy"]:
        raise ValueError(f"unexpected trajectory header {rows[0]!r}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    dt = data[1, 0] - data[0, 0] if len(data) > 1 else 0.0
    return Trajectory(data, dt, "unknown")


def acceleration(spec, x, y):
    j = spec.jet(x, y)
    return -j.dx, -j.dy


def step_verlet(spec, s, dt):
    """One velocity-Verlet step; raises SingularPoint if the drift lands on the singular set."""
    ax, ay = acceleration(spec, s.x, s.y)
    hvx = s.vx + 0.5 * dt * ax
    hvy = s.vy + 0.5 * dt * ay
    x = s.x + dt * hvx
    y = s.y + dt * hvy
    if spec.is_singular(x, y):
        raise SingularPoint(f"Verlet drift reached the singular set at ({x!r}, {y!r})")
    ax, ay = acceleration(spec, x, y)
    return State(s.t + dt, x, y, hvx + 0.5 * dt * ax, hvy + 0.5 * dt * ay)


def step_rk4(spec, s, dt):
    """One classical fourth-order Runge-Kutta step."""
    def f(x, y, vx, vy):
        ax, ay = acceleration(spec, x, y)
        return np.array([vx, vy, ax, ay])

    z = np.array([s.x, s.y, s.vx, s.vy])
    k1 = f(*z)
    k2 = f(*(z + 0.5 * dt * k1))
    k3 = f(*(z + 0.5 * dt * k2))
    k4 = f(*(z + dt * k3))
    z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return State(s.t + dt, *(float(v) for v in z))


def integrate(spec, s0, dt, n_steps, integrator="verlet"):
    """Integrate ``n_steps`` fixed steps from ``s0``.

    Raises SingularApproach (carrying the last good state and the partial
    trajectory) when the orbit gets within GUARD * dt * speed of the singular
    set or the force stops being finite.
    """
    if integrator not in INTEGRATORS:
        raise ValueError(f"integrator must be one of {INTEGRATORS}, got {integrator!r}")
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt!r}")
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    spec.jet(s0.x, s0.y)  # rejects a singular start
    dist = spec.distance
    speed = math.hypot(s0.vx, s0.vy)
    if dist is not None and dist(s0.x, s0.y) < GUARD * dt * speed:
        raise SingularApproach("initial state already within the singular guard band", s0,
                               Trajectory(s0.as_array()[None, :], dt, integrator))
    run = ad.verlet_run if integrator == "verlet" else ad.rk4_run
    with np.errstate(all="ignore"):
        data, done, status = run(spec.force_kernel(), dist, float(s0.t), float(s0.x), float(s0.y),
                                 float(s0.vx), float(s0.vy), float(dt), n_steps, GUARD)
    traj = Trajectory(np.array(data[:done + 1]), dt, integrator)
    if status != 0:
        why = "approached the singular set" if status == 1 else "force became non-finite"
        raise SingularApproach(f"{spec.name}: integration {why} after {done} steps "
                               f"(t = {traj.final.t:.6g})", traj.final, traj)
    return traj


def integrate_to(spec, s0, dt, t_end, integrator="verlet"):
    n = int(round((t_end - s0.t) / dt))
    return integrate(spec, s0, dt, n, integrator)


def energy(spec, s):
    return 0.5 * (s.vx * s.vx + s.vy * s.vy) + spec.value(s.x, s.y)
