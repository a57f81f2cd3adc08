"""Self-checking invariant suites used by ``orthoglide verify``.

Each check compares a computed quantity with an independent oracle
(finite differences, a second formulation, a conservation law) and
reports the worst observed defect against its tolerance.
"""
from dataclasses import dataclass

import numpy as np

from . import _plant
from . import dynamics as dyn
from . import kinematics as kin
from .params import MachineParams

SUITES = ("kinematics", "jacobian", "dynamics", "energy")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value < self.tolerance)


@dataclass(frozen=True)
class Faults:
    """Test hook: perturb ``d4`` of the model used on one side of a roundtrip."""
    d4_offset: float = 0.0

    def corrupt(self, p):
        if not self.d4_offset:
            return p
        return p.with_geom(d4=p.geom.d4 + self.d4_offset)


def kinematics_suite(p, rng, faults=Faults(), n=1000):
    geom = p.geom
    fk_geom = faults.corrupt(p).geom
    poses = kin.sample_poses(rng, n, geom)
    worst = 0.0
    for x in poses:
        worst = max(worst, np.linalg.norm(kin.forward_kinematics(kin.inverse_kinematics(x, geom), fk_geom) - x))
    trig = 0.0
    for x in poses:
        tr = kin.passive_trig(x, geom)
        for s, c in tr.pairs():
            trig = max(trig, np.max(np.abs(s ** 2 + c ** 2 - 1.0)))
    return [Check("kinematics", "fk(ik(x)) roundtrip [m]", worst, 1e-9),
            Check("kinematics", "passive trig s^2+c^2-1", trig, 1e-12)]


def _fd_dinv(x, geom, h=1e-6):
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        cols.append((kin.inverse_kinematics(x + e, geom) - kin.inverse_kinematics(x - e, geom)) / (2 * h))
    return np.array(cols).T


def jacobian_suite(p, rng, faults=Faults(), n=200):
    geom = p.geom
    poses = kin.sample_poses(rng, n, geom)
    rel = row = leg = 0.0
    for x in poses:
        m = kin.d_inv(x, faults.corrupt(p).geom)
        rel = max(rel, np.max(np.abs(_fd_dinv(x, geom) - m)) / np.max(np.abs(m)))
        for i in (1, 2, 3):
            j = kin.leg_jacobian_inv(x, geom, i)
            row = max(row, np.max(np.abs(j[0] - m[i - 1])))
            # full leg map against differences of the reconstructed joint variables
            h = 1e-6
            fd = np.array([(kin.leg_joint_variables(x + h * e, geom, i)
                            - kin.leg_joint_variables(x - h * e, geom, i)) / (2 * h) for e in np.eye(3)]).T
            leg = max(leg, np.max(np.abs(fd - j)) / np.max(np.abs(j)))
    return [Check("jacobian", "d_inv vs central differences (rel)", rel, 1e-5),
            Check("jacobian", "leg Jinv row 1 vs d_inv row", row, 1e-12),
            Check("jacobian", "leg Jinv vs central differences (rel)", leg, 1e-5)]


def random_states(rng, n, geom, speed=0.5, accel=5.0):
    poses = kin.sample_poses(rng, n, geom)
    return [dyn.CartesianState(x, rng.uniform(-speed, speed, 3), rng.uniform(-accel, accel, 3))
            for x in poses]


def dynamics_suite(p, rng, faults=Faults(), n=100):
    geom = p.geom
    other = faults.corrupt(p)
    scheme = rt = sym = 0.0
    min_eig = np.inf
    plant = 0.0
    prm = _plant.pack(p)
    for st in random_states(rng, n, geom):
        g2 = dyn.inverse_dynamics_cartesian(st, p)
        q = kin.inverse_kinematics(st.pose, geom)
        qd, qdd = kin.global_rates_accels(st.pose, st.vel, st.acc, geom)
        g1 = dyn.inverse_dynamics_joint(q, qd, qdd, p)
        scale = max(np.linalg.norm(g2), 1e-12)
        scheme = max(scheme, np.linalg.norm(g1 - g2) / scale)
        back = dyn.forward_dynamics(st.pose, st.vel, g2, other)
        rt = max(rt, np.linalg.norm(back - st.acc) / max(np.linalg.norm(st.acc), 1e-12))
        a_c = dyn.cartesian_mass_matrix(st.pose, p)
        sym = max(sym, np.max(np.abs(a_c - a_c.T)) / np.max(np.abs(a_c)))
        min_eig = min(min_eig, np.min(np.linalg.eigvalsh(0.5 * (a_c + a_c.T))))
        ref = dyn.forward_dynamics(st.pose, st.vel, g2, p)
        fast = _plant.forward_dynamics(st.pose, st.vel, g2, prm)
        plant = max(plant, np.linalg.norm(fast - ref) / max(np.linalg.norm(ref), 1e-12))
    return [Check("dynamics", "joint vs cartesian scheme (rel)", scheme, 1e-8),
            Check("dynamics", "forward(inverse(xdd)) roundtrip (rel)", rt, 1e-8),
            Check("dynamics", "A_c asymmetry (rel)", sym, 1e-9),
            Check("dynamics", "A_c positive definite (-min eig)", -min_eig, 0.0),
            Check("dynamics", "compiled plant vs reference (rel)", plant, 1e-10)]


def free_motion_drift(p, rng, duration=0.5, dt=1e-4, speed=0.1):
    """Relative energy drift of unforced, gravity-free motion."""
    p = p.with_dyn(gravity=(0.0, 0.0, 0.0))
    x0 = p.geom.home + rng.uniform(-0.02, 0.02, 3)
    v0 = rng.standard_normal(3)
    v0 *= speed / np.linalg.norm(v0)
    n = int(round(duration / dt))
    x, v, _, ok = _plant.rk4_hold(x0, v0, np.zeros(3), _plant.pack(p), dt, n)
    if not ok:
        return np.inf
    e0 = dyn.mechanical_energy(x0, v0, p)
    return abs(dyn.mechanical_energy(x, v, p) - e0) / e0


def energy_suite(p, rng, faults=Faults(), n=3):
    worst = max(free_motion_drift(faults.corrupt(p), rng) for _ in range(n))
    return [Check("energy", "free-motion |dE|/E0 over 0.5 s", worst, 1e-5)]


_RUNNERS = {"kinematics": kinematics_suite, "jacobian": jacobian_suite,
            "dynamics": dynamics_suite, "energy": energy_suite}


def run(suites=SUITES, p=None, seed=0, faults=Faults()):
    p = MachineParams() if p is None else p
    checks = []
    for name in suites:
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
        checks.extend(_RUNNERS[name](p, np.random.default_rng(seed), faults))
    return checks


def format_table(checks):
    lines = [f"{'suite':<11} {'check':<42} {'value':>11} {'tol':>9}  result"]
    for c in checks:
        lines.append(f"{c.suite:<11} {c.name:<42} {c.value:11.3e} {c.tolerance:9.1e}  "
                     f"{'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines)
