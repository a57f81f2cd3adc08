"""Acceptance checks, one per numbered criterion.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line with the measured
value next to its tolerance, then asserts.  Run with ``pytest -v -s`` or
directly with ``python tests/test_acceptance.py``.
"""
import sys
import time

import numpy as np
import pytest

from orthoglide import _plant
from orthoglide import config as C
from orthoglide import dynamics as dyn
from orthoglide import experiments as E
from orthoglide import kinematics as kin
from orthoglide import trajectory as tr
from orthoglide.control import ControllerKind
from orthoglide.params import MachineParams
from orthoglide.simulator import SimConfig, compute_metrics, run_simulation

P = MachineParams()
G = P.geom
SEED = 20240


def report(n, ok, detail, capsys=None):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _states(rng, n, speed=0.5, accel=5.0):
    return [dyn.CartesianState(x, rng.uniform(-speed, speed, 3), rng.uniform(-accel, accel, 3))
            for x in kin.sample_poses(rng, n, G)]


# -- 1 ------------------------------------------------------------------------

def test_criterion_01_kinematic_roundtrip(capsys):
    poses = kin.sample_poses(np.random.default_rng(SEED), 1000, G)
    t0 = time.perf_counter()
    err = max(np.linalg.norm(kin.forward_kinematics(kin.inverse_kinematics(x, G), G) - x)
              for x in poses)
    elapsed = time.perf_counter() - t0
    ok = err < 1e-9 and elapsed < 1.0
    report(1, ok, f"max |FK(IK(X)) - X| = {err:.2e} m (< 1e-9) over 1000 poses in "
                  f"{elapsed:.3f} s (< 1 s)", capsys)
    assert ok


# -- 2 ------------------------------------------------------------------------

def _fd_dinv(x, h=1e-6):
    cols = [(kin.inverse_kinematics(x + h * e, G) - kin.inverse_kinematics(x - h * e, G)) / (2 * h)
            for e in np.eye(3)]
    return np.stack(cols, axis=1)


def test_criterion_02_jacobian_oracle(capsys):
    poses = kin.sample_poses(np.random.default_rng(SEED + 2), 200, G)
    rel, row = 0.0, 0.0
    for x in poses:
        d = kin.d_inv(x, G)
        rel = max(rel, np.max(np.abs(_fd_dinv(x) - d)) / np.max(np.abs(d)))
        for i in range(3):
            row = max(row, np.max(np.abs(kin.leg_jacobian_inv(x, G, i + 1)[0] - d[i])))
    ok = rel < 1e-5 and row < 1e-12
    report(2, ok, f"d_inv vs central differences max rel {rel:.2e} (< 1e-5); "
                  f"leg row 1 vs d_inv row max {row:.2e} (< 1e-12)", capsys)
    assert ok


# -- 3 ------------------------------------------------------------------------

def test_criterion_03_trig_identities(capsys):
    worst = 0.0
    for x in kin.sample_poses(np.random.default_rng(SEED + 3), 1000, G):
        t = kin.passive_trig(x, G)
        for s, c in ((t.s2, t.c2), (t.s3, t.c3)):
            worst = max(worst, np.max(np.abs(s * s + c * c - 1)))
    ok = worst < 1e-12
    report(3, ok, f"max |s^2 + c^2 - 1| = {worst:.2e} (< 1e-12) over 6 pairs x 1000 poses", capsys)
    assert ok


# -- 4 ------------------------------------------------------------------------

def test_criterion_04_scheme_equivalence(capsys):
    worst = 0.0
    for s in _states(np.random.default_rng(SEED + 4), 100):
        q = kin.inverse_kinematics(s.pose, G)
        qd, qdd = kin.global_rates_accels(s.pose, s.vel, s.acc, G)
        g1 = dyn.inverse_dynamics_joint(q, qd, qdd, P)
        g2 = dyn.inverse_dynamics_cartesian(s, P)
        worst = max(worst, np.linalg.norm(g1 - g2) / np.linalg.norm(g2))
    ok = worst < 1e-8
    report(4, ok, f"joint-space vs Cartesian inverse dynamics max rel {worst:.2e} (< 1e-8)", capsys)
    assert ok


# -- 5 ------------------------------------------------------------------------

def test_criterion_05_dynamics_roundtrip(capsys):
    rng = np.random.default_rng(SEED + 5)
    rt = 0.0
    for s in _states(rng, 100):
        back = dyn.forward_dynamics(s.pose, s.vel, dyn.inverse_dynamics_cartesian(s, P), P)
        rt = max(rt, np.linalg.norm(back - s.acc) / np.linalg.norm(s.acc))
    sym, eig = 0.0, np.inf
    for x in kin.sample_poses(rng, 100, G):
        a = dyn.cartesian_mass_matrix(x, P)
        sym = max(sym, np.linalg.norm(a - a.T) / np.linalg.norm(a))
        eig = min(eig, np.min(np.linalg.eigvalsh(0.5 * (a + a.T))))
    ok = rt < 1e-8 and sym < 1e-9 and eig > 0
    report(5, ok, f"acc roundtrip max rel {rt:.2e} (< 1e-8); mass matrix asymmetry {sym:.2e} "
                  f"(< 1e-9), min eigenvalue {eig:.3f} kg (> 0)", capsys)
    assert ok


# -- 6 ------------------------------------------------------------------------

def test_criterion_06_energy(capsys):
    p = P.with_dyn(gravity=(0.0, 0.0, 0.0))
    rng = np.random.default_rng(SEED + 6)
    x0 = G.home + rng.uniform(-0.02, 0.02, 3)
    v0 = rng.uniform(-0.1, 0.1, 3)
    x, v, _, alive = _plant.rk4_hold(x0, v0, np.zeros(3), _plant.pack(p), 1e-4, 5000)
    e0 = dyn.mechanical_energy(x0, v0, p)
    drift = abs(dyn.mechanical_energy(x, v, p) - e0) / e0
    ok = bool(alive) and drift < 1e-5
    report(6, ok, f"|dE|/E0 = {drift:.2e} (< 1e-5) after 0.5 s free motion at dt = 1e-4 s", capsys)
    assert ok


# -- 7 ------------------------------------------------------------------------

def _peak(path, key, n=20001):
    return max(np.linalg.norm(getattr(path.sample(t), key)) for t in np.linspace(0, path.duration, n))


def test_criterion_07_quintic(capsys):
    T = 0.4
    bc = tr.quintic(0.0, T) == (0.0, 0.0, 0.0) and tr.quintic(T, T) == (1.0, 0.0, 0.0)
    acc = {k: _peak(tr.make_path(tr.PathSpec(k, 0.05, accel_limit=3.0), G), "acc")
           for k in ("square", "circle")}
    bounded = all(a <= 3.0 * (1 + 1e-6) for a in acc.values())
    circ = tr.make_path(tr.PathSpec("circle", 0.06, accel_limit=3.0, speed_limit=0.2), G)
    vmax, amax = _peak(circ, "vel"), _peak(circ, "acc")
    active = vmax <= 0.2 * (1 + 1e-6) and (abs(vmax / 0.2 - 1) < 0.01 or abs(amax / 3 - 1) < 0.01)
    ok = bc and bounded and active
    report(7, ok, f"boundary conditions exact: {bc}; peak acc square {acc['square']:.7f}, "
                  f"circle {acc['circle']:.7f} m/s^2 (<= 3); 60 mm circle peak speed "
                  f"{vmax:.4f} m/s, peak acc {amax:.4f} m/s^2 (one bound active within 1%)", capsys)
    assert ok


# -- 8 ------------------------------------------------------------------------

def test_criterion_08_perfect_information(capsys):
    path = tr.make_path(tr.PathSpec("circle", 0.06, accel_limit=3.0), G)
    t0 = time.perf_counter()
    log = run_simulation(SimConfig(controller=ControllerKind.VISION_CTC, ideal_sensing=True), path)
    elapsed = time.perf_counter() - t0
    err = compute_metrics(log).max_error
    ok = err < 1e-6 and elapsed < 60
    report(8, ok, f"vision CTC max tracking error {err * 1e6:.3f} um (< 1 um) in "
                  f"{elapsed:.1f} s (< 60 s)", capsys)
    assert ok


# -- 9 ------------------------------------------------------------------------

def test_criterion_09_sensor_calibration(capsys):
    rows, vision = E.sensor_characterization(C.load())
    d = [r.dynamic_error for r in rows]
    s = rows[0].static_error
    increasing = all(b > a for a, b in zip(d, d[1:]))
    ok = increasing and abs(s / 198e-6 - 1) < 0.05 and abs(d[0] - 286e-6) < 1e-9
    report(9, ok, "dynamic error " + ", ".join(f"{x * 1e6:.1f}" for x in d)
                  + f" um at {', '.join(f'{r.acceleration:g}' for r in rows)} m/s^2 "
                  f"(strictly increasing: {increasing}); static {s * 1e6:.1f} um "
                  f"(198 um +- 5%)", capsys)
    assert ok


# -- 10 and 11 -------------------------------------------------------------------

_GRID = {}


def _grid():
    if "first" not in _GRID:
        cp = C.load()
        t0 = time.perf_counter()
        records, summaries = E.run_grid(cp, jobs=4)
        _GRID["elapsed"] = time.perf_counter() - t0
        _GRID["first"] = (E.grid_csv(summaries), E.runs_csv(records))
        _GRID["cells"] = {(s.cell.controller, s.cell.accuracy, s.cell.identification): s
                          for s in summaries if s.cell.path == "square_50mm"}
    return _GRID


def _not_worse(a, b):
    return a.static <= b.static and a.dynamic <= b.dynamic


def test_criterion_10_controller_ordering(capsys):
    g = _grid()
    c = g["cells"]
    K = ControllerKind
    # 10 um on both sides: vision at the fine level, encoders at the coarse level
    vis, single = c[K.VISION_CTC, "fine", "classical"], c[K.SINGLE_AXIS, "coarse", "classical"]
    a = vis.static < single.static and vis.dynamic < single.dynamic
    si, di = 100 * (1 - vis.static / single.static), 100 * (1 - vis.dynamic / single.dynamic)
    b = si >= 20 and di >= 30
    c_parts = []
    for acc in ("coarse", "fine"):
        cart, joint = c[K.CARTESIAN_CTC_FKM, acc, "classical"], c[K.JOINT_CTC, acc, "classical"]
        c_parts.append((acc, _not_worse(cart, joint), cart.static - joint.static,
                        cart.dynamic - joint.dynamic))
    cc = all(p[1] for p in c_parts)
    d_bad = []
    for kind in (K.JOINT_CTC, K.CARTESIAN_CTC_FKM, K.VISION_CTC):
        for acc in ("coarse", "fine"):
            cl, ac = c[kind, acc, "classical"], c[kind, acc, "accurate"]
            for name in ("static", "dynamic"):
                noise = 2 * max(getattr(cl, name + "_std"), getattr(ac, name + "_std"))
                if getattr(ac, name) - getattr(cl, name) > noise:
                    d_bad.append(f"{kind.value}/{acc}/{name}")
    d = not d_bad
    fast = g["elapsed"] < 600
    ok = a and b and cc and d and fast
    cdesc = "; ".join(f"{acc} {'ok' if good else 'worse'} (static {ds * 1e6:+.3f} um, "
                      f"dynamic {dd * 1e6:+.3f} um)" for acc, good, ds, dd in c_parts)
    report(10, ok, f"(a) vision {vis.static * 1e6:.1f}/{vis.dynamic * 1e6:.1f} um vs single axis "
                   f"{single.static * 1e6:.1f}/{single.dynamic * 1e6:.1f} um: {a}; "
                   f"(b) improvement static {si:.1f}% (>= 20), dynamic {di:.1f}% (>= 30): {b}; "
                   f"(c) Cartesian minus joint CTC: {cdesc}: {cc}; "
                   f"(d) degraded beyond 2 std: {d_bad or 'none'}: {d}; "
                   f"grid runtime {g['elapsed']:.0f} s at jobs=4 (< 600 s)", capsys)
    assert ok


def test_criterion_11_determinism(capsys):
    first = _grid()["first"]
    records, summaries = E.run_grid(C.load(), jobs=4)
    again = (E.grid_csv(summaries), E.runs_csv(records))
    ok = again == first
    report(11, ok, f"repeated grid CSVs byte-identical: {ok} "
                   f"({len(first[0].encode())} + {len(first[1].encode())} bytes)", capsys)
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for fn in tests:
        try:
            fn(None)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
