"""Inverse and forward dynamics of the Orthoglide.

Each leg is modelled as a three-joint serial chain: the actuated prismatic
joint carries the foot mass, then two passive revolutes carry the
parallelogram, treated as a rigid rod of length ``d4`` whose mass is lumped
half at each end (plus an optional extra second moment).  Leg generalized
forces come from a recursive Newton-Euler pass and are assembled with the
platform dynamics into actuator forces

    Gamma = D^T (F_P + sum_i Jinv_i^T H_i)

Two entry points compute the same quantity:

* :func:`inverse_dynamics_cartesian` works from the pose only, using the
  closed-form passive-joint trigonometry and leg Jacobians.
* :func:`inverse_dynamics_joint` starts from joint values, solves the
  forward kinematics, reconstructs passive angles explicitly and solves the
  leg kinematics numerically.
"""
from dataclasses import dataclass

import numpy as np

from . import kinematics as kin
from .errors import IllConditioned, NearSingular

COND_LIMIT = 1e10


@dataclass(frozen=True)
class CartesianState:
    pose: np.ndarray
    vel: np.ndarray
    acc: np.ndarray

    @classmethod
    def at_rest(cls, pose):
        return cls(np.asarray(pose, dtype=float), np.zeros(3), np.zeros(3))


def _bump(counters, key):
    if counters is not None:
        counters[key] = counters.get(key, 0) + 1


def platform_wrench(state, dyn):
    return dyn.m_platform * (np.asarray(state.acc, dtype=float) - dyn.g)


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _rnea(s2, c2, s3, c3, qd, qdd, g_local, d4, dyn):
    """Newton-Euler pass for one or many leg chains in their local frames.

    Trig arguments broadcast against ``qd[..., k]``; vectors are handled as
    component tuples to keep the batch dimension cheap.  Returns the
    generalized forces with shape ``qd.shape``.
    """
    w2, w3 = qd[..., 1], qd[..., 2]
    a1, a2, a3 = qdd[..., 0], qdd[..., 1], qdd[..., 2]
    gc, gs, ga = g_local[..., 0], g_local[..., 1], g_local[..., 2]

    u = (c3 * c2, -s3, c3 * s2)
    omega = (w3 * s2, -w2, -w3 * c2)                      # w2 z2 + w3 z3
    alpha = (a3 * s2 + w2 * w3 * c2, -a2, -a3 * c2 + w2 * w3 * s2)
    a_b = (-gc, -gs, a1 - ga)                              # base acceleration carries -g

    half = 0.5 * d4
    r = (half * u[0], half * u[1], half * u[2])
    axr = _cross(alpha, r)
    wxr = _cross(omega, r)
    wwxr = _cross(omega, wxr)
    a_com = tuple(a_b[k] + axr[k] + wwxr[k] for k in range(3))

    f = tuple(dyn.m_bar * a_com[k] for k in range(3))
    i_perp = 0.25 * dyn.m_bar * d4 * d4 + dyn.rod_inertia
    u_w = u[0] * omega[0] + u[1] * omega[1] + u[2] * omega[2]
    u_a = u[0] * alpha[0] + u[1] * alpha[1] + u[2] * alpha[2]
    i_w = tuple(i_perp * (omega[k] - u[k] * u_w) for k in range(3))
    i_a = tuple(i_perp * (alpha[k] - u[k] * u_a) for k in range(3))
    gyro = _cross(omega, i_w)
    rxf = _cross(r, f)
    n_b = tuple(i_a[k] + gyro[k] + rxf[k] for k in range(3))  # moment about the slider end

    return np.stack(np.broadcast_arrays(f[2] + dyn.m_foot * a_b[2],
                                        -n_b[1],
                                        s2 * n_b[0] - c2 * n_b[2]), axis=-1)


def leg_dynamics(leg, q_leg, qd_leg, qdd_leg, p):
    """Generalized forces ``H_i`` of leg ``leg`` (1..3) for joint state
    ``(q_i1, theta2, theta3)`` and its first two derivatives."""
    i = kin._check_leg(leg)
    q_leg = np.asarray(q_leg, dtype=float)
    th2, th3 = q_leg[1], q_leg[2]
    g_local = p.dyn.g[kin.LOCAL_AXES[i]]
    return _rnea(np.sin(th2), np.cos(th2), np.sin(th3), np.cos(th3),
                 np.asarray(qd_leg, dtype=float), np.asarray(qdd_leg, dtype=float),
                 g_local, p.geom.d4, p.dyn)


def cartesian_forces(pose, vel, accs, p):
    """Bracketed Cartesian force ``F_P + sum_i Jinv_i^T H_i`` for a batch of
    accelerations ``accs`` (shape ``(k, 3)``) at a common pose and velocity."""
    geom, dyn = p.geom, p.dyn
    accs = np.atleast_2d(np.asarray(accs, dtype=float))
    vel = np.asarray(vel, dtype=float)
    tr = kin.passive_trig(pose, geom)
    s2, c2, s3, c3 = tr.s2, tr.c2, tr.s3, tr.c3
    jinv = kin._local_jinv(s2, c2, s3, c3, geom.d4)              # (leg, 3, 3)
    v_loc = vel[kin.LOCAL_AXES]                                   # (leg, 3)
    rates = np.einsum("lij,lj->li", jinv, v_loc)
    curv = kin._rod_curvature(s2, c2, s3, c3, rates, geom.d4)
    a_loc = accs[:, kin.LOCAL_AXES]                               # (k, leg, 3)
    qdd = np.einsum("lij,klj->kli", jinv, a_loc - curv)
    g_loc = dyn.g[kin.LOCAL_AXES]
    h = _rnea(s2, c2, s3, c3, rates[None], qdd, g_loc[None], geom.d4, dyn)
    f_loc = np.einsum("lji,klj->kli", jinv, h)                    # Jinv^T H
    out = dyn.m_platform * (accs - dyn.g)
    for i in range(3):
        out[:, kin.LOCAL_AXES[i]] += f_loc[:, i]
    return out


def inverse_dynamics_cartesian(state, p, counters=None):
    """Actuator forces from the Cartesian state, using only the pose."""
    dinv = kin.d_inv(state.pose, p.geom)
    kin.check_nonsingular(dinv)
    _bump(counters, "closed_form_kinematics")
    f = cartesian_forces(state.pose, state.vel, state.acc, p)[0]
    return np.linalg.solve(dinv.T, f)


def _leg_forward_jacobian(s2, c2, s3, c3, d4):
    return np.array([[0.0, -d4 * c3 * s2, -d4 * s3 * c2],
                     [0.0, 0.0, -d4 * c3],
                     [1.0, d4 * c3 * c2, -d4 * s3 * s2]])


def inverse_dynamics_joint(q, qd, qdd, p, counters=None):
    """Actuator forces from joint-space state (forward kinematics first)."""
    geom = p.geom
    q = np.asarray(q, dtype=float)
    pose = kin.forward_kinematics(q, geom)
    _bump(counters, "forward_kinematics")
    dinv = kin.d_inv(pose, geom)
    kin.check_nonsingular(dinv)
    xd = np.linalg.solve(dinv, qd)
    xdd = np.linalg.solve(dinv, np.asarray(qdd, dtype=float) - kin.d_inv_dot_xdot(pose, xd, geom))
    _bump(counters, "linear_solves")

    shifted = pose - np.array([0.0, 0.0, geom.a])
    f = p.dyn.m_platform * (xdd - p.dyn.g)
    for i in range(3):
        axes = kin.LOCAL_AXES[i]
        rod = shifted[axes].copy()
        rod[2] -= q[i] + geom.d6 - geom.a
        th2 = np.arctan2(rod[2], rod[0])
        th3 = np.arctan2(-rod[1], np.hypot(rod[0], rod[2]))
        s2, c2, s3, c3 = np.sin(th2), np.cos(th2), np.sin(th3), np.cos(th3)
        jac = _leg_forward_jacobian(s2, c2, s3, c3, geom.d4)
        rates = np.linalg.solve(jac, xd[axes])
        curv = kin._rod_curvature(s2, c2, s3, c3, rates, geom.d4)
        accel = np.linalg.solve(jac, xdd[axes] - curv)
        h = leg_dynamics(i + 1, (q[i], th2, th3), rates, accel, p)
        f[axes] += np.linalg.solve(jac.T, h)
    return np.linalg.inv(dinv).T @ f


def cartesian_mass_matrix(pose, p):
    """Symmetric mass matrix ``A_c`` of the bracketed Cartesian force."""
    dinv = kin.d_inv(pose, p.geom)
    kin.check_nonsingular(dinv)
    f = cartesian_forces(pose, np.zeros(3), np.vstack([np.zeros(3), np.eye(3)]), p)
    return (f[1:] - f[0]).T


def mass_matrix(pose, p):
    """Actuator-side mass matrix: column k is Gamma(xddot=e_k) - Gamma(0) at rest."""
    dinv = kin.d_inv(pose, p.geom)
    kin.check_nonsingular(dinv)
    return np.linalg.solve(dinv.T, cartesian_mass_matrix(pose, p))


def forward_dynamics(pose, vel, torque, p, check_conditioning=True):
    """Platform acceleration produced by actuator forces ``torque``."""
    dinv = kin.d_inv(pose, p.geom)
    kin.check_nonsingular(dinv)
    probes = np.vstack([np.zeros(3), np.eye(3)])
    f = cartesian_forces(pose, vel, probes, p)
    bias = f[0]
    a_c = (f[1:] - bias).T
    if check_conditioning:
        cond = np.linalg.cond(np.linalg.solve(dinv.T, a_c))
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise IllConditioned(f"mass matrix condition number {cond:.3e}")
    return np.linalg.solve(a_c, dinv.T @ np.asarray(torque, dtype=float) - bias)


def lumped_positions(pose, geom):
    """World positions of the sliders (leg order) for energy bookkeeping."""
    shifted = np.asarray(pose, dtype=float) - np.array([0.0, 0.0, geom.a])
    delta = np.sqrt(kin.delta_squared(pose, geom))
    sliders = np.zeros((3, 3))
    for i in range(3):
        sliders[i, kin.A_IDX[i]] = shifted[kin.A_IDX[i]] - delta[i]
    sliders[:, 2] += geom.a
    return sliders


def mechanical_energy(pose, vel, p):
    """Kinetic plus gravitational potential energy of the whole machine."""
    vel = np.asarray(vel, dtype=float)
    pose = np.asarray(pose, dtype=float)
    try:
        a_c = cartesian_mass_matrix(pose, p)
    except kin.UnreachablePose as exc:
        raise NearSingular(str(exc)) from exc
    kinetic = 0.5 * vel @ a_c @ vel
    dyn = p.dyn
    sliders = lumped_positions(pose, p.geom)
    m_at_platform = dyn.m_platform + 1.5 * dyn.m_bar
    potential = -dyn.g @ (m_at_platform * pose + (dyn.m_foot + 0.5 * dyn.m_bar) * sliders.sum(axis=0))
    return kinetic + potential
