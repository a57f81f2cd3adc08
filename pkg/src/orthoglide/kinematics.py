"""Closed-form kinematics of the Orthoglide, written in terms of the pose.

Conventions
-----------
Poses are ``(x, y, z)`` arrays in metres; joint vectors ``(q1, q2, q3)``.
Legs are numbered 1..3 in the public API.  Leg 1 slides along z, leg 2
along x and leg 3 along y.

Internally the pose is shifted by ``(0, 0, a)`` so that the three legs are
related by a cyclic permutation of axes.  In that frame each leg has a
local right-handed triad ``(c, s, a)``:

    leg 1: (x, y, z)    leg 2: (y, z, x)    leg 3: (z, x, y)

and its rod (the parallelogram, length ``d4``) points along

    u = (c3*c2, -s3, c3*s2)     (components on c, s, a)

where ``s2, c2, s3, c3`` are the sines/cosines of the two passive
revolute angles.  Matrices are row-major with rows indexing outputs and
columns indexing world x, y, z.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (AssemblyModeViolation, DegenerateBranch, LegSingularity,
                     NearSingular, NoAssembly, UnreachablePose)

# World indices of the local (c, s, a) axes for legs 1, 2, 3.
C_IDX = np.array([0, 1, 2])
S_IDX = np.array([1, 2, 0])
A_IDX = np.array([2, 0, 1])
LOCAL_AXES = np.stack([C_IDX, S_IDX, A_IDX], axis=1)  # LOCAL_AXES[leg] = (c, s, a)

SINGULAR_DET = 1e-8
LEG_SINGULAR = 1e-9


def _shifted(pose, geom):
    p = np.array(pose, dtype=float)
    p[2] -= geom.a
    return p


def delta_squared(pose, geom):
    """``D4**2 - pc**2 - ps**2`` for each leg (the squared Δ terms)."""
    p = _shifted(pose, geom)
    return geom.d4 ** 2 - p[C_IDX] ** 2 - p[S_IDX] ** 2


def reachable(pose, geom, margin=0.0):
    """True when every Δ² exceeds ``margin**2`` (strictly positive by default)."""
    return bool(np.all(delta_squared(pose, geom) > margin ** 2))


def _deltas(pose, geom):
    d2 = delta_squared(pose, geom)
    if not np.all(d2 > 0):
        raise UnreachablePose(f"pose {np.asarray(pose)} is outside the reachable set (Δ²={d2})")
    return np.sqrt(d2)


def _check_leg(leg):
    if leg not in (1, 2, 3):
        raise ValueError(f"leg must be 1, 2 or 3, got {leg!r}")
    return leg - 1


def inverse_kinematics(pose, geom):
    """Active joint values of the unique in-workspace solution."""
    p = _shifted(pose, geom)
    delta = _deltas(pose, geom)
    return p[A_IDX] - delta + geom.a - geom.d6


def forward_kinematics(q, geom):
    """Pose from active joints; the assembly mode with ``z > 0`` is returned.

    Among the roots with positive z, the one whose rods all point away from
    their sliders (every Δ positive) is preferred; this is the branch that
    :func:`inverse_kinematics` produces.
    """
    q = np.asarray(q, dtype=float)
    pb = q + geom.d6 - geom.a
    if np.any(np.abs(pb) < 1e-12):
        raise DegenerateBranch(f"slider position P_B is zero for q={q}")
    A = 0.25 * np.sum(pb ** -2)
    B = 0.5
    C = 0.25 * np.sum(pb ** 2) - geom.d4 ** 2
    disc = B * B - 4.0 * A * C
    if disc < 0:
        raise NoAssembly(f"no assembly for q={q} (discriminant {disc:.3e})")
    sq = np.sqrt(disc)
    best, best_score = None, -np.inf
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        along = 0.5 * pb + t / (2.0 * pb)   # shifted coordinate on each leg's axis
        p = np.empty(3)
        p[A_IDX] = along
        pose = p + np.array([0.0, 0.0, geom.a])
        if not pose[2] > 0:
            continue
        score = np.min(along - pb)
        if score > best_score:
            best, best_score = pose, score
    if best is None:
        raise AssemblyModeViolation(f"both assembly modes have z <= 0 for q={q}")
    return best


def d_inv(pose, geom):
    """Inverse instantaneous kinematic matrix: ``qdot = d_inv @ xdot``."""
    p = _shifted(pose, geom)
    delta = _deltas(pose, geom)
    m = np.zeros((3, 3))
    for i in range(3):
        c, s, a = LOCAL_AXES[i]
        m[i, c] = p[c] / delta[i]
        m[i, s] = p[s] / delta[i]
        m[i, a] = 1.0
    return m


def check_nonsingular(dinv, threshold=SINGULAR_DET):
    """Raise NearSingular when ``dinv`` or its inverse is close to rank deficient."""
    det = np.linalg.det(dinv)
    if not np.isfinite(det) or abs(det) < threshold or abs(det) > 1.0 / threshold:
        raise NearSingular(f"det(D_inv) = {det:.3e} outside [{threshold:g}, {1 / threshold:g}]")
    return det


def d_forward(pose, geom, threshold=SINGULAR_DET):
    """Forward instantaneous kinematic matrix ``D = d_inv**-1``."""
    try:
        m = d_inv(pose, geom)
    except UnreachablePose as exc:
        raise NearSingular(str(exc)) from exc
    check_nonsingular(m, threshold)
    return np.linalg.inv(m)


@dataclass(frozen=True)
class PassiveTrig:
    """Sines and cosines of the passive revolute angles, indexed by leg (0..2)."""
    s2: np.ndarray
    c2: np.ndarray
    s3: np.ndarray
    c3: np.ndarray

    def pairs(self):
        return [(self.s2, self.c2), (self.s3, self.c3)]

    def angles(self):
        """``(theta2, theta3)`` arrays recovered with atan2, for logging."""
        return np.arctan2(self.s2, self.c2), np.arctan2(self.s3, self.c3)


def passive_trig(pose, geom):
    p = _shifted(pose, geom)
    delta = _deltas(pose, geom)
    d4 = geom.d4
    pc, ps = p[C_IDX], p[S_IDX]
    rho = np.sqrt(d4 ** 2 - ps ** 2)  # rod length projected on the (c, a) plane
    return PassiveTrig(s2=delta / rho, c2=pc / rho, s3=-ps / d4, c3=rho / d4)


def leg_joint_variables(pose, geom, leg):
    """``(q_i1, theta_2i, theta_3i)`` with angles reconstructed via atan2."""
    i = _check_leg(leg)
    q = inverse_kinematics(pose, geom)[i]
    tr = passive_trig(pose, geom)
    return np.array([q, np.arctan2(tr.s2[i], tr.c2[i]), np.arctan2(tr.s3[i], tr.c3[i])])


def _local_jinv(s2, c2, s3, c3, d4):
    """Leg inverse Jacobian in local columns (c, s, a); broadcasts over legs."""
    s2, c2, s3, c3 = np.broadcast_arrays(s2, c2, s3, c3)
    if np.any(np.abs(s2) < LEG_SINGULAR) or np.any(np.abs(c3) < LEG_SINGULAR):
        raise LegSingularity("passive-joint term in a denominator vanished")
    t3 = s3 / c3
    m = np.zeros(s2.shape + (3, 3))
    m[..., 0, 0] = c2 / s2
    m[..., 0, 1] = -t3 / s2
    m[..., 0, 2] = 1.0
    m[..., 1, 0] = -1.0 / (d4 * c3 * s2)
    m[..., 1, 1] = t3 * c2 / (d4 * c3 * s2)
    m[..., 2, 1] = -1.0 / (d4 * c3)
    return m


def leg_jacobian_inv(pose, geom, leg):
    """Map from platform velocity to ``(q_i1_dot, theta2_dot, theta3_dot)``.

    The first row coincides with row ``leg`` of :func:`d_inv`.
    """
    i = _check_leg(leg)
    tr = passive_trig(pose, geom)
    local = _local_jinv(tr.s2[i], tr.c2[i], tr.s3[i], tr.c3[i], geom.d4)
    m = np.zeros((3, 3))
    m[:, LOCAL_AXES[i]] = local
    return m


def _rod_curvature(s2, c2, s3, c3, rates, d4):
    """Velocity-product term ``Jdot @ qdot_leg`` of the leg closure, local frame.

    The closure is ``x = P e_a + d4 * u(theta2, theta3)`` so the term is
    ``d4 * (u_22 w2**2 + 2 u_23 w2 w3 + u_33 w3**2)``.
    """
    w2, w3 = rates[..., 1], rates[..., 2]
    out = np.empty(np.shape(rates))
    out[..., 0] = -c3 * c2 * w2 ** 2 + 2 * s3 * s2 * w2 * w3 - c3 * c2 * w3 ** 2
    out[..., 1] = s3 * w3 ** 2
    out[..., 2] = -c3 * s2 * w2 ** 2 - 2 * s3 * c2 * w2 * w3 - c3 * s2 * w3 ** 2
    return d4 * out


def leg_rates(pose, xdot, geom, leg):
    return leg_jacobian_inv(pose, geom, leg) @ np.asarray(xdot, dtype=float)


def leg_accels(pose, xdot, xddot, geom, leg):
    """Leg joint accelerations ``Jinv @ xddot + (d/dt Jinv) @ xdot``.

    The second term is evaluated in closed form as ``-Jinv @ (Jdot @ qdot)``.
    """
    i = _check_leg(leg)
    tr = passive_trig(pose, geom)
    s2, c2, s3, c3 = tr.s2[i], tr.c2[i], tr.s3[i], tr.c3[i]
    local = _local_jinv(s2, c2, s3, c3, geom.d4)
    axes = LOCAL_AXES[i]
    xd = np.asarray(xdot, dtype=float)[axes]
    xdd = np.asarray(xddot, dtype=float)[axes]
    rates = local @ xd
    return local @ (xdd - _rod_curvature(s2, c2, s3, c3, rates, geom.d4))


def d_inv_dot_xdot(pose, xdot, geom):
    """``(d/dt d_inv) @ xdot`` evaluated analytically along ``xdot``."""
    p = _shifted(pose, geom)
    delta = _deltas(pose, geom)
    xdot = np.asarray(xdot, dtype=float)
    pc, ps = p[C_IDX], p[S_IDX]
    vc, vs = xdot[C_IDX], xdot[S_IDX]
    radial = pc * vc + ps * vs
    return (vc ** 2 + vs ** 2) / delta + radial ** 2 / delta ** 3


def global_rates_accels(pose, xdot, xddot, geom):
    """Active joint rates and accelerations from the Cartesian motion."""
    m = d_inv(pose, geom)
    qd = m @ np.asarray(xdot, dtype=float)
    qdd = m @ np.asarray(xddot, dtype=float) + d_inv_dot_xdot(pose, xdot, geom)
    return qd, qdd


def sample_poses(rng, n, geom, half_width=0.10, margin=0.05):
    """``n`` poses drawn uniformly from the cube of ``half_width`` around the
    isotropic pose, rejecting those with some Δ below ``margin * d4``."""
    out = []
    while len(out) < n:
        cand = geom.home + rng.uniform(-half_width, half_width, (max(n, 16), 3))
        for p in cand:
            if reachable(p, geom, margin * geom.d4):
                out.append(p)
    return np.array(out[:n])
