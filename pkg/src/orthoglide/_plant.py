"""Compiled plant kernel: forward dynamics and fixed-step RK4 under a held torque.

Scalar re-implementation of :func:`orthoglide.dynamics.cartesian_forces`
for the integrator's inner loop.  The test suite checks it against the
numpy reference.
"""
import numpy as np
from numba import njit

# Parameter vector layout.
D4, A, M_P, M_FOOT, M_BAR, I_ROD, GX, GY, GZ = range(9)

_C = (0, 1, 2)
_S = (1, 2, 0)
_A = (2, 0, 1)


def pack(p):
    d = p.dyn
    return np.array([p.geom.d4, p.geom.a, d.m_platform, d.m_foot, d.m_bar,
                     d.rod_inertia, d.gravity[0], d.gravity[1], d.gravity[2]])


@njit(cache=True)
def _leg_force(pc, ps, vc, vs, va, ac, as_, aa, gc, gs, ga, prm, out):
    """Cartesian contribution ``Jinv^T H`` of one leg, local components."""
    d4 = prm[D4]
    rho = np.sqrt(d4 * d4 - ps * ps)
    delta = np.sqrt(d4 * d4 - pc * pc - ps * ps)
    s2 = delta / rho
    c2 = pc / rho
    s3 = -ps / d4
    c3 = rho / d4
    t3 = s3 / c3
    j00 = c2 / s2
    j01 = -t3 / s2
    j10 = -1.0 / (d4 * c3 * s2)
    j11 = t3 * c2 / (d4 * c3 * s2)
    j21 = -1.0 / (d4 * c3)

    w1 = j00 * vc + j01 * vs + va
    w2 = j10 * vc + j11 * vs
    w3 = j21 * vs
    k0 = d4 * (-c3 * c2 * w2 * w2 + 2 * s3 * s2 * w2 * w3 - c3 * c2 * w3 * w3)
    k1 = d4 * (s3 * w3 * w3)
    k2 = d4 * (-c3 * s2 * w2 * w2 - 2 * s3 * c2 * w2 * w3 - c3 * s2 * w3 * w3)
    bc = ac - k0
    bs = as_ - k1
    ba = aa - k2
    a1 = j00 * bc + j01 * bs + ba
    a2 = j10 * bc + j11 * bs
    a3 = j21 * bs

    u0 = c3 * c2
    u1 = -s3
    u2 = c3 * s2
    om0 = w3 * s2
    om1 = -w2
    om2 = -w3 * c2
    al0 = a3 * s2 + w2 * w3 * c2
    al1 = -a2
    al2 = -a3 * c2 + w2 * w3 * s2
    ab0 = -gc
    ab1 = -gs
    ab2 = a1 - ga
    h = 0.5 * d4
    r0 = h * u0
    r1 = h * u1
    r2 = h * u2
    # alpha x r + omega x (omega x r)
    x0 = om1 * r2 - om2 * r1
    x1 = om2 * r0 - om0 * r2
    x2 = om0 * r1 - om1 * r0
    ac0 = ab0 + (al1 * r2 - al2 * r1) + (om1 * x2 - om2 * x1)
    ac1 = ab1 + (al2 * r0 - al0 * r2) + (om2 * x0 - om0 * x2)
    ac2 = ab2 + (al0 * r1 - al1 * r0) + (om0 * x1 - om1 * x0)
    mb = prm[M_BAR]
    f0 = mb * ac0
    f1 = mb * ac1
    f2 = mb * ac2
    ip = 0.25 * mb * d4 * d4 + prm[I_ROD]
    uw = u0 * om0 + u1 * om1 + u2 * om2
    ua = u0 * al0 + u1 * al1 + u2 * al2
    iw0 = ip * (om0 - u0 * uw)
    iw1 = ip * (om1 - u1 * uw)
    iw2 = ip * (om2 - u2 * uw)
    n0 = ip * (al0 - u0 * ua) + (om1 * iw2 - om2 * iw1) + (r1 * f2 - r2 * f1)
    n1 = ip * (al1 - u1 * ua) + (om2 * iw0 - om0 * iw2) + (r2 * f0 - r0 * f2)
    n2 = ip * (al2 - u2 * ua) + (om0 * iw1 - om1 * iw0) + (r0 * f1 - r1 * f0)
    h1 = f2 + prm[M_FOOT] * ab2
    h2 = -n1
    h3 = s2 * n0 - c2 * n2
    # Jinv^T H
    out[0] = j00 * h1 + j10 * h2
    out[1] = j01 * h1 + j11 * h2 + j21 * h3
    out[2] = h1


@njit(cache=True)
def cartesian_force(pose, vel, acc, prm, out):
    g0 = prm[GX]
    g1 = prm[GY]
    g2 = prm[GZ]
    mp = prm[M_P]
    out[0] = mp * (acc[0] - g0)
    out[1] = mp * (acc[1] - g1)
    out[2] = mp * (acc[2] - g2)
    p0 = pose[0]
    p1 = pose[1]
    p2 = pose[2] - prm[A]
    p = (p0, p1, p2)
    g = (g0, g1, g2)
    loc = np.empty(3)
    for i in range(3):
        c = _C[i]
        s = _S[i]
        a = _A[i]
        _leg_force(p[c], p[s], vel[c], vel[s], vel[a], acc[c], acc[s], acc[a],
                   g[c], g[s], g[a], prm, loc)
        out[c] += loc[0]
        out[s] += loc[1]
        out[a] += loc[2]


@njit(cache=True)
def reachable(pose, prm):
    d4 = prm[D4]
    p0 = pose[0]
    p1 = pose[1]
    p2 = pose[2] - prm[A]
    lim = d4 * d4
    return (lim - p0 * p0 - p1 * p1 > 0.0 and lim - p1 * p1 - p2 * p2 > 0.0
            and lim - p0 * p0 - p2 * p2 > 0.0)


@njit(cache=True)
def d_inv(pose, prm, out):
    d4 = prm[D4]
    p = (pose[0], pose[1], pose[2] - prm[A])
    for i in range(3):
        c = _C[i]
        s = _S[i]
        a = _A[i]
        delta = np.sqrt(d4 * d4 - p[c] * p[c] - p[s] * p[s])
        out[i, c] = p[c] / delta
        out[i, s] = p[s] / delta
        out[i, a] = 1.0


@njit(cache=True)
def forward_dynamics(pose, vel, torque, prm):
    zero = np.zeros(3)
    bias = np.empty(3)
    cartesian_force(pose, vel, zero, prm, bias)
    a_c = np.empty((3, 3))
    col = np.empty(3)
    e = np.zeros(3)
    for k in range(3):
        e[:] = 0.0
        e[k] = 1.0
        cartesian_force(pose, vel, e, prm, col)
        for r in range(3):
            a_c[r, k] = col[r] - bias[r]
    dinv = np.empty((3, 3))
    d_inv(pose, prm, dinv)
    rhs = dinv.T @ torque - bias
    return np.linalg.solve(a_c, rhs)


@njit(cache=True)
def rk4_hold(x, v, torque, prm, dt, n):
    """Advance ``n`` RK4 steps with constant ``torque``.

    Returns ``(x, v, acc, ok)`` with ``acc`` the acceleration at the final
    state; ``ok`` is False when a stage leaves the
    reachable set, in which case the state at the last full step is returned.
    """
    acc = np.zeros(3)
    for _ in range(n):
        if not reachable(x, prm):
            return x, v, acc, False
        k1v = forward_dynamics(x, v, torque, prm)
        x2 = x + 0.5 * dt * v
        v2 = v + 0.5 * dt * k1v
        if not reachable(x2, prm):
            return x, v, acc, False
        k2v = forward_dynamics(x2, v2, torque, prm)
        x3 = x + 0.5 * dt * v2
        v3 = v + 0.5 * dt * k2v
        if not reachable(x3, prm):
            return x, v, acc, False
        k3v = forward_dynamics(x3, v3, torque, prm)
        x4 = x + dt * v3
        v4 = v + dt * k3v
        if not reachable(x4, prm):
            return x, v, acc, False
        k4v = forward_dynamics(x4, v4, torque, prm)
        x = x + dt / 6.0 * (v + 2 * v2 + 2 * v3 + v4)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    if not reachable(x, prm):
        return x, v, acc, False
    return x, v, forward_dynamics(x, v, torque, prm), True
