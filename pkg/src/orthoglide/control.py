"""The four trajectory-tracking controllers.

All of them share one PID tuning from a closed-loop bandwidth.  The
computed-torque variants close the PID loop on acceleration

    acc_cmd = acc_d + kd * e_dot + kp * e + ki * int(e)

and turn ``acc_cmd`` into actuator forces with the (possibly mis-identified)
inverse dynamic model.  The single-axis controller applies the same PID per
joint, scaled by a reflected-inertia estimate, without any model term.

Velocity feedback comes from a filtered backward difference of the error
signal unless an exact rate is passed in (ideal sensing).  The velocity
estimate fed to the model is then ``vel_d - e_dot``.

The forces are held for one control period.  With ``hold=h`` the model is
evaluated at the state predicted for the middle of the hold,
``x + h/2 v + h^2/8 a_cmd`` and ``v + h/2 a_cmd``, which removes the
first-order part of the hold error.  ``hold=0`` gives the plain law.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from . import kinematics as kin
from .errors import (AssemblyModeViolation, DegenerateBranch, LegSingularity,
                     NearSingular, NoAssembly, UnreachablePose)
from .sensors import DerivativeFilter

MODEL_FAULTS = (NoAssembly, AssemblyModeViolation, DegenerateBranch, NearSingular,
                LegSingularity, UnreachablePose)


class ControllerKind(str, enum.Enum):
    SINGLE_AXIS = "single_axis"
    JOINT_CTC = "joint_ctc"
    CARTESIAN_CTC_FKM = "cartesian_ctc_fkm"
    VISION_CTC = "vision_ctc"

    @property
    def uses_vision(self):
        return self is ControllerKind.VISION_CTC

    @property
    def joint_space(self):
        return self in (ControllerKind.SINGLE_AXIS, ControllerKind.JOINT_CTC)


@dataclass(frozen=True)
class Gains:
    kp: float
    kd: float
    ki: float = 0.0

    def __post_init__(self):
        if min(self.kp, self.kd, self.ki) < 0:
            raise ValueError("gains must be non-negative")

    def scaled(self, factor):
        """Gains for a bandwidth multiplied by ``factor`` (pole scaling)."""
        return Gains(self.kp * factor ** 2, self.kd * factor, self.ki * factor ** 3)

    def char_poly(self):
        """Coefficients of ``s^3 + kd s^2 + kp s + ki`` of the error dynamics."""
        return np.array([1.0, self.kd, self.kp, self.ki])


def gains_from_bandwidth(f, kind="pid"):
    """Place every closed-loop pole of the double-integrator error
    dynamics at ``-2 pi f``."""
    if not f > 0:
        raise ValueError("bandwidth must be positive")
    w = 2 * np.pi * f
    if kind == "pid":
        return Gains(kp=3 * w ** 2, kd=3 * w, ki=w ** 3)
    if kind == "pd":
        return Gains(kp=w ** 2, kd=2 * w, ki=0.0)
    raise ValueError(f"unknown gain kind {kind!r}")


@dataclass
class ControllerState:
    derivative_cutoff: float = 50.0
    integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    last_torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    last_error: np.ndarray = field(default_factory=lambda: np.zeros(3))
    last_measurement: object = None
    fault: str = ""
    faults: int = 0
    steps: int = 0

    def __post_init__(self):
        self.filter = DerivativeFilter(self.derivative_cutoff)

    def reset(self):
        self.integral = np.zeros(3)
        self.last_torque = np.zeros(3)
        self.last_error = np.zeros(3)
        self.last_measurement = None
        self.fault = ""
        self.faults = 0
        self.steps = 0
        self.filter.reset()


@dataclass(frozen=True)
class Limits:
    torque: float = None      # symmetric clamp on each actuator force, N
    integral: float = None    # bound on each component of the error integral


def _error_rate(state, t, error, vel_error):
    if vel_error is not None:
        return np.asarray(vel_error, dtype=float)
    return state.filter.update(t, error).copy()


def _commit(state, integral, torque, error):
    state.integral = integral
    state.last_torque = torque
    state.last_error = error
    state.fault = ""
    state.steps += 1
    return torque


def _fault(state, snap, reason, torque=None):
    state.filter.restore(snap)
    state.fault = reason
    state.faults += 1
    state.steps += 1
    if torque is not None:
        state.last_torque = torque
    return state.last_torque.copy()


def _pid(error, rate, state, gains, dt, limits):
    integral = state.integral + error * dt
    if limits.integral is not None:
        integral = np.clip(integral, -limits.integral, limits.integral)
    return integral, gains.kp * error + gains.kd * rate + gains.ki * integral


def _midpoint(x, v, acc, hold):
    if not hold:
        return x, v
    return x + 0.5 * hold * v + hold * hold / 8.0 * acc, v + 0.5 * hold * acc


def _saturate(torque, integral, state, limits):
    """Clamp the forces; freeze the integrator on saturated axes."""
    if limits.torque is None:
        return torque, integral
    sat = np.abs(torque) > limits.torque
    if np.any(sat):
        integral = np.where(sat, state.integral, integral)
    return np.clip(torque, -limits.torque, limits.torque), integral


def single_axis_step(setpoint_q, measured_q, state, gains, dt, inertia=(1.0, 1.0, 1.0),
                     measured_qd=None, limits=Limits(), t=None):
    """Independent joint PIDs; output forces scale with the reflected inertia."""
    t = setpoint_q.t if t is None else t
    error = setpoint_q.pos - np.asarray(measured_q, dtype=float)
    vel_error = None if measured_qd is None else setpoint_q.vel - measured_qd
    rate = _error_rate(state, t, error, vel_error)
    integral, acc = _pid(error, rate, state, gains, dt, limits)
    torque, integral = _saturate(np.asarray(inertia) * acc, integral, state, limits)
    return _commit(state, integral, torque, error)


def joint_ctc_step(setpoint_q, measured_q, state, gains, model, dt, measured_qd=None,
                   limits=Limits(), t=None, counters=None, hold=0.0):
    """Joint-space computed torque; the model goes through forward kinematics."""
    t = setpoint_q.t if t is None else t
    snap = state.filter.snapshot()
    q = np.asarray(measured_q, dtype=float)
    error = setpoint_q.pos - q
    vel_error = None if measured_qd is None else setpoint_q.vel - measured_qd
    rate = _error_rate(state, t, error, vel_error)
    qd = setpoint_q.vel - rate
    integral, fb = _pid(error, rate, state, gains, dt, limits)
    acc = setpoint_q.acc + fb
    try:
        torque = dyn.inverse_dynamics_joint(*_midpoint(q, qd, acc, hold), acc, model, counters)
    except MODEL_FAULTS as exc:
        return _fault(state, snap, type(exc).__name__)
    torque, integral = _saturate(torque, integral, state, limits)
    return _commit(state, integral, torque, error)


def _cartesian_law(setpoint, reference, pose, state, gains, model, dt, vel_error, limits, t,
                   hold):
    error = reference.pos - pose
    rate = _error_rate(state, t, error, vel_error)
    vel = reference.vel - rate
    integral, fb = _pid(error, rate, state, gains, dt, limits)
    acc = setpoint.acc + fb
    torque = dyn.inverse_dynamics_cartesian(
        dyn.CartesianState(*_midpoint(pose, vel, acc, hold), acc), model)
    torque, integral = _saturate(torque, integral, state, limits)
    return _commit(state, integral, torque, error)


def cartesian_ctc_fkm_step(setpoint, measured_q, state, gains, model, dt, measured_qd=None,
                           limits=Limits(), t=None, hold=0.0):
    """Cartesian computed torque with the pose rebuilt by forward kinematics."""
    t = setpoint.t if t is None else t
    snap = state.filter.snapshot()
    try:
        pose = kin.forward_kinematics(measured_q, model.geom)
        vel_error = None
        if measured_qd is not None:
            vel_error = setpoint.vel - np.linalg.solve(kin.d_inv(pose, model.geom), measured_qd)
        return _cartesian_law(setpoint, setpoint, pose, state, gains, model, dt,
                              vel_error, limits, t, hold)
    except MODEL_FAULTS as exc:
        return _fault(state, snap, type(exc).__name__)


def vision_ctc_step(setpoint, measurement, state, gains, model, dt, reference=None,
                    measured_vel=None, limits=Limits(), hold=0.0):
    """Cartesian computed torque fed directly by the measured pose.

    ``reference`` is the setpoint at the measurement timestamp, so a delayed
    measurement is compared with the matching part of the path; it defaults
    to ``setpoint``.  Without a valid measurement the feedforward torque of
    the reference is returned and the step is flagged.
    """
    snap = state.filter.snapshot()
    if measurement is None or not measurement.valid:
        try:
            ff = dyn.inverse_dynamics_cartesian(
                dyn.CartesianState(setpoint.pos, setpoint.vel, setpoint.acc), model)
        except MODEL_FAULTS:
            ff = None
        return _fault(state, snap, "NotYetAvailable", ff)
    reference = setpoint if reference is None else reference
    pose = np.asarray(measurement.value, dtype=float)
    vel_error = None if measured_vel is None else reference.vel - measured_vel
    same_sample = (state.last_measurement is not None
                   and state.last_measurement.timestamp == measurement.timestamp)
    if same_sample and vel_error is None:
        # a held sample carries no new rate information
        vel_error = state.filter.estimate.copy()
    state.last_measurement = measurement
    try:
        return _cartesian_law(setpoint, reference, pose, state, gains, model, dt,
                              vel_error, limits, measurement.timestamp, hold)
    except MODEL_FAULTS as exc:
        return _fault(state, snap, type(exc).__name__)


def reflected_inertia(pose, model):
    """Diagonal of the joint-space mass matrix ``D^T A_c D`` at ``pose``."""
    a_c = dyn.cartesian_mass_matrix(pose, model)
    d = kin.d_forward(pose, model.geom)
    return np.diag(d.T @ a_c @ d).copy()
