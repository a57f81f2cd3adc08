"""Closed-loop simulation of the machine under one of the four controllers.

The plant state is the Cartesian pose and velocity, integrated with
classical RK4 at ``plant_dt`` while the actuator forces are held constant
between control instants.  Joint readings are derived from the true pose
through the true geometry; the controllers only ever see sensor outputs and
the model parameters.
"""
import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import _plant
from . import control as ctl
from . import kinematics as kin
from .errors import ConfigError, EmptyWindow, NotYetAvailable, SimDiverged
from .params import DynParams, GeomParams, MachineParams
from .sensors import EncoderConfig, Measurement, VisionConfig, VisionSensor, encoder_read
from .trajectory import Setpoint

FLAG_FAULT = 1
FLAG_NO_MEASUREMENT = 2


@dataclass(frozen=True)
class PerturbationSpec:
    geom_tolerance: float = 0.0
    dyn_tolerance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.geom_tolerance < 0 or self.dyn_tolerance < 0:
            raise ValueError("tolerances must be non-negative")


IDENTIFICATION = {
    "perfect": (0.0, 0.0),
    "classical": (100e-6, 0.10),
    "accurate": (10e-6, 0.01),
}


def perturb_params(true_p, spec):
    """Model parameters as identified with the given tolerances.

    Lengths get a uniform offset in ``[-geom_tolerance, geom_tolerance]``,
    masses and inertias a uniform relative error in ``[-dyn_tolerance,
    dyn_tolerance]``.
    """
    rng = np.random.default_rng(spec.seed)
    lg = rng.uniform(-1.0, 1.0, 3) * spec.geom_tolerance
    rd = 1.0 + rng.uniform(-1.0, 1.0, 4) * spec.dyn_tolerance
    g, d = true_p.geom, true_p.dyn
    geom = replace(g, d4=g.d4 + lg[0], d6=g.d6 + lg[1], a=g.a + lg[2])
    dyn = replace(d, m_platform=d.m_platform * rd[0], m_foot=d.m_foot * rd[1],
                  m_bar=d.m_bar * rd[2], rod_inertia=d.rod_inertia * rd[3])
    return MachineParams(geom, dyn)


@dataclass(frozen=True)
class SimConfig:
    controller: ctl.ControllerKind = ctl.ControllerKind.VISION_CTC
    control_rate: float = 400.0
    plant_dt: float = 1e-4
    duration: float = None            # defaults to the path duration
    pre_roll: float = 0.5             # unlogged hold at the start pose
    bandwidth: float = 6.0
    gain_scale: float = 1.0
    derivative_cutoff: float = 50.0
    feedforward: str = "interval"     # "interval" (hold-consistent) or "instant"
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    vision: VisionConfig = field(default_factory=lambda: VisionConfig(accuracy=10e-6))
    ideal_sensing: bool = False
    true_params: MachineParams = field(default_factory=MachineParams)
    model_params: MachineParams = None
    perturbation: PerturbationSpec = None
    torque_limit: float = None
    integral_limit: float = None
    safety_factor: float = 2.0
    seed: int = 0

    @property
    def control_period(self):
        return 1.0 / self.control_rate

    @property
    def substeps(self):
        return int(round(self.control_period / self.plant_dt))

    def validate(self):
        if not self.control_rate > 0 or not self.plant_dt > 0:
            raise ConfigError("rates and steps must be positive")
        if self.plant_dt > self.control_period * (1 + 1e-12):
            raise ConfigError(f"plant_dt={self.plant_dt} exceeds the control period {self.control_period}")
        ratio = self.control_period / self.plant_dt
        if abs(ratio - round(ratio)) > 1e-6:
            raise ConfigError("the control period must be an integer multiple of plant_dt")
        vr = self.control_rate / self.vision.rate
        if self.controller is ctl.ControllerKind.VISION_CTC and abs(vr - round(vr)) > 1e-6:
            raise ConfigError("vision samples must fall on control instants")
        if self.feedforward not in ("interval", "instant"):
            raise ConfigError(f"unknown feedforward mode {self.feedforward!r}")
        if self.pre_roll < 0 or (self.duration is not None and self.duration < 0):
            raise ConfigError("durations must be non-negative")
        return self

    def resolved_model(self):
        if self.model_params is not None:
            return self.model_params
        if self.perturbation is not None:
            return perturb_params(self.true_params, self.perturbation)
        return self.true_params


@dataclass
class SimLog:
    t: np.ndarray
    x_true: np.ndarray
    x_ref: np.ndarray
    x_meas: np.ndarray
    q_true: np.ndarray
    torque: np.ndarray
    flags: np.ndarray

    COLUMNS = (["t"] + [f"{k}_{ax}" for k in ("ref", "true", "meas") for ax in "xyz"]
               + ["q1", "q2", "q3", "tau1", "tau2", "tau3", "flags"])

    def __len__(self):
        return len(self.t)

    def errors(self):
        return self.x_true - self.x_ref

    def to_csv(self, path_or_buf=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for k in range(len(self.t)):
            row = np.concatenate([[self.t[k]], self.x_ref[k], self.x_true[k], self.x_meas[k],
                                  self.q_true[k], self.torque[k]])
            w.writerow([f"{v:.17g}" for v in row] + [int(self.flags[k])])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class Metrics:
    static_accuracy: float
    dynamic_accuracy: float
    max_error: float
    static_per_axis: tuple
    dynamic_per_axis: tuple
    samples: int


def compute_metrics(log, settle_skip=0.0):
    """Mean, standard deviation and maximum of the Euclidean tracking error."""
    keep = log.t >= settle_skip - 1e-12
    if not np.any(keep):
        raise EmptyWindow(f"no samples with t >= {settle_skip}")
    err = log.errors()[keep]
    norm = np.linalg.norm(err, axis=1)
    axis = np.abs(err)
    return Metrics(float(norm.mean()), float(norm.std()), float(norm.max()),
                   tuple(float(v) for v in axis.mean(axis=0)),
                   tuple(float(v) for v in axis.std(axis=0)), int(keep.sum()))


class _References:
    """Cartesian and joint-space setpoints for one control instant.

    In ``interval`` mode the feedforward acceleration is the mean
    acceleration over the coming hold interval, ``(v(t+h) - v(t)) / h``,
    which is what a force held constant over the interval has to produce.
    """

    def __init__(self, path, geom, h, mode):
        self.path, self.geom, self.h, self.mode = path, geom, h, mode

    def _joint(self, sp):
        q = kin.inverse_kinematics(sp.pos, self.geom)
        qd, qdd = kin.global_rates_accels(sp.pos, sp.vel, sp.acc, self.geom)
        return Setpoint(q, qd, qdd, sp.t)

    def cartesian(self, t):
        sp = self.path.sample_clamped(t)
        if self.mode == "instant":
            return sp
        nxt = self.path.sample_clamped(t + self.h)
        return Setpoint(sp.pos, sp.vel, (nxt.vel - sp.vel) / self.h, t)

    def joint(self, t):
        sp = self._joint(self.path.sample_clamped(t))
        if self.mode == "instant":
            return sp
        nxt = self._joint(self.path.sample_clamped(t + self.h))
        return Setpoint(sp.pos, sp.vel, (nxt.vel - sp.vel) / self.h, t)


def run_simulation(cfg, path):
    """Simulate ``path`` under ``cfg`` and return the log at the control rate."""
    cfg.validate()
    model = cfg.resolved_model()
    true_p = cfg.true_params
    prm = _plant.pack(true_p)
    kind = ctl.ControllerKind(cfg.controller)
    gains = ctl.gains_from_bandwidth(cfg.bandwidth * cfg.gain_scale)
    limits = ctl.Limits(cfg.torque_limit, cfg.integral_limit)
    state = ctl.ControllerState(cfg.derivative_cutoff)
    h = cfg.control_period
    hold = h if cfg.feedforward == "interval" else 0.0
    n_sub = cfg.substeps
    dt = h / n_sub
    duration = path.duration if cfg.duration is None else cfg.duration
    n_log = int(round(duration * cfg.control_rate))
    n_pre = int(round(cfg.pre_roll * cfg.control_rate))

    refs = _References(path, model.geom, h, cfg.feedforward)
    start = path.sample_clamped(0.0)
    inertia = ctl.reflected_inertia(start.pos, model) if kind is ctl.ControllerKind.SINGLE_AXIS else None
    sensor = VisionSensor(replace(cfg.vision, seed=cfg.seed)) if kind.uses_vision else None
    box_lo = true_p.geom.home - cfg.safety_factor * true_p.geom.d4 / 2
    box_hi = true_p.geom.home + cfg.safety_factor * true_p.geom.d4 / 2

    x = np.array(start.pos, dtype=float)
    v = np.zeros(3)
    acc = np.zeros(3)
    rows = {k: [] for k in ("t", "x_true", "x_ref", "x_meas", "q_true", "torque", "flags")}

    for k in range(-n_pre, n_log + 1):
        t = k * h
        sp = refs.cartesian(t)
        flags = 0
        meas_pose = np.full(3, np.nan)
        if kind.uses_vision:
            if cfg.ideal_sensing:
                m = Measurement(x.copy(), t)
                torque = ctl.vision_ctc_step(sp, m, state, gains, model, h, measured_vel=v,
                                             limits=limits, hold=hold)
            else:
                sensor.observe(t, x, acc)
                try:
                    m = sensor.read(t)
                except NotYetAvailable:
                    m = None
                ref = path.sample_clamped(m.timestamp) if m is not None else sp
                torque = ctl.vision_ctc_step(sp, m, state, gains, model, h, reference=ref,
                                             limits=limits, hold=hold)
                if m is None:
                    flags |= FLAG_NO_MEASUREMENT
            if m is not None:
                meas_pose = m.value
        else:
            q_true = kin.inverse_kinematics(x, true_p.geom)
            if cfg.ideal_sensing:
                q_meas = q_true
                qd_meas = kin.d_inv(x, true_p.geom) @ v
            else:
                q_meas = encoder_read(q_true, cfg.encoder)
                qd_meas = None
            if kind is ctl.ControllerKind.SINGLE_AXIS:
                torque = ctl.single_axis_step(refs.joint(t), q_meas, state, gains, h, inertia,
                                              measured_qd=qd_meas, limits=limits, t=t)
            elif kind is ctl.ControllerKind.JOINT_CTC:
                torque = ctl.joint_ctc_step(refs.joint(t), q_meas, state, gains, model, h,
                                            measured_qd=qd_meas, limits=limits, t=t, hold=hold)
            else:
                torque = ctl.cartesian_ctc_fkm_step(sp, q_meas, state, gains, model, h,
                                                    measured_qd=qd_meas, limits=limits, t=t,
                                                    hold=hold)
            try:
                meas_pose = kin.forward_kinematics(q_meas, model.geom)
            except ctl.MODEL_FAULTS:
                pass
        if state.fault:
            flags |= FLAG_FAULT
        torque = np.array(torque, dtype=float)
        if cfg.torque_limit is not None:
            torque = np.clip(torque, -cfg.torque_limit, cfg.torque_limit)

        if k >= 0:
            rows["t"].append(t)
            rows["x_true"].append(x.copy())
            rows["x_ref"].append(sp.pos)
            rows["x_meas"].append(meas_pose)
            rows["q_true"].append(kin.inverse_kinematics(x, true_p.geom))
            rows["torque"].append(torque)
            rows["flags"].append(flags)
        if k == n_log:
            break

        x, v, acc, ok = _plant.rk4_hold(x, v, torque, prm, dt, n_sub)
        if not ok:
            raise SimDiverged(f"pose left the reachable set near t={t + h:.4f} s ({x})")
        if not (np.all(np.isfinite(x)) and np.all(x >= box_lo) and np.all(x <= box_hi)):
            raise SimDiverged(f"pose {x} left the safety box at t={t + h:.4f} s")

    return SimLog(np.array(rows["t"]), np.array(rows["x_true"]), np.array(rows["x_ref"]),
                  np.array(rows["x_meas"]), np.array(rows["q_true"]),
                  np.array(rows["torque"]), np.array(rows["flags"], dtype=int))


def default_params():
    return MachineParams(GeomParams(), DynParams())
