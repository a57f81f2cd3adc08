"""Measurement chain: quantized joint encoders and a pose-level vision sensor.

The vision sensor is sampled at ``rate`` with sample-and-hold, delivers each
sample ``latency`` seconds after it was taken, and corrupts it with
zero-mean noise.  ``accuracy`` is read as the half-width of a uniform
distribution per axis (sigma = accuracy / sqrt(3)); the gaussian option uses
sigma = accuracy / 3.  An optional blur term widens the noise by
``blur_gain * |acceleration|``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InsufficientHistory, NotYetAvailable
from .trajectory import QuinticSegment, quintic_duration

NOISE_FACTOR = {"uniform": np.sqrt(3.0), "gaussian": 3.0}
_EPS = 1e-9


@dataclass(frozen=True)
class EncoderConfig:
    resolution: float = 10e-6

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("encoder resolution must be positive")


def encoder_read(q, cfg):
    """Quantize each joint value to the nearest multiple of the resolution."""
    r = cfg.resolution
    return np.round(np.asarray(q, dtype=float) / r) * r


@dataclass(frozen=True)
class VisionConfig:
    accuracy: float = 100e-6
    rate: float = 400.0
    latency: float = 1.0 / 400.0
    static_bias: tuple = (0.0, 0.0, 0.0)
    blur_gain: float = 0.0          # metres of extra noise half-width per m/s^2
    noise_kind: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("vision rate must be positive")
        if self.latency < 0:
            raise ValueError("latency must be non-negative")
        if not self.accuracy >= 0:
            raise ValueError("accuracy must be non-negative")
        if self.noise_kind not in NOISE_FACTOR:
            raise ValueError(f"noise_kind must be one of {sorted(NOISE_FACTOR)}")
        periods = self.latency * self.rate
        if abs(periods - round(periods)) > 1e-6:
            raise ValueError("latency must be an integer multiple of the sample period")
        bias = np.broadcast_to(np.asarray(self.static_bias, dtype=float), (3,))
        object.__setattr__(self, "static_bias", tuple(float(b) for b in bias))

    @property
    def period(self):
        return 1.0 / self.rate

    @property
    def sigma(self):
        """Standard deviation of the blur-free noise on each axis."""
        return self.accuracy / NOISE_FACTOR[self.noise_kind]


@dataclass(frozen=True)
class Measurement:
    value: np.ndarray
    timestamp: float
    valid: bool = True


class VisionSensor:
    """Streaming vision sensor.  Feed it the true pose with :meth:`observe`
    (at least at every sample instant) and query it with :meth:`read`."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._rng = np.random.default_rng(cfg.seed)
        self._bias = np.array(cfg.static_bias)
        self._next = None
        self._samples = []

    def _noise(self, acc):
        cfg = self.cfg
        scale = cfg.accuracy
        if cfg.blur_gain and acc is not None:
            scale = scale + cfg.blur_gain * float(np.linalg.norm(acc))
        if cfg.noise_kind == "uniform":
            return scale * self._rng.uniform(-1.0, 1.0, 3)
        return scale / 3.0 * self._rng.standard_normal(3)

    def observe(self, t, pose, acc=None):
        """Record a sample if ``t`` is a sample instant (multiple of the period)."""
        k = round(t * self.cfg.rate)
        if abs(t - k * self.cfg.period) > _EPS:
            return False
        if self._next is not None and k < self._next:
            return False
        self._next = k + 1
        value = np.asarray(pose, dtype=float) + self._bias + self._noise(acc)
        self._samples.append(Measurement(value, k * self.cfg.period))
        return True

    def read(self, t):
        """Latest sample taken no later than ``t - latency``."""
        horizon = t - self.cfg.latency + _EPS
        for m in reversed(self._samples):
            if m.timestamp <= horizon:
                return m
        raise NotYetAvailable(f"no vision sample available at t={t:.6f}")

    @property
    def samples(self):
        return list(self._samples)


def vision_read(times, poses, t, cfg, accels=None):
    """Replay a time-indexed pose stream through a fresh sensor and read it
    at time ``t``.  Stream entries newer than ``t - latency`` are ignored."""
    sensor = VisionSensor(cfg)
    horizon = t - cfg.latency + _EPS
    for k, (tk, pose) in enumerate(zip(times, poses)):
        if tk > horizon:
            break
        sensor.observe(tk, pose, None if accels is None else accels[k])
    return sensor.read(t)


class DerivativeFilter:
    """Backward difference followed by a single-pole low-pass at ``cutoff`` Hz.

    The low-pass uses the exact discretization ``alpha = 1 - exp(-dt/tau)``
    and starts from zero.
    """

    def __init__(self, cutoff=50.0, dim=3):
        if not cutoff > 0:
            raise ValueError("cutoff must be positive")
        self.tau = 1.0 / (2 * np.pi * cutoff)
        self.dim = dim
        self.reset()

    def reset(self):
        self.estimate = np.zeros(self.dim)
        self._last = None

    def alpha(self, dt):
        return 1.0 - np.exp(-dt / self.tau)

    def update(self, t, value):
        value = np.asarray(value, dtype=float)
        if self._last is None:
            self._last = (t, value)
            return self.estimate
        t0, v0 = self._last
        dt = t - t0
        if dt <= 0:
            return self.estimate
        raw = (value - v0) / dt
        self.estimate = self.estimate + self.alpha(dt) * (raw - self.estimate)
        self._last = (t, value)
        return self.estimate

    def snapshot(self):
        return (self.estimate.copy(), self._last)

    def restore(self, snap):
        self.estimate, self._last = snap[0].copy(), snap[1]


def derivative_estimate(times, values, cutoff=50.0):
    """Filtered velocity estimate for every sample of a stream (first is 0)."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise InsufficientHistory("at least two samples are needed")
    flt = DerivativeFilter(cutoff, dim=values.shape[1] if values.ndim > 1 else 1)
    out = [np.array(flt.update(t, v), copy=True) for t, v in zip(times, values)]
    out = np.array(out)
    return out if values.ndim > 1 else out[:, 0]


# -- Sensor characterization on a linear test motion ------------------------

@dataclass(frozen=True)
class CharacterizationSpec:
    distance: float = 0.200
    accelerations: tuple = (1.0, 3.0, 5.0, 10.0)
    rest: float = 2.0               # seconds at rest before the move
    axis: int = 0


@dataclass
class CharacterizationRow:
    acceleration: float
    static_error: float
    dynamic_error: float
    samples_rest: int = 0
    samples_motion: int = 0
    extra: dict = field(default_factory=dict)


def characterize_one(cfg, accel, spec=CharacterizationSpec()):
    """Static (mean at rest) and dynamic (std during motion) error along the
    motion axis, comparing each sample with the truth at its timestamp."""
    e = np.zeros(3)
    e[spec.axis] = 1.0
    seg = QuinticSegment(np.zeros(3), spec.distance * e, quintic_duration(spec.distance, accel))
    sensor = VisionSensor(cfg)
    n_rest = int(round(spec.rest * cfg.rate))
    n_move = int(np.floor(seg.duration * cfg.rate))
    rest_err, move_err = [], []
    for k in range(n_rest + n_move + 1):
        t = k * cfg.period
        tm = t - spec.rest
        if tm < 0:
            pos, acc = np.zeros(3), np.zeros(3)
        else:
            sp = seg.sample(min(tm, seg.duration))
            pos, acc = sp.pos, sp.acc
        sensor.observe(t, pos, acc)
        err = sensor.samples[-1].value[spec.axis] - pos[spec.axis]
        (rest_err if tm < 0 else move_err).append(err)
    return CharacterizationRow(accel, float(np.mean(rest_err)), float(np.std(move_err)),
                               len(rest_err), len(move_err))


def characterize(cfg, spec=CharacterizationSpec()):
    return [characterize_one(cfg, a, spec) for a in spec.accelerations]


def calibrate_blur(cfg, target_dynamic_error=286e-6, accel=1.0, spec=CharacterizationSpec()):
    """Blur gain for which the dynamic error at ``accel`` equals the target."""
    from dataclasses import replace

    def residual(gain):
        c = replace(cfg, blur_gain=gain)
        return characterize_one(c, accel, spec).dynamic_error - target_dynamic_error

    lo, hi = 0.0, 1e-4
    if residual(lo) > 0:
        raise ValueError("blur-free noise already exceeds the calibration target")
    while residual(hi) < 0:
        hi *= 2
    return brentq(residual, lo, hi, xtol=1e-15, rtol=1e-14)
