"""Reference paths: quintic point-to-point profiles, squares and circles."""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import kinematics as kin
from .errors import OutOfRange, WorkspaceViolation

# Peak |s''| of the normalized quintic, reached at tau = (3 - sqrt 3) / 6.
QUINTIC_PEAK_ACC = 10.0 / np.sqrt(3.0)
QUINTIC_PEAK_VEL = 15.0 / 8.0
WORKSPACE_MARGIN = 0.05


def quintic(t, T):
    """Minimum-jerk profile ``s = 10 tau^3 - 15 tau^4 + 6 tau^5`` and its
    first two time derivatives."""
    if T <= 0:
        raise ValueError("duration must be positive")
    if t < 0 or t > T:
        raise OutOfRange(f"t={t} outside [0, {T}]")
    tau = t / T
    s = tau ** 3 * (10 - 15 * tau + 6 * tau ** 2)
    sd = 30 * tau ** 2 * (1 - tau) ** 2 / T
    sdd = 60 * tau * (1 - tau) * (1 - 2 * tau) / T ** 2
    return s, sd, sdd


def quintic_duration(distance, accel_limit):
    """Shortest duration whose peak acceleration equals ``accel_limit``."""
    return np.sqrt(QUINTIC_PEAK_ACC * abs(distance) / accel_limit)


@dataclass(frozen=True)
class Setpoint:
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class QuinticSegment:
    start: np.ndarray
    end: np.ndarray
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")

    def sample(self, t):
        s, sd, sdd = quintic(t, self.duration)
        delta = np.asarray(self.end) - np.asarray(self.start)
        return Setpoint(self.start + s * delta, sd * delta, sdd * delta, t)


@dataclass(frozen=True)
class PathSpec:
    kind: str = "square"          # "square" or "circle"
    size: float = 0.05            # side of the square or diameter of the circle
    center: tuple = None          # defaults to the isotropic pose
    accel_limit: float = 3.0
    speed_limit: float = None

    @property
    def label(self):
        return f"{self.kind}_{self.size * 1e3:g}mm"


class Path:
    """Base class: an analytic, immutable, timed reference path."""

    duration = 0.0

    def sample(self, t):
        if t < 0 or t > self.duration:
            raise OutOfRange(f"t={t} outside [0, {self.duration}]")
        return self._eval(min(max(t, 0.0), self.duration))

    def sample_clamped(self, t):
        return self._eval(min(max(t, 0.0), self.duration))

    def times(self, dt):
        n = int(np.floor(self.duration / dt + 1e-9))
        return np.arange(n + 1) * dt

    def check_workspace(self, geom, n=400, margin=WORKSPACE_MARGIN):
        for t in np.linspace(0.0, self.duration, n):
            pose = self._eval(t).pos
            if not kin.reachable(pose, geom, margin * geom.d4):
                raise WorkspaceViolation(f"path leaves the workspace at t={t:.4f}, pose={pose}")


@dataclass(frozen=True)
class SquarePath(Path):
    """Four full-stop quintic edges in the XY plane, starting at the
    lower-left corner and running counter-clockwise."""
    center: np.ndarray
    side: float
    accel_limit: float
    segments: tuple = field(init=False)
    duration: float = field(init=False)

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("side must be positive")
        h = self.side / 2
        c = np.asarray(self.center, dtype=float)
        corners = [c + np.array(o) for o in ((-h, -h, 0), (h, -h, 0), (h, h, 0), (-h, h, 0))]
        T = quintic_duration(self.side, self.accel_limit)
        segs = tuple(QuinticSegment(corners[k], corners[(k + 1) % 4], T) for k in range(4))
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "duration", 4 * T)

    def corners(self):
        return [s.start for s in self.segments]

    def _eval(self, t):
        T = self.segments[0].duration
        k = min(int(t // T), 3)
        sp = self.segments[k].sample(min(t - k * T, T))
        return Setpoint(sp.pos, sp.vel, sp.acc, t)


def _circle_accel_shape(tau):
    """Normalized total acceleration ``sqrt(s''^2 + (2 pi s'^2)^2)`` at unit
    duration; the physical value is ``r * 2 pi / T^2`` times this."""
    sd = 30 * tau ** 2 * (1 - tau) ** 2
    sdd = 60 * tau * (1 - tau) * (1 - 2 * tau)
    return np.hypot(sdd, 2 * np.pi * sd ** 2)


def circle_accel_peak():
    """Maximum of :func:`_circle_accel_shape` on [0, 1] (grid + bounded refine)."""
    grid = np.linspace(0.0, 1.0, 20001)
    vals = _circle_accel_shape(grid)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: -_circle_accel_shape(x), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    return max(vals[k], -res.fun)


_CIRCLE_PEAK = None


@dataclass(frozen=True)
class CirclePath(Path):
    """Full circle in the XY plane; the polar angle follows a quintic from 0
    to 2 pi.  Starts and ends at ``center + (radius, 0, 0)``."""
    center: np.ndarray
    radius: float
    accel_limit: float
    speed_limit: float = None
    duration: float = field(init=False)

    def __post_init__(self):
        global _CIRCLE_PEAK
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if _CIRCLE_PEAK is None:
            _CIRCLE_PEAK = circle_accel_peak()
        # Every kinematic bound scales as a power of 1/T, so the minimum
        # duration is available in closed form for each active constraint.
        T = np.sqrt(self.radius * 2 * np.pi * _CIRCLE_PEAK / self.accel_limit)
        if self.speed_limit:
            T = max(T, self.radius * 2 * np.pi * QUINTIC_PEAK_VEL / self.speed_limit)
        object.__setattr__(self, "duration", float(T))

    def _eval(self, t):
        s, sd, sdd = quintic(t, self.duration)
        th, thd, thdd = 2 * np.pi * s, 2 * np.pi * sd, 2 * np.pi * sdd
        c, sn = np.cos(th), np.sin(th)
        r = self.radius
        pos = np.asarray(self.center, dtype=float) + r * np.array([c, sn, 0.0])
        vel = r * thd * np.array([-sn, c, 0.0])
        acc = r * thdd * np.array([-sn, c, 0.0]) - r * thd ** 2 * np.array([c, sn, 0.0])
        return Setpoint(pos, vel, acc, t)


def square_path(spec, geom=None):
    center = np.asarray(spec.center if spec.center is not None else _default_center(geom), dtype=float)
    path = SquarePath(center, spec.size, spec.accel_limit)
    if geom is not None:
        path.check_workspace(geom)
    return path


def circle_path(spec, geom=None):
    center = np.asarray(spec.center if spec.center is not None else _default_center(geom), dtype=float)
    path = CirclePath(center, spec.size / 2, spec.accel_limit, spec.speed_limit)
    if geom is not None:
        path.check_workspace(geom)
    return path


def make_path(spec, geom=None):
    if spec.kind == "square":
        return square_path(spec, geom)
    if spec.kind == "circle":
        return circle_path(spec, geom)
    raise ValueError(f"unknown path kind {spec.kind!r}")


def _default_center(geom):
    if geom is None:
        raise ValueError("either a center or a geometry is required")
    return geom.home


def sample(path, t):
    return path.sample(t)
