"""Geometric and inertial parameter sets of the machine.

All values are SI.  The defaults are plausible placeholders for a machine
with a roughly 200 mm cubic workspace, not identified values.
"""
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class GeomParams:
    d4: float = 0.31  # parallelogram (rod) length
    d6: float = 0.03  # slider-to-rod offset along the actuator axis
    a: float = 0.20   # base offset of legs 2 and 3
    q_min: float = -0.40
    q_max: float = 0.10

    def __post_init__(self):
        if not self.d4 > 0:
            raise ValueError(f"d4 must be positive, got {self.d4}")
        if not self.q_min < self.q_max:
            raise ValueError("travel limits must satisfy q_min < q_max")

    @property
    def home(self):
        """Isotropic configuration: every rod parallel to its actuator axis."""
        return np.array([0.0, 0.0, self.a])

    def within_travel(self, q):
        q = np.asarray(q, dtype=float)
        return bool(np.all((q >= self.q_min) & (q <= self.q_max)))


@dataclass(frozen=True)
class DynParams:
    m_platform: float = 3.0
    m_foot: float = 2.0
    m_bar: float = 0.5
    rod_inertia: float = 0.0  # extra second moment of the rod about its centre
    gravity: tuple = (0.0, 0.0, -9.81)

    def __post_init__(self):
        masses = (self.m_platform, self.m_foot, self.m_bar, self.rod_inertia)
        if min(masses) < 0:
            raise ValueError("masses and inertias must be non-negative")
        if max(self.m_platform, self.m_foot, self.m_bar) <= 0:
            raise ValueError("at least one mass must be positive")
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))

    @property
    def g(self):
        return np.array(self.gravity)


@dataclass(frozen=True)
class MachineParams:
    geom: GeomParams = field(default_factory=GeomParams)
    dyn: DynParams = field(default_factory=DynParams)

    def with_geom(self, **kw):
        return replace(self, geom=replace(self.geom, **kw))

    def with_dyn(self, **kw):
        return replace(self, dyn=replace(self.dyn, **kw))
