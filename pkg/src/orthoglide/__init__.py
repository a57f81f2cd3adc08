"""Kinematics, dynamics, sensing and computed-torque control of the
Orthoglide, a three-axis translational parallel machine."""
from .params import DynParams, GeomParams, MachineParams
from .kinematics import forward_kinematics, inverse_kinematics, d_inv, passive_trig
from .dynamics import (CartesianState, forward_dynamics, inverse_dynamics_cartesian,
                       inverse_dynamics_joint, cartesian_mass_matrix, mass_matrix)
from .control import ControllerKind, Gains, gains_from_bandwidth
from .trajectory import PathSpec, make_path
from .sensors import EncoderConfig, VisionConfig
from .simulator import SimConfig, PerturbationSpec, run_simulation, compute_metrics

__version__ = "0.1.0"
