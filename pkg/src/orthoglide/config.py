"""Flat key-value experiment configuration (INI syntax, one section per module).

Every key has a default; ``dump_defaults()`` prints them with a one-line
description so a run's provenance can be diffed as plain text.  Unknown
sections or keys are rejected rather than silently ignored.
"""
import configparser
import re
from dataclasses import replace

from .control import ControllerKind
from .errors import ConfigError
from .params import DynParams, GeomParams, MachineParams
from .sensors import CharacterizationSpec, EncoderConfig, VisionConfig
from .simulator import IDENTIFICATION, PerturbationSpec, SimConfig
from .trajectory import PathSpec

# section -> [(key, default, description)]
SCHEMA = {
    "kinematics": [
        ("d4", "0.31", "parallelogram length, m"),
        ("d6", "0.03", "slider-to-rod offset, m"),
        ("a", "0.20", "base offset, m"),
        ("q_min", "-0.40", "lower actuator travel, m"),
        ("q_max", "0.10", "upper actuator travel, m"),
    ],
    "dynamics": [
        ("m_platform", "3.0", "platform mass, kg"),
        ("m_foot", "2.0", "mass carried by each slider, kg"),
        ("m_bar", "0.5", "parallelogram mass, lumped half at each end, kg"),
        ("rod_inertia", "0.0", "extra rod second moment about its centre, kg m^2"),
        ("gravity", "0 0 -9.81", "gravity vector, m/s^2"),
    ],
    "trajectory": [
        ("kind", "square", "square | circle"),
        ("size", "0.05", "square side or circle diameter, m"),
        ("accel_limit", "3.0", "peak Cartesian acceleration, m/s^2"),
        ("speed_limit", "0", "peak speed for circles, m/s (0 = none)"),
    ],
    "sensors": [
        ("encoder_resolution", "10e-6", "joint encoder quantum, m"),
        ("vision_accuracy", "10e-6", "vision noise half-width per axis, m"),
        ("vision_rate", "400", "vision sample rate, Hz"),
        ("vision_latency_periods", "1", "vision latency in sample periods"),
        ("vision_bias", "0 0 0", "constant vision bias, m"),
        ("blur_gain", "0", "extra noise half-width per m/s^2 of acceleration, s^2"),
        ("noise_kind", "uniform", "uniform | gaussian"),
    ],
    "controller": [
        ("kind", "vision_ctc", "single_axis | joint_ctc | cartesian_ctc_fkm | vision_ctc"),
        ("bandwidth", "6", "closed-loop bandwidth, Hz"),
        ("gain_scale", "1", "multiplier on the bandwidth"),
        ("derivative_cutoff", "50", "derivative filter cutoff, Hz"),
        ("feedforward", "interval", "interval | instant"),
        ("torque_limit", "0", "actuator force clamp, N (0 = none)"),
        ("integral_limit", "0", "clamp on each integral component (0 = none)"),
    ],
    "simulator": [
        ("control_rate", "400", "controller rate, Hz"),
        ("plant_dt", "1e-4", "RK4 step, s"),
        ("duration", "0", "logged duration, s (0 = path duration)"),
        ("pre_roll", "0.5", "unlogged hold at the start pose, s"),
        ("ideal_sensing", "false", "exact pose and velocity feedback"),
        ("identification", "classical", "perfect | classical | accurate"),
        ("safety_factor", "2", "divergence box half-width in units of d4/2"),
        ("seed", "0", "seed for parameter errors and sensor noise"),
    ],
    "grid": [
        ("controllers", "single_axis joint_ctc cartesian_ctc_fkm vision_ctc", "controllers"),
        ("accuracies", "coarse fine", "coarse = 10 um joint / 100 um vision, fine = 1 um / 10 um"),
        ("identifications", "classical accurate", "identification levels"),
        ("paths", "square_50mm", "square_50mm circle_50mm circle_60mm ..."),
        ("latency_periods", "1", "vision latency variants, in periods"),
        ("replicates", "5", "replicates per cell"),
        ("base_seed", "0", "replicate r uses seed base_seed + r"),
    ],
    "characterize": [
        ("distance", "0.2", "length of the linear move, m"),
        ("accelerations", "1 3 5 10", "peak accelerations, m/s^2"),
        ("rest", "2.0", "rest time before the move, s"),
        ("accuracy", "100e-6", "vision noise half-width, m"),
        ("rate", "400", "vision sample rate, Hz"),
        ("bias", "198e-6", "bias along the motion axis, m"),
        ("blur", "calibrate", "off | on | calibrate"),
        ("blur_gain", "0", "blur gain used when blur = on"),
        ("target_um", "286", "dynamic error to hit when calibrating, um"),
        ("calibration_accel", "1.0", "acceleration of the calibration point, m/s^2"),
    ],
}

ACCURACY_LEVELS = {"coarse": (10e-6, 100e-6), "fine": (1e-6, 10e-6)}


def _fresh():
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    for section, items in SCHEMA.items():
        cp[section] = {k: v for k, v, _ in items}
    return cp


def dump_defaults():
    lines = ["# orthoglide experiment configuration (all values SI unless noted)"]
    for section, items in SCHEMA.items():
        lines.append("")
        lines.append(f"[{section}]")
        for key, value, doc in items:
            lines.append(f"# {doc}")
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load(path=None, overrides=None):
    """Defaults, then the file at ``path``, then ``overrides`` given as
    ``{"section.key": value}``."""
    cp = _fresh()
    if path is not None:
        user = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        user.optionxform = str
        try:
            with open(path) as fh:
                user.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for section in user.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, value in user[section].items():
                if key not in cp[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
                cp[section][key] = value
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in SCHEMA or key not in cp[section]:
            raise ConfigError(f"unknown key {dotted}")
        cp[section][key] = str(value)
    return cp


# -- typed accessors --------------------------------------------------------

def _float(cp, section, key):
    try:
        return float(cp[section][key])
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def _int(cp, section, key):
    try:
        return int(cp[section][key])
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def _bool(cp, section, key):
    try:
        return cp.getboolean(section, key)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def _floats(cp, section, key, n=None):
    try:
        vals = [float(v) for v in cp[section][key].replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc
    if n is not None and len(vals) != n:
        raise ConfigError(f"{section}.{key} needs {n} values, got {len(vals)}")
    if not vals:
        raise ConfigError(f"{section}.{key} is empty")
    return tuple(vals)


def _words(cp, section, key):
    vals = cp[section][key].replace(",", " ").split()
    if not vals:
        raise ConfigError(f"{section}.{key} is empty")
    return vals


def _optional(x):
    return x if x > 0 else None


def machine_params(cp):
    try:
        geom = GeomParams(**{k: _float(cp, "kinematics", k) for k in ("d4", "d6", "a", "q_min", "q_max")})
        dyn = DynParams(m_platform=_float(cp, "dynamics", "m_platform"),
                        m_foot=_float(cp, "dynamics", "m_foot"),
                        m_bar=_float(cp, "dynamics", "m_bar"),
                        rod_inertia=_float(cp, "dynamics", "rod_inertia"),
                        gravity=_floats(cp, "dynamics", "gravity", 3))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return MachineParams(geom, dyn)


def path_spec(cp):
    kind = cp["trajectory"]["kind"].strip()
    if kind not in ("square", "circle"):
        raise ConfigError(f"trajectory.kind must be square or circle, got {kind!r}")
    size = _float(cp, "trajectory", "size")
    accel = _float(cp, "trajectory", "accel_limit")
    if not (size > 0 and accel > 0):
        raise ConfigError("trajectory size and accel_limit must be positive")
    return PathSpec(kind, size, None, accel, _optional(_float(cp, "trajectory", "speed_limit")))


_PATH_TOKEN = re.compile(r"^(square|circle)_([0-9.]+)mm$")


def parse_path_token(token, accel, speed_limit=None):
    m = _PATH_TOKEN.match(token)
    if not m:
        raise ConfigError(f"bad path token {token!r}; expected e.g. square_50mm")
    kind, mm = m.group(1), float(m.group(2))
    if not mm > 0:
        raise ConfigError(f"path size must be positive in {token!r}")
    return PathSpec(kind, mm * 1e-3, None, accel, speed_limit if kind == "circle" else None)


def vision_config(cp, accuracy=None, latency_periods=None, seed=0):
    rate = _float(cp, "sensors", "vision_rate")
    periods = _int(cp, "sensors", "vision_latency_periods") if latency_periods is None else latency_periods
    if periods < 0:
        raise ConfigError("vision latency must be non-negative")
    try:
        return VisionConfig(
            accuracy=_float(cp, "sensors", "vision_accuracy") if accuracy is None else accuracy,
            rate=rate, latency=periods / rate,
            static_bias=_floats(cp, "sensors", "vision_bias", 3),
            blur_gain=_float(cp, "sensors", "blur_gain"),
            noise_kind=cp["sensors"]["noise_kind"].strip(), seed=seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def controller_kind(name):
    try:
        return ControllerKind(name.strip())
    except ValueError as exc:
        raise ConfigError(f"unknown controller {name!r}") from exc


def identification(name):
    if name not in IDENTIFICATION:
        raise ConfigError(f"identification must be one of {sorted(IDENTIFICATION)}, got {name!r}")
    return IDENTIFICATION[name]


def sim_config(cp, seed=None, **changes):
    """SimConfig described by ``cp``; keyword ``changes`` override fields."""
    seed = _int(cp, "simulator", "seed") if seed is None else seed
    geom_tol, dyn_tol = identification(cp["simulator"]["identification"].strip())
    try:
        enc = EncoderConfig(_float(cp, "sensors", "encoder_resolution"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    duration = _float(cp, "simulator", "duration")
    cfg = SimConfig(
        controller=controller_kind(cp["controller"]["kind"]),
        control_rate=_float(cp, "simulator", "control_rate"),
        plant_dt=_float(cp, "simulator", "plant_dt"),
        duration=duration if duration > 0 else None,
        pre_roll=_float(cp, "simulator", "pre_roll"),
        bandwidth=_float(cp, "controller", "bandwidth"),
        gain_scale=_float(cp, "controller", "gain_scale"),
        derivative_cutoff=_float(cp, "controller", "derivative_cutoff"),
        feedforward=cp["controller"]["feedforward"].strip(),
        encoder=enc,
        vision=vision_config(cp, seed=seed),
        ideal_sensing=_bool(cp, "simulator", "ideal_sensing"),
        true_params=machine_params(cp),
        perturbation=PerturbationSpec(geom_tol, dyn_tol, seed),
        torque_limit=_optional(_float(cp, "controller", "torque_limit")),
        integral_limit=_optional(_float(cp, "controller", "integral_limit")),
        safety_factor=_float(cp, "simulator", "safety_factor"),
        seed=seed,
    )
    if changes:
        cfg = replace(cfg, **changes)
    if not cfg.bandwidth * cfg.gain_scale > 0:
        raise ConfigError("bandwidth * gain_scale must be positive")
    return cfg.validate()


def characterization(cp):
    c = "characterize"
    accels = _floats(cp, c, "accelerations")
    if min(accels) <= 0:
        raise ConfigError("characterization accelerations must be positive")
    spec = CharacterizationSpec(distance=_float(cp, c, "distance"), accelerations=accels,
                                rest=_float(cp, c, "rest"))
    if not (spec.distance > 0 and spec.rest > 0):
        raise ConfigError("characterization distance and rest must be positive")
    mode = cp[c]["blur"].strip()
    if mode not in ("off", "on", "calibrate"):
        raise ConfigError(f"characterize.blur must be off, on or calibrate, got {mode!r}")
    rate = _float(cp, c, "rate")
    try:
        vision = VisionConfig(accuracy=_float(cp, c, "accuracy"), rate=rate, latency=0.0,
                              static_bias=(_float(cp, c, "bias"), 0.0, 0.0),
                              blur_gain=_float(cp, c, "blur_gain") if mode == "on" else 0.0,
                              noise_kind=cp["sensors"]["noise_kind"].strip(),
                              seed=_int(cp, "simulator", "seed"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return spec, vision, mode, _float(cp, c, "target_um") * 1e-6, _float(cp, c, "calibration_accel")


def grid_axes(cp):
    g = "grid"
    controllers = [controller_kind(w) for w in _words(cp, g, "controllers")]
    accuracies = _words(cp, g, "accuracies")
    for a in accuracies:
        if a not in ACCURACY_LEVELS:
            raise ConfigError(f"accuracy level must be one of {sorted(ACCURACY_LEVELS)}, got {a!r}")
    idents = _words(cp, g, "identifications")
    for name in idents:
        identification(name)
    accel = _float(cp, "trajectory", "accel_limit")
    speed = _optional(_float(cp, "trajectory", "speed_limit"))
    paths = [(tok, parse_path_token(tok, accel, speed)) for tok in _words(cp, g, "paths")]
    try:
        latencies = [int(w) for w in _words(cp, g, "latency_periods")]
    except ValueError as exc:
        raise ConfigError(f"grid.latency_periods: {exc}") from exc
    if min(latencies) < 0:
        raise ConfigError("grid latencies must be non-negative")
    replicates = _int(cp, g, "replicates")
    if replicates < 1:
        raise ConfigError("grid.replicates must be at least 1")
    for axis in (controllers, accuracies, idents, paths, latencies):
        if len(set(map(str, axis))) != len(axis):
            raise ConfigError("grid axes must not repeat values")
    return dict(controllers=controllers, accuracies=accuracies, identifications=idents,
                paths=paths, latencies=latencies, replicates=replicates,
                base_seed=_int(cp, g, "base_seed"))


def as_text(cp):
    lines = []
    for section in SCHEMA:
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in cp[section].items())
        lines.append("")
    return "\n".join(lines)


def seeds(base, replicates):
    return [int(base) + r for r in range(replicates)]
