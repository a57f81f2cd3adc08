from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orthoglide.errors import InsufficientHistory, NotYetAvailable
from orthoglide.sensors import (NOISE_FACTOR, CharacterizationSpec, DerivativeFilter,
                                EncoderConfig, VisionConfig, VisionSensor, calibrate_blur,
                                characterize, characterize_one, derivative_estimate,
                                encoder_read, vision_read)

ENC = EncoderConfig(10e-6)


def test_encoder_rounding():
    assert encoder_read(0.123456, ENC) == pytest.approx(0.12346, abs=1e-15)
    on_grid = 37 * 10e-6
    assert encoder_read(on_grid, ENC) == on_grid


def test_encoder_error_bound(rng):
    q = rng.uniform(-0.5, 0.5, 100_000)
    assert np.max(np.abs(encoder_read(q, ENC) - q)) <= 5e-6 * (1 + 1e-9)


@given(st.floats(-1, 1), st.sampled_from([1e-6, 10e-6, 1e-4]))
def test_encoder_bound_property(q, res):
    assert abs(encoder_read(q, EncoderConfig(res)) - q) <= res / 2 * (1 + 1e-9) + 1e-15


def test_vision_exact_when_noiseless():
    cfg = VisionConfig(accuracy=0.0, latency=0.0)
    pose = np.array([0.01, -0.02, 0.2])
    m = vision_read(np.arange(5) / 400, [pose] * 5, 4 / 400, cfg)
    assert np.array_equal(m.value, pose)


def test_vision_not_yet_available():
    s = VisionSensor(VisionConfig())
    s.observe(0.0, np.zeros(3))
    with pytest.raises(NotYetAvailable):
        s.read(0.001)
    assert s.read(1 / 400).timestamp == 0.0


def test_vision_latency_contract():
    cfg = VisionConfig(accuracy=0.0, latency=2 / 400)
    times = np.arange(20) / 400
    poses = [np.array([t, 0, 0]) for t in times]
    for k in range(2, 20):
        m = vision_read(times, poses, times[k], cfg)
        assert m.timestamp <= times[k] - cfg.latency + 1e-12
        assert m.value[0] == pytest.approx(m.timestamp)


def test_vision_sample_and_hold():
    s = VisionSensor(VisionConfig(accuracy=0.0, latency=0.0))
    # observations between sample instants are ignored
    for t in np.arange(0, 0.01, 1e-4):
        s.observe(t, np.array([t, 0, 0]))
    stamps = [m.timestamp for m in s.samples]
    assert np.allclose(stamps, np.arange(len(stamps)) / 400)
    assert s.read(0.0049).timestamp == pytest.approx(0.0025)


def test_vision_determinism():
    cfg = VisionConfig(seed=3)
    a, b = VisionSensor(cfg), VisionSensor(cfg)
    for k in range(50):
        a.observe(k / 400, np.zeros(3))
        b.observe(k / 400, np.zeros(3))
    assert all(np.array_equal(x.value, y.value) for x, y in zip(a.samples, b.samples))


@pytest.mark.parametrize("kind", ["uniform", "gaussian"])
def test_vision_noise_scale(kind):
    cfg = VisionConfig(accuracy=100e-6, noise_kind=kind, seed=1)
    s = VisionSensor(cfg)
    for k in range(10_000):
        s.observe(k / 400, np.zeros(3))
    err = np.array([m.value for m in s.samples])
    ratio = err.std(axis=0) / (cfg.accuracy / NOISE_FACTOR[kind])
    assert np.all((ratio > 0.8) & (ratio < 1.2))
    assert cfg.sigma == pytest.approx(cfg.accuracy / NOISE_FACTOR[kind])


def test_vision_bias():
    s = VisionSensor(VisionConfig(accuracy=0.0, static_bias=(1e-4, 0, -2e-4)))
    s.observe(0.0, np.zeros(3))
    assert np.allclose(s.samples[0].value, [1e-4, 0, -2e-4])


def test_vision_config_validation():
    with pytest.raises(ValueError):
        VisionConfig(latency=0.001)
    with pytest.raises(ValueError):
        VisionConfig(noise_kind="laplace")


# -- derivative filter ----------------------------------------------------

def test_derivative_needs_two_samples():
    with pytest.raises(InsufficientHistory):
        derivative_estimate([0.0], [[1.0, 2.0, 3.0]])


def test_derivative_constant_stream():
    t = np.arange(200) / 400
    est = derivative_estimate(t, np.ones((200, 3)))
    assert np.allclose(est[-1], 0)


def test_derivative_ramp():
    v, cutoff = 0.3, 50.0
    tau = 1 / (2 * np.pi * cutoff)
    dt = 1 / 400
    n = int(np.ceil(5 * tau / dt)) + 2
    t = np.arange(n) * dt
    est = derivative_estimate(t, v * t, cutoff)
    assert est[-1] == pytest.approx(v, rel=0.01)
    # first-order lag from zero: v (1 - (1 - alpha)^k)
    alpha = DerivativeFilter(cutoff).alpha(dt)
    expect = v * (1 - (1 - alpha) ** np.arange(n))
    assert np.allclose(est, expect, atol=1e-12)


def test_derivative_held_input_bounded():
    # a held signal read 5x faster than it updates: steps of `step` every 5 samples
    dt, step, period = 1 / 2000, 1e-4, 5
    t = np.arange(400) * dt
    held = step * np.floor(np.arange(400) / period)
    alpha = DerivativeFilter(50.0, dim=1).alpha(dt)
    est = derivative_estimate(t, held, 50.0)
    # each step adds at most (step/dt) * alpha to the estimate
    assert np.max(np.diff(est)) <= step / dt * alpha * (1 + 1e-12)
    # periodic steady state of the impulse train bounds the whole response
    peak = step / dt * alpha / (1 - (1 - alpha) ** period)
    assert np.max(est) <= peak * (1 + 1e-12)
    assert np.all(est >= 0)


def test_filter_snapshot_restore():
    f = DerivativeFilter()
    f.update(0.0, np.zeros(3))
    snap = f.snapshot()
    f.update(0.01, np.ones(3))
    f.restore(snap)
    assert np.allclose(f.estimate, 0)


# -- characterization -------------------------------------------------------

BASE = VisionConfig(accuracy=100e-6, latency=0.0, static_bias=(198e-6, 0, 0), seed=7)


def test_static_error_reproduces_bias():
    row = characterize_one(BASE, 1.0)
    assert row.static_error == pytest.approx(198e-6, rel=0.05)


def test_blur_off_is_flat():
    rows = characterize(BASE)
    d = np.array([r.dynamic_error for r in rows])
    sigma = BASE.sigma
    # sample std of n uniform draws: relative spread ~ 1/sqrt(n)
    assert np.all(np.abs(d / sigma - 1) < 4 * np.sqrt(0.4 / min(r.samples_motion for r in rows)))


def test_blur_calibration():
    g = calibrate_blur(BASE)
    cfg = replace(BASE, blur_gain=g)
    rows = characterize(cfg)
    assert rows[0].dynamic_error == pytest.approx(286e-6, rel=1e-9)
    d = [r.dynamic_error for r in rows]
    assert all(b > a for a, b in zip(d, d[1:]))


def test_characterization_spec_axis():
    spec = CharacterizationSpec(axis=1, accelerations=(2.0,))
    row = characterize_one(replace(BASE, static_bias=(0, 5e-5, 0)), 2.0, spec)
    assert row.static_error == pytest.approx(5e-5, rel=0.3)
