"""Filter, calibration-reference and angle-extraction behavior."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from auxilio.orientation import (
    CalibrationReference,
    CalibrationUnstable,
    FilterConfig,
    GimbalMarginWarning,
    HeadAngles,
    ImuSample,
    MadgwickFilter,
    Quaternion,
    angles_to_quat,
    capture_reference,
    madgwick_update,
    quat_to_yaw_pitch,
    rot_y,
    rot_z,
)

MAG_NORTH = (math.cos(math.radians(60.0)), 0.0, -math.sin(math.radians(60.0)))
IDENTITY_REF = CalibrationReference(Quaternion.identity(), 0.0, 2.0)


def static_sample(q_true: Quaternion, t: float = 0.0) -> ImuSample:
    """Inverse sensor model for a motionless head at orientation q_true."""
    return ImuSample(
        t=t,
        gyro=(0.0, 0.0, 0.0),
        accel=q_true.rotate_inv((0.0, 0.0, 1.0)),
        mag=q_true.rotate_inv(MAG_NORTH),
    )


def integrate_constant_rate(q0: Quaternion, omega: tuple, t: float) -> Quaternion:
    """Closed-form integration oracle for piecewise-constant body rate."""
    wx, wy, wz = omega
    speed = math.sqrt(wx * wx + wy * wy + wz * wz)
    if speed == 0.0:
        return q0
    return (q0 * Quaternion.from_axis_angle((wx, wy, wz), math.degrees(speed * t))).canonical()


# -- madgwick_update -----------------------------------------------------------


def test_static_equilibrium_holds_identity():
    cfg = FilterConfig(beta=0.1, sample_rate_hz=100.0)
    q = Quaternion.identity()
    sample = ImuSample(t=0.0, gyro=(0.0, 0.0, 0.0), accel=(0.0, 0.0, 1.0), mag=MAG_NORTH)
    for _ in range(1000):
        q_next = madgwick_update(q, sample, cfg, dt=0.01)
        assert q_next.angle_to(q) < 1e-6
        q = q_next
    assert q.angle_to(Quaternion.identity()) < 1e-6


def test_beta_zero_integrates_constant_yaw_rate():
    cfg = FilterConfig(beta=0.0, sample_rate_hz=100.0)
    rate = math.radians(10.0)
    q = Quaternion.identity()
    sample = ImuSample(t=0.0, gyro=(0.0, 0.0, rate), accel=(0.0, 0.0, 1.0), mag=MAG_NORTH)
    for _ in range(100):
        q = madgwick_update(q, sample, cfg, dt=0.01)
    angles = quat_to_yaw_pitch(q, IDENTITY_REF)
    assert angles.yaw == pytest.approx(10.0, abs=0.01)
    assert angles.pitch == pytest.approx(0.0, abs=0.01)
    oracle = integrate_constant_rate(Quaternion.identity(), (0.0, 0.0, rate), 1.0)
    assert q.angle_to(oracle) < 0.01


def test_converges_from_30deg_roll_error():
    cfg = FilterConfig(beta=0.1, sample_rate_hz=100.0)
    q_true = Quaternion.identity()
    sample = static_sample(q_true)
    q = Quaternion.from_axis_angle((1.0, 0.0, 0.0), 30.0)
    errors = []
    for _ in range(500):
        q = madgwick_update(q, sample, cfg, dt=0.01)
        errors.append(q.angle_to(q_true))
    assert errors[-1] < 0.5
    # Error decays monotonically past the initial transient, down to the
    # correction-step dither floor (the normalized gradient moves a fixed
    # beta*dt per step, so a converged estimate hunts within ~0.1 deg).
    for before, after in zip(errors[50:], errors[51:]):
        if before > 0.2:
            assert after <= before + 1e-5
    assert max(errors[-50:]) < 0.2


def test_zero_accel_falls_back_to_gyro_only():
    cfg = FilterConfig(beta=0.1, sample_rate_hz=100.0)
    rate = math.radians(20.0)
    degraded = ImuSample(t=0.0, gyro=(0.0, 0.0, rate), accel=(0.0, 0.0, 0.0), mag=None)
    q = Quaternion.identity()
    for _ in range(50):
        q = madgwick_update(q, degraded, cfg, dt=0.01)
    oracle = integrate_constant_rate(Quaternion.identity(), (0.0, 0.0, rate), 0.5)
    assert q.angle_to(oracle) < 0.01


def test_filter_counts_degraded_samples():
    filt = MadgwickFilter(FilterConfig())
    filt.update(ImuSample(t=0.0, gyro=(0, 0, 0), accel=(0, 0, 1), mag=MAG_NORTH))
    filt.update(ImuSample(t=0.01, gyro=(0, 0, 0), accel=(0, 0, 0), mag=MAG_NORTH))
    filt.update(ImuSample(t=0.02, gyro=(0, 0, 0), accel=(0, 0, 1), mag=(0.0, 0.0, 0.0)))
    assert filt.degraded_samples == 2
    assert filt.mag_used


def test_six_axis_stream_flagged():
    filt = MadgwickFilter(FilterConfig())
    filt.update(ImuSample(t=0.0, gyro=(0, 0, 0), accel=(0, 0, 1), mag=None))
    assert not filt.mag_used
    assert filt.degraded_samples == 0


def test_update_rejects_bad_dt():
    with pytest.raises(ValueError):
        madgwick_update(Quaternion.identity(), static_sample(Quaternion.identity()),
                        FilterConfig(), dt=0.0)


# -- invariants ----------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.lists(
    st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0)),
    min_size=1, max_size=60,
))
def test_norm_preserved_over_update_sequences(rates):
    cfg = FilterConfig(beta=0.1, sample_rate_hz=100.0)
    q = Quaternion.identity()
    for gx, gy, gz in rates:
        q = madgwick_update(
            q, ImuSample(t=0.0, gyro=(gx, gy, gz), accel=(0.0, 0.0, 1.0), mag=MAG_NORTH),
            cfg, dt=0.01)
        assert abs(q.norm() - 1.0) <= 1e-6


def test_gyro_consistency_against_closed_form():
    # 2 simulated seconds of constant rotation about a skew axis: stay within
    # 0.05 deg per simulated second of the exact solution.
    cfg = FilterConfig(beta=0.0, sample_rate_hz=100.0)
    omega = (math.radians(12.0), math.radians(-7.0), math.radians(20.0))
    q = Quaternion.identity()
    sample = ImuSample(t=0.0, gyro=omega, accel=(0.0, 0.0, 1.0), mag=MAG_NORTH)
    for k in range(200):
        q = madgwick_update(q, sample, cfg, dt=0.01)
        t = (k + 1) * 0.01
        oracle = integrate_constant_rate(Quaternion.identity(), omega, t)
        assert q.angle_to(oracle) <= 0.05 * max(t, 0.02)


def test_noisy_static_error_stays_under_five_degrees():
    rng = np.random.default_rng(42)
    cfg = FilterConfig(beta=0.1, sample_rate_hz=100.0)
    q_true = rot_z(12.0) * rot_y(-6.0)
    accel_true = q_true.rotate_inv((0.0, 0.0, 1.0))
    mag_true = q_true.rotate_inv(MAG_NORTH)
    gyro_sigma = math.radians(0.5)
    q = q_true
    ref = CalibrationReference(q_true, 0.0, 2.0)
    for k in range(1000):
        sample = ImuSample(
            t=k * 0.01,
            gyro=tuple(rng.normal(0.0, gyro_sigma, 3)),
            accel=tuple(np.array(accel_true) + rng.normal(0.0, 0.05, 3)),
            mag=mag_true,
        )
        q = madgwick_update(q, sample, cfg, dt=0.01)
        if k >= 500:  # steady state
            angles = quat_to_yaw_pitch(q, ref)
            assert abs(angles.yaw) < 5.0
            assert abs(angles.pitch) < 5.0


# -- capture_reference ---------------------------------------------------------


def test_reference_of_constant_window():
    q = rot_z(25.0) * rot_y(4.0)
    ref = capture_reference([q] * 50, captured_at=8.0, window_len=2.0)
    assert ref.q_ref.angle_to(q) < 1e-9
    assert ref.captured_at == 8.0


def test_reference_identifies_antipodal_pairs():
    q = (rot_z(10.0) * rot_y(-3.0)).canonical()
    neg = Quaternion(-q.w, -q.x, -q.y, -q.z)
    ref = capture_reference([q, neg, q, neg], window_len=2.0)
    assert ref.q_ref.angle_to(q) < 1e-9
    assert ref.q_ref.w >= 0.0


def test_reference_matches_eigenvector_averaging_oracle():
    rng = np.random.default_rng(7)
    center = rot_z(15.0) * rot_y(-8.0)
    window = []
    for _ in range(100):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        jitter = Quaternion.from_axis_angle(tuple(axis), float(rng.uniform(-0.5, 0.5)))
        window.append(center * jitter)
    ref = capture_reference(window, window_len=2.0)
    # Independent oracle: dominant eigenvector of the outer-product sum.
    m = np.zeros((4, 4))
    for q in window:
        v = np.array([q.w, q.x, q.y, q.z])
        if v[0] < 0:
            v = -v
        m += np.outer(v, v)
    _vals, vecs = np.linalg.eigh(m)
    avg = vecs[:, -1]
    if avg[0] < 0:
        avg = -avg
    oracle = Quaternion(*avg).normalized()
    assert ref.q_ref.angle_to(oracle) < 0.1
    assert ref.q_ref.angle_to(center) < 0.1


def test_reference_rejects_wide_spread():
    # 12 deg end-to-end: each sample sits ~6 deg from the mean, past the limit.
    window = [Quaternion.identity(), rot_z(12.0)]
    with pytest.raises(CalibrationUnstable):
        capture_reference(window, window_len=2.0)


def test_reference_rejects_short_window():
    with pytest.raises(ValueError):
        capture_reference([Quaternion.identity()], window_len=1.0)


# -- quat_to_yaw_pitch ----------------------------------------------------------


def make_ref(q: Quaternion) -> CalibrationReference:
    return CalibrationReference(q_ref=q, captured_at=8.0, window_len=2.0)


def test_angles_zero_at_reference():
    ref = make_ref(rot_z(33.0) * rot_y(5.0))
    angles = quat_to_yaw_pitch(ref.q_ref, ref)
    assert angles.yaw == pytest.approx(0.0, abs=1e-9)
    assert angles.pitch == pytest.approx(0.0, abs=1e-9)


def test_pure_yaw_rotation():
    ref = make_ref(rot_z(-20.0))
    angles = quat_to_yaw_pitch(ref.q_ref * rot_z(90.0), ref)
    assert angles.yaw == pytest.approx(90.0, abs=1e-9)
    assert angles.pitch == pytest.approx(0.0, abs=1e-9)


def rotation_matrix_angles(q: Quaternion) -> tuple[float, float]:
    """Independent oracle: build the matrix numerically, decompose z-then-y."""
    w, x, y, z = q.w, q.x, q.y, q.z
    R = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
    yaw = math.degrees(math.atan2(R[1, 0], R[0, 0]))
    pitch = math.degrees(math.asin(np.clip(R[2, 0], -1.0, 1.0)))
    return yaw, pitch


def test_composed_yaw_pitch_against_matrix_oracle():
    ref = make_ref(rot_z(7.0) * rot_y(2.0))
    q = ref.q_ref * rot_z(20.0) * rot_y(-10.0)
    angles = quat_to_yaw_pitch(q, ref)
    assert angles.yaw == pytest.approx(20.0, abs=1e-9)
    assert angles.pitch == pytest.approx(10.0, abs=1e-9)
    oracle_yaw, oracle_pitch = rotation_matrix_angles(ref.q_ref.conjugate() * q)
    assert angles.yaw == pytest.approx(oracle_yaw, abs=1e-9)
    assert angles.pitch == pytest.approx(oracle_pitch, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(
    yaw=st.floats(-179.0, 179.0),
    pitch=st.floats(-84.9, 84.9),
)
def test_angle_roundtrip_identity(yaw, pitch):
    ref = make_ref(rot_z(11.0) * rot_y(-4.0))
    q = angles_to_quat(HeadAngles(yaw, pitch), ref)
    angles = quat_to_yaw_pitch(q, ref)
    assert angles.yaw == pytest.approx(yaw, abs=1e-9)
    assert angles.pitch == pytest.approx(pitch, abs=1e-9)


def test_gimbal_margin_warning():
    ref = make_ref(Quaternion.identity())
    with pytest.warns(GimbalMarginWarning):
        quat_to_yaw_pitch(angles_to_quat(HeadAngles(0.0, 89.8)), ref)
