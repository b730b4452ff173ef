"""Quaternion sensor fusion of 9-axis IMU streams into head orientation.

The filter is the Madgwick gradient-descent AHRS: gyro integration with a
normalized-gradient correction toward the accelerometer/magnetometer-implied
orientation.  Quaternions map body-frame vectors into the earth frame
(``v_earth = R(q) v_body``); a level, north-facing sensor reads
``accel = (0, 0, 1)`` g and a magnetic field in the x-z plane.

Head angles are extracted relative to a calibration reference pose using an
intrinsic z-then-y decomposition: positive yaw turns the head right, positive
pitch tilts it up.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence


class CalibrationUnstable(RuntimeError):
    """Raised when a calibration window is too noisy to trust."""


class GimbalMarginWarning(UserWarning):
    """Pitch is within half a degree of +/-90; yaw becomes ill-conditioned."""


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, x, y, z), Hamilton convention."""

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Sequence[float], angle_deg: float) -> "Quaternion":
        ax, ay, az = axis
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if n == 0.0:
            raise ValueError("axis must be non-zero")
        half = math.radians(angle_deg) / 2.0
        s = math.sin(half) / n
        return Quaternion(math.cos(half), ax * s, ay * s, az * s)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def canonical(self) -> "Quaternion":
        # q and -q are the same rotation; force w >= 0 at API boundaries.
        if self.w < 0.0:
            return Quaternion(-self.w, -self.x, -self.y, -self.z)
        return self

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Sequence[float]) -> tuple[float, float, float]:
        """Rotate a body-frame vector into the earth frame."""
        w, x, y, z = self.w, self.x, self.y, self.z
        vx, vy, vz = v
        return (
            (1 - 2 * (y * y + z * z)) * vx + 2 * (x * y - w * z) * vy + 2 * (x * z + w * y) * vz,
            2 * (x * y + w * z) * vx + (1 - 2 * (x * x + z * z)) * vy + 2 * (y * z - w * x) * vz,
            2 * (x * z - w * y) * vx + 2 * (y * z + w * x) * vy + (1 - 2 * (x * x + y * y)) * vz,
        )

    def rotate_inv(self, v: Sequence[float]) -> tuple[float, float, float]:
        """Rotate an earth-frame vector into the body frame."""
        return self.conjugate().rotate(v)

    def angle_to(self, other: "Quaternion") -> float:
        """Angular distance to another orientation, in degrees."""
        d = self.conjugate() * other
        return 2.0 * math.degrees(math.acos(min(1.0, abs(d.w))))


def rot_z(angle_deg: float) -> Quaternion:
    return Quaternion.from_axis_angle((0.0, 0.0, 1.0), angle_deg)


def rot_y(angle_deg: float) -> Quaternion:
    return Quaternion.from_axis_angle((0.0, 1.0, 0.0), angle_deg)


@dataclass(frozen=True)
class ImuSample:
    """One timestamped 9-axis reading: gyro rad/s, accel g, mag unit-normalized.

    ``mag`` may be None for 6-axis streams; the filter then runs without the
    magnetometer correction and yaw is held by gyro integration alone.
    """

    t: float
    gyro: tuple[float, float, float]
    accel: tuple[float, float, float]
    mag: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class FilterConfig:
    beta: float = 0.1
    sample_rate_hz: float = 100.0

    def __post_init__(self) -> None:
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")
        if self.sample_rate_hz <= 0.0:
            raise ValueError("sample_rate_hz must be > 0")


@dataclass(frozen=True)
class HeadAngles:
    """Calibration-relative head rotation: +yaw = right, +pitch = up, degrees."""

    yaw: float
    pitch: float


@dataclass(frozen=True)
class CalibrationReference:
    q_ref: Quaternion
    captured_at: float
    window_len: float


def _vec_norm(v: Sequence[float]) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def madgwick_update(state: Quaternion, sample: ImuSample, cfg: FilterConfig, dt: float) -> Quaternion:
    """Advance the orientation estimate by one IMU sample.

    With beta = 0 this reduces to pure gyro integration.  A zero-magnitude
    accel vector disables the gradient correction for the step (gyro-only);
    a missing or zero mag vector falls back to the 6-axis correction.
    Returns the re-normalized, sign-canonical quaternion.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    q0, q1, q2, q3 = state.w, state.x, state.y, state.z
    gx, gy, gz = sample.gyro

    # Rate of change of quaternion from gyroscope: 0.5 * q (x) (0, omega).
    qdot0 = 0.5 * (-q1 * gx - q2 * gy - q3 * gz)
    qdot1 = 0.5 * (q0 * gx + q2 * gz - q3 * gy)
    qdot2 = 0.5 * (q0 * gy - q1 * gz + q3 * gx)
    qdot3 = 0.5 * (q0 * gz + q1 * gy - q2 * gx)

    accel_ok = _vec_norm(sample.accel) > 0.0
    mag_ok = sample.mag is not None and _vec_norm(sample.mag) > 0.0

    if cfg.beta > 0.0 and accel_ok:
        an = _vec_norm(sample.accel)
        ax, ay, az = sample.accel[0] / an, sample.accel[1] / an, sample.accel[2] / an

        q0q0 = q0 * q0
        q1q1 = q1 * q1
        q2q2 = q2 * q2
        q3q3 = q3 * q3

        if mag_ok:
            mn = _vec_norm(sample.mag)  # type: ignore[arg-type]
            mx, my, mz = sample.mag[0] / mn, sample.mag[1] / mn, sample.mag[2] / mn

            _2q0mx = 2.0 * q0 * mx
            _2q0my = 2.0 * q0 * my
            _2q0mz = 2.0 * q0 * mz
            _2q1mx = 2.0 * q1 * mx
            _2q0 = 2.0 * q0
            _2q1 = 2.0 * q1
            _2q2 = 2.0 * q2
            _2q3 = 2.0 * q3
            _2q0q2 = 2.0 * q0 * q2
            _2q2q3 = 2.0 * q2 * q3
            q0q1 = q0 * q1
            q0q2 = q0 * q2
            q0q3 = q0 * q3
            q1q2 = q1 * q2
            q1q3 = q1 * q3
            q2q3 = q2 * q3

            # Reference direction of the earth magnetic field, rebuilt from
            # the current measurement so no a-priori field model is needed.
            hx = (mx * q0q0 - _2q0my * q3 + _2q0mz * q2 + mx * q1q1
                  + _2q1 * my * q2 + _2q1 * mz * q3 - mx * q2q2 - mx * q3q3)
            hy = (_2q0mx * q3 + my * q0q0 - _2q0mz * q1 + _2q1mx * q2
                  - my * q1q1 + my * q2q2 + _2q2 * mz * q3 - my * q3q3)
            _2bx = math.sqrt(hx * hx + hy * hy)
            _2bz = (-_2q0mx * q2 + _2q0my * q1 + mz * q0q0 + _2q1mx * q3
                    - mz * q1q1 + _2q2 * my * q3 - mz * q2q2 + mz * q3q3)
            _4bx = 2.0 * _2bx
            _4bz = 2.0 * _2bz

            # Normalized gradient of the combined gravity + field objective.
            s0 = (-_2q2 * (2.0 * q1q3 - _2q0q2 - ax) + _2q1 * (2.0 * q0q1 + _2q2q3 - ay)
                  - _2bz * q2 * (_2bx * (0.5 - q2q2 - q3q3) + _2bz * (q1q3 - q0q2) - mx)
                  + (-_2bx * q3 + _2bz * q1) * (_2bx * (q1q2 - q0q3) + _2bz * (q0q1 + q2q3) - my)
                  + _2bx * q2 * (_2bx * (q0q2 + q1q3) + _2bz * (0.5 - q1q1 - q2q2) - mz))
            s1 = (_2q3 * (2.0 * q1q3 - _2q0q2 - ax) + _2q0 * (2.0 * q0q1 + _2q2q3 - ay)
                  - 4.0 * q1 * (1 - 2.0 * q1q1 - 2.0 * q2q2 - az)
                  + _2bz * q3 * (_2bx * (0.5 - q2q2 - q3q3) + _2bz * (q1q3 - q0q2) - mx)
                  + (_2bx * q2 + _2bz * q0) * (_2bx * (q1q2 - q0q3) + _2bz * (q0q1 + q2q3) - my)
                  + (_2bx * q3 - _4bz * q1) * (_2bx * (q0q2 + q1q3) + _2bz * (0.5 - q1q1 - q2q2) - mz))
            s2 = (-_2q0 * (2.0 * q1q3 - _2q0q2 - ax) + _2q3 * (2.0 * q0q1 + _2q2q3 - ay)
                  - 4.0 * q2 * (1 - 2.0 * q1q1 - 2.0 * q2q2 - az)
                  + (-_4bx * q2 - _2bz * q0) * (_2bx * (0.5 - q2q2 - q3q3) + _2bz * (q1q3 - q0q2) - mx)
                  + (_2bx * q1 + _2bz * q3) * (_2bx * (q1q2 - q0q3) + _2bz * (q0q1 + q2q3) - my)
                  + (_2bx * q0 - _4bz * q2) * (_2bx * (q0q2 + q1q3) + _2bz * (0.5 - q1q1 - q2q2) - mz))
            s3 = (_2q1 * (2.0 * q1q3 - _2q0q2 - ax) + _2q2 * (2.0 * q0q1 + _2q2q3 - ay)
                  + (-_4bx * q3 + _2bz * q1) * (_2bx * (0.5 - q2q2 - q3q3) + _2bz * (q1q3 - q0q2) - mx)
                  + (-_2bx * q0 + _2bz * q2) * (_2bx * (q1q2 - q0q3) + _2bz * (q0q1 + q2q3) - my)
                  + _2bx * q1 * (_2bx * (q0q2 + q1q3) + _2bz * (0.5 - q1q1 - q2q2) - mz))
        else:
            _2q0 = 2.0 * q0
            _2q1 = 2.0 * q1
            _2q2 = 2.0 * q2
            _2q3 = 2.0 * q3
            _4q0 = 4.0 * q0
            _4q1 = 4.0 * q1
            _4q2 = 4.0 * q2
            _8q1 = 8.0 * q1
            _8q2 = 8.0 * q2

            s0 = _4q0 * q2q2 + _2q2 * ax + _4q0 * q1q1 - _2q1 * ay
            s1 = (_4q1 * q3q3 - _2q3 * ax + 4.0 * q0q0 * q1 - _2q0 * ay - _4q1
                  + _8q1 * q1q1 + _8q1 * q2q2 + _4q1 * az)
            s2 = (4.0 * q0q0 * q2 + _2q0 * ax + _4q2 * q3q3 - _2q3 * ay - _4q2
                  + _8q2 * q1q1 + _8q2 * q2q2 + _4q2 * az)
            s3 = 4.0 * q1q1 * q3 - _2q1 * ax + 4.0 * q2q2 * q3 - _2q2 * ay

        snorm = math.sqrt(s0 * s0 + s1 * s1 + s2 * s2 + s3 * s3)
        if snorm > 0.0:
            qdot0 -= cfg.beta * s0 / snorm
            qdot1 -= cfg.beta * s1 / snorm
            qdot2 -= cfg.beta * s2 / snorm
            qdot3 -= cfg.beta * s3 / snorm

    q0 += qdot0 * dt
    q1 += qdot1 * dt
    q2 += qdot2 * dt
    q3 += qdot3 * dt
    return Quaternion(q0, q1, q2, q3).normalized().canonical()


def sample_is_degraded(sample: ImuSample) -> bool:
    """True when accel or mag is unusable and the step ran a reduced update."""
    if _vec_norm(sample.accel) == 0.0:
        return True
    return sample.mag is not None and _vec_norm(sample.mag) == 0.0


class MadgwickFilter:
    """Single-owner sequential filter state; one update at a time, in order.

    Tracks a degraded-sample counter (zero accel / zero mag steps) and whether
    every sample so far carried a magnetometer reading.
    """

    def __init__(self, cfg: FilterConfig | None = None, state: Quaternion | None = None):
        self.cfg = cfg or FilterConfig()
        self.state = state or Quaternion.identity()
        self.degraded_samples = 0
        self.mag_used = True
        self._last_t: float | None = None

    def update(self, sample: ImuSample, dt: float | None = None) -> Quaternion:
        if dt is None:
            if self._last_t is not None and sample.t > self._last_t:
                dt = sample.t - self._last_t
            else:
                dt = 1.0 / self.cfg.sample_rate_hz
        self._last_t = sample.t
        if sample_is_degraded(sample):
            self.degraded_samples += 1
        if sample.mag is None:
            self.mag_used = False
        self.state = madgwick_update(self.state, sample, self.cfg, dt)
        return self.state


def capture_reference(
    samples: Iterable[Quaternion],
    captured_at: float = 0.0,
    window_len: float = 2.0,
    max_spread_deg: float = 5.0,
) -> CalibrationReference:
    """Average a window of orientations into the calibration reference pose.

    Samples are sign-aligned to the first one (q and -q are the same
    orientation), averaged component-wise, and re-normalized.  A window whose
    angular spread around the mean exceeds ``max_spread_deg`` raises
    CalibrationUnstable.
    """
    quats = list(samples)
    if not quats:
        raise ValueError("reference window is empty")
    if window_len < 2.0:
        raise ValueError("reference window must cover at least 2 s")
    first = quats[0]
    sw = sx = sy = sz = 0.0
    aligned = []
    for q in quats:
        if first.w * q.w + first.x * q.x + first.y * q.y + first.z * q.z < 0.0:
            q = Quaternion(-q.w, -q.x, -q.y, -q.z)
        aligned.append(q)
        sw += q.w
        sx += q.x
        sy += q.y
        sz += q.z
    n = len(aligned)
    mean = Quaternion(sw / n, sx / n, sy / n, sz / n).normalized().canonical()
    spread = max(mean.angle_to(q) for q in aligned)
    if spread > max_spread_deg:
        raise CalibrationUnstable(
            f"orientation spread {spread:.2f} deg exceeds {max_spread_deg:.2f} deg"
        )
    return CalibrationReference(q_ref=mean, captured_at=captured_at, window_len=window_len)


def quat_to_yaw_pitch(q: Quaternion, ref: CalibrationReference) -> HeadAngles:
    """Extract reference-relative yaw/pitch, intrinsic z-then-y, degrees.

    Roll is decomposed internally but discarded.  Warns with
    GimbalMarginWarning when |pitch| comes within 0.5 deg of 90; the output
    stays defined through the quaternion math.
    """
    rel = (ref.q_ref.conjugate() * q).normalized()
    w, x, y, z = rel.w, rel.x, rel.y, rel.z
    r00 = 1.0 - 2.0 * (y * y + z * z)
    r10 = 2.0 * (x * y + w * z)
    r20 = 2.0 * (x * z - w * y)
    yaw = math.degrees(math.atan2(r10, r00))
    pitch = math.degrees(math.asin(max(-1.0, min(1.0, r20))))
    if abs(pitch) >= 89.5:
        warnings.warn(
            f"pitch {pitch:.2f} deg is within 0.5 deg of gimbal singularity",
            GimbalMarginWarning,
            stacklevel=2,
        )
    return HeadAngles(yaw=yaw, pitch=pitch)


def angles_to_quat(angles: HeadAngles, ref: CalibrationReference | None = None) -> Quaternion:
    """Inverse of quat_to_yaw_pitch for zero roll: ref * Rz(yaw) * Ry(-pitch)."""
    q = rot_z(angles.yaw) * rot_y(-angles.pitch)
    if ref is not None:
        q = ref.q_ref * q
    return q.normalized().canonical()


def read_imu_jsonl(path: str) -> list[ImuSample]:
    """Load an ImuSample stream: one JSON object per line, mag keys optional."""
    out: list[ImuSample] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                mag = None
                if "mx" in rec:
                    mag = (float(rec["mx"]), float(rec["my"]), float(rec["mz"]))
                sample = ImuSample(
                    t=float(rec["t"]),
                    gyro=(float(rec["gx"]), float(rec["gy"]), float(rec["gz"])),
                    accel=(float(rec["ax"]), float(rec["ay"]), float(rec["az"])),
                    mag=mag,
                )
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad IMU record: {exc}") from exc
            if out and sample.t <= out[-1].t:
                raise ValueError(f"{path}:{lineno}: timestamps must be strictly increasing")
            out.append(sample)
    return out


def write_imu_jsonl(path: str, samples: Iterable[ImuSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            rec = {
                "t": s.t,
                "gx": s.gyro[0], "gy": s.gyro[1], "gz": s.gyro[2],
                "ax": s.accel[0], "ay": s.accel[1], "az": s.accel[2],
            }
            if s.mag is not None:
                rec.update(mx=s.mag[0], my=s.mag[1], mz=s.mag[2])
            fh.write(json.dumps(rec) + "\n")
