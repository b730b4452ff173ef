"""Scenario-driven simulation: inverse sensor models and the full pipeline.

A Scenario scripts head motion as minimum-jerk moves between yaw/pitch
targets plus cheek-twitch pulses.  The inverse sensor models turn the
orientation timeline into the 9-axis IMU stream (body-rate gyro from the
quaternion derivative, gravity and the earth field rotated into the body
frame) and the twitch events into raised-cosine IR pulses over a resting
baseline.  run_pipeline then drives the real production path end to end:
calibration phase -> orientation filter -> wire frames -> driver.

The scripted agent recreates desk-scale pointing sessions: for each target it
waits a reaction delay, performs a minimum-jerk head move to the angle that
maps onto the target center, dwells long enough to settle (scaled by a
Fitts-style index of difficulty so smaller targets take longer), and fires a
left twitch.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .actuation import (
    Channel,
    IrBaseline,
    IrSample,
    TwitchDetector,
    calibrate_ir,
)
from .driver import (
    Driver,
    DriverConfig,
    OutputEvent,
    map_to_screen,
    screen_to_angles,
)
from .evaluation import TrialRecord
from .orientation import (
    CalibrationReference,
    FilterConfig,
    HeadAngles,
    ImuSample,
    MadgwickFilter,
    Quaternion,
    angles_to_quat,
    capture_reference,
    quat_to_yaw_pitch,
)
from .wire import (
    CH_LEFT,
    CH_RIGHT,
    EDGE_PRESS,
    EDGE_RELEASE,
    STATUS_CALIBRATED,
    ClickFrame,
    FrameDecoder,
    MovementFrame,
    StatusFrame,
    encode_frame,
)

# Earth magnetic field model: unit vector, 60 deg downward inclination.  Any
# fixed vector with a non-zero horizontal component gives yaw observability.
MAG_INCLINATION_DEG = 60.0
EARTH_MAG = (
    math.cos(math.radians(MAG_INCLINATION_DEG)),
    0.0,
    -math.sin(math.radians(MAG_INCLINATION_DEG)),
)

IR_REST_COUNTS = 512.0
MAX_TARGET_DEG = 60.0  # ergonomic envelope for scripted head motion


@dataclass(frozen=True)
class Segment:
    yaw: float
    pitch: float
    duration: float

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("segment duration must be > 0")
        if abs(self.yaw) > MAX_TARGET_DEG or abs(self.pitch) > MAX_TARGET_DEG:
            raise ValueError(f"target angles must stay within +/-{MAX_TARGET_DEG} deg")


@dataclass(frozen=True)
class TwitchEvent:
    t: float
    channel: str  # "left" | "right"
    pulse_len: float = 0.2
    amplitude: float = 80.0

    def __post_init__(self) -> None:
        if self.channel not in ("left", "right"):
            raise ValueError("channel must be 'left' or 'right'")
        if self.pulse_len <= 0.0 or self.amplitude <= 0.0:
            raise ValueError("pulse_len and amplitude must be > 0")


@dataclass(frozen=True)
class NoiseSpec:
    gyro_sigma: float = 0.0   # rad/s
    gyro_bias: float = 0.0    # rad/s, constant on every axis
    accel_sigma: float = 0.0  # g
    ir_sigma: float = 0.0     # counts


@dataclass
class Scenario:
    segments: list[Segment]
    twitches: list[TwitchEvent] = field(default_factory=list)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    sample_rate: float = 100.0

    def __post_init__(self) -> None:
        if self.sample_rate <= 0.0:
            raise ValueError("sample_rate must be > 0")

    @property
    def duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    def to_json(self) -> dict:
        return {
            "segments": [asdict(s) for s in self.segments],
            "twitches": [asdict(tw) for tw in self.twitches],
            "noise": asdict(self.noise),
            "sample_rate": self.sample_rate,
        }

    @staticmethod
    def from_json(doc: dict) -> "Scenario":
        return Scenario(
            segments=[Segment(**s) for s in doc.get("segments", [])],
            twitches=[TwitchEvent(**tw) for tw in doc.get("twitches", [])],
            noise=NoiseSpec(**doc.get("noise", {})),
            sample_rate=float(doc.get("sample_rate", 100.0)),
        )


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return Scenario.from_json(json.load(fh))


def save_scenario(path: str, scenario: Scenario) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario.to_json(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class AgentParams:
    peak_speed_deg_s: float = 60.0
    reaction_delay: float = 0.15
    click_dwell: float = 0.25
    # Extra settle time per bit of pointing difficulty; keeps clicks inside
    # small targets and gives the width/completion-time trade-off.
    fitts_slope: float = 0.1

    def __post_init__(self) -> None:
        if min(self.peak_speed_deg_s, self.reaction_delay, self.click_dwell) <= 0.0:
            raise ValueError("agent parameters must be > 0")


class Trajectory:
    """Sampled C1 head-orientation timeline (yaw/pitch in degrees)."""

    def __init__(self, t: np.ndarray, yaw: np.ndarray, pitch: np.ndarray):
        self.t = t
        self.yaw = yaw
        self.pitch = pitch
        self.quats = [
            angles_to_quat(HeadAngles(float(y), float(p)))
            for y, p in zip(yaw, pitch)
        ]

    def __len__(self) -> int:
        return len(self.t)


def _minimum_jerk(tau: np.ndarray) -> np.ndarray:
    return 10.0 * tau**3 - 15.0 * tau**4 + 6.0 * tau**5


def build_trajectory(scenario: Scenario) -> Trajectory:
    """Chain minimum-jerk moves between segment targets, starting from (0, 0).

    Sampling is inclusive of the final endpoint, so the last sample matches
    the last target exactly.
    """
    rate = scenario.sample_rate
    if not scenario.segments:
        t = np.array([0.0])
        return Trajectory(t, np.zeros(1), np.zeros(1))
    total = scenario.duration
    n = int(round(total * rate))
    t = np.arange(n + 1) / rate
    t[-1] = min(t[-1], total)

    starts = np.empty(len(scenario.segments) + 1, dtype=float)
    starts[0] = 0.0
    np.cumsum([seg.duration for seg in scenario.segments], out=starts[1:])
    yaw_targets = [0.0] + [seg.yaw for seg in scenario.segments]
    pitch_targets = [0.0] + [seg.pitch for seg in scenario.segments]

    idx = np.searchsorted(starts[1:], t, side="left")
    idx = np.clip(idx, 0, len(scenario.segments) - 1)
    seg_start = starts[idx]
    seg_dur = np.array([scenario.segments[i].duration for i in idx])
    tau = np.clip((t - seg_start) / seg_dur, 0.0, 1.0)
    blend = _minimum_jerk(tau)
    y0 = np.array([yaw_targets[i] for i in idx])
    y1 = np.array([yaw_targets[i + 1] for i in idx])
    p0 = np.array([pitch_targets[i] for i in idx])
    p1 = np.array([pitch_targets[i + 1] for i in idx])
    return Trajectory(t, y0 + (y1 - y0) * blend, p0 + (p1 - p0) * blend)


def _log_vec(q: Quaternion) -> tuple[float, float, float]:
    """Rotation vector (axis * angle, rad) of a unit quaternion."""
    q = q.canonical()
    vn = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if vn < 1e-15:
        return (2.0 * q.x, 2.0 * q.y, 2.0 * q.z)
    angle = 2.0 * math.atan2(vn, q.w)
    s = angle / vn
    return (q.x * s, q.y * s, q.z * s)


def inverse_imu(
    traj: Trajectory,
    noise: NoiseSpec = NoiseSpec(),
    rng: np.random.Generator | None = None,
) -> list[ImuSample]:
    """Synthesize the 9-axis stream a rigid head following ``traj`` would emit.

    Gyro is the body-frame angular velocity recovered from the quaternion
    derivative (central differences of the quaternion log); accel is gravity
    rotated into the body frame (pure tilt, no linear acceleration); mag is
    the earth field rotated into the body frame, noise-free.
    """
    n = len(traj)
    qs = traj.quats
    t = traj.t
    gyro = np.zeros((n, 3))
    for k in range(n):
        if n == 1:
            break
        if k == 0:
            dq = qs[0].conjugate() * qs[1]
            dt = t[1] - t[0]
        elif k == n - 1:
            dq = qs[n - 2].conjugate() * qs[n - 1]
            dt = t[n - 1] - t[n - 2]
        else:
            dq = qs[k - 1].conjugate() * qs[k + 1]
            dt = t[k + 1] - t[k - 1]
        gyro[k] = _log_vec(dq)
        gyro[k] /= dt

    if rng is None:
        rng = np.random.default_rng(0)
    if noise.gyro_sigma > 0.0:
        gyro = gyro + rng.normal(0.0, noise.gyro_sigma, size=(n, 3))
    if noise.gyro_bias != 0.0:
        gyro = gyro + noise.gyro_bias
    accel_noise = (
        rng.normal(0.0, noise.accel_sigma, size=(n, 3))
        if noise.accel_sigma > 0.0 else np.zeros((n, 3))
    )

    samples: list[ImuSample] = []
    for k in range(n):
        accel = qs[k].rotate_inv((0.0, 0.0, 1.0))
        mag = qs[k].rotate_inv(EARTH_MAG)
        samples.append(ImuSample(
            t=float(t[k]),
            gyro=(float(gyro[k, 0]), float(gyro[k, 1]), float(gyro[k, 2])),
            accel=(
                float(accel[0] + accel_noise[k, 0]),
                float(accel[1] + accel_noise[k, 1]),
                float(accel[2] + accel_noise[k, 2]),
            ),
            mag=mag,
        ))
    return samples


def synth_twitch(
    events: Iterable[TwitchEvent],
    duration: float,
    sample_rate: float,
    rest: float = IR_REST_COUNTS,
    ir_sigma: float = 0.0,
    rng: np.random.Generator | None = None,
) -> list[IrSample]:
    """Raised-cosine twitch pulses over a resting IR baseline, plus noise."""
    events = sorted(events, key=lambda e: e.t)
    for channel in ("left", "right"):
        chan = [e for e in events if e.channel == channel]
        for a, b in zip(chan, chan[1:]):
            if a.t + a.pulse_len > b.t:
                raise ValueError(f"overlapping {channel} twitch pulses at t={b.t}")
    n = int(round(duration * sample_rate))
    t = np.arange(n + 1) / sample_rate
    values = {"left": np.full(n + 1, rest), "right": np.full(n + 1, rest)}
    for e in events:
        mask = (t >= e.t) & (t <= e.t + e.pulse_len)
        phase = (t[mask] - e.t) / e.pulse_len
        values[e.channel][mask] += e.amplitude * 0.5 * (1.0 - np.cos(2.0 * math.pi * phase))
    if ir_sigma > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        values["left"] = values["left"] + rng.normal(0.0, ir_sigma, size=n + 1)
        values["right"] = values["right"] + rng.normal(0.0, ir_sigma, size=n + 1)
    left = np.maximum(values["left"], 0.0)
    right = np.maximum(values["right"], 0.0)
    return [
        IrSample(t=float(t[k]), left=float(left[k]), right=float(right[k]))
        for k in range(n + 1)
    ]


@dataclass
class PipelineResult:
    events: list[OutputEvent]
    cursor_trace: list[tuple[float, int, int]]
    reference: CalibrationReference
    ir_baseline: IrBaseline
    frames: list  # every frame sent over the wire, in order
    decode_errors: dict[str, int]
    degraded_samples: int
    driver_anomalies: int
    mag_used: bool
    imu: list[ImuSample] = field(default_factory=list)
    ir: list[IrSample] = field(default_factory=list)

    @property
    def frames_sent(self) -> int:
        return len(self.frames)


_CHANNEL_BIT = {Channel.LEFT: CH_LEFT, Channel.RIGHT: CH_RIGHT}


def drive_streams(
    imu: list[ImuSample],
    ir: list[IrSample],
    cfg: DriverConfig | None = None,
    filter_cfg: FilterConfig | None = None,
    sample_rate: float = 100.0,
    cal_duration: float = 8.0,
    ref_window: float = 2.0,
) -> PipelineResult:
    """Run sensor streams through calibration, filter, wire and driver.

    The first ``cal_duration`` seconds are the calibration phase: the
    orientation reference is averaged over its final ``ref_window`` seconds
    and the IR thresholds come from the same window.  Every frame travels
    through the byte codec.  Raises CalibrationUnstable on a noisy window.
    """
    cfg = cfg or DriverConfig()
    filter_cfg = filter_cfg or FilterConfig(sample_rate_hz=sample_rate)
    if not imu or imu[-1].t < cal_duration:
        raise ValueError(f"IMU stream must cover the {cal_duration} s calibration phase")

    filt = MadgwickFilter(filter_cfg)
    cal_quats: list[Quaternion] = []
    estimates: list[Quaternion] = []
    for sample in imu:
        q = filt.update(sample)
        estimates.append(q)
        if cal_duration - ref_window <= sample.t < cal_duration:
            cal_quats.append(q)

    reference = capture_reference(cal_quats, captured_at=cal_duration, window_len=ref_window)
    if ir:
        cal_ir = [s for s in ir if cal_duration - ref_window <= s.t < cal_duration]
        if len(cal_ir) < 2:
            raise ValueError("IR stream does not cover the calibration window")
        baseline = calibrate_ir(cal_ir)
    else:
        # No IR channel in this replay: a quiet nominal baseline keeps the
        # driver path total (no click frames will be produced anyway).
        baseline = calibrate_ir([
            IrSample(0.0, IR_REST_COUNTS, IR_REST_COUNTS),
            IrSample(1.0, IR_REST_COUNTS, IR_REST_COUNTS),
        ])

    detector = TwitchDetector(baseline)
    driver = Driver(cfg)
    decoder = FrameDecoder()
    events: list[OutputEvent] = []
    trace: list[tuple[float, int, int]] = []
    frames: list = []

    def send(frame, t: float) -> None:
        frames.append(frame)
        for decoded in decoder.feed(encode_frame(frame)):
            events.extend(driver.step(decoded, t))

    ir_idx = 0
    while ir_idx < len(ir) and ir[ir_idx].t < cal_duration:
        ir_idx += 1
    sent_status = False
    for k, sample in enumerate(imu):
        if sample.t < cal_duration:
            continue
        if not sent_status:
            send(StatusFrame(code=STATUS_CALIBRATED), sample.t)
            sent_status = True
        angles = quat_to_yaw_pitch(estimates[k], reference)
        send(MovementFrame.from_degrees(angles.yaw, angles.pitch), sample.t)
        if driver.state.cursor is not None:
            trace.append((sample.t, *driver.state.cursor))
        while ir_idx < len(ir) and ir[ir_idx].t <= sample.t:
            for edge in detector.update(ir[ir_idx]):
                edge_code = EDGE_PRESS if edge.kind.value == "press" else EDGE_RELEASE
                send(ClickFrame(channels=_CHANNEL_BIT[edge.channel], edge=edge_code), sample.t)
            ir_idx += 1

    return PipelineResult(
        events=events,
        cursor_trace=trace,
        reference=reference,
        ir_baseline=baseline,
        frames=frames,
        decode_errors=dict(decoder.errors),
        degraded_samples=filt.degraded_samples,
        driver_anomalies=driver.state.anomalies,
        mag_used=filt.mag_used,
        imu=imu,
        ir=ir,
    )


def run_pipeline(
    scenario: Scenario,
    cfg: DriverConfig | None = None,
    filter_cfg: FilterConfig | None = None,
    seed: int = 0,
    cal_duration: float = 8.0,
    ref_window: float = 2.0,
) -> PipelineResult:
    """Execute the full sensing-to-events path for one scripted scenario.

    The head holds the calibration pose for ``cal_duration`` seconds before
    the scripted motion starts; scenario twitch timestamps are relative to
    motion start.  Raises CalibrationUnstable when the calibration window is
    too noisy.
    """
    full = Scenario(
        segments=[Segment(0.0, 0.0, cal_duration)] + list(scenario.segments),
        twitches=[],
        noise=scenario.noise,
        sample_rate=scenario.sample_rate,
    )
    rng = np.random.default_rng(seed)
    traj = build_trajectory(full)
    imu = inverse_imu(traj, scenario.noise, rng)
    shifted = [
        TwitchEvent(t=tw.t + cal_duration, channel=tw.channel,
                    pulse_len=tw.pulse_len, amplitude=tw.amplitude)
        for tw in scenario.twitches
    ]
    ir = synth_twitch(shifted, full.duration, scenario.sample_rate,
                      ir_sigma=scenario.noise.ir_sigma, rng=rng)
    return drive_streams(
        imu, ir,
        cfg=cfg,
        filter_cfg=filter_cfg or FilterConfig(sample_rate_hz=scenario.sample_rate),
        sample_rate=scenario.sample_rate,
        cal_duration=cal_duration,
        ref_window=ref_window,
    )


@dataclass(frozen=True)
class Target:
    cx: float
    cy: float
    width: float
    level: int = 0
    homogeneous: bool = True


def scripted_agent(
    targets: list[Target],
    params: AgentParams = AgentParams(),
    cfg: DriverConfig | None = None,
) -> Scenario:
    """Script an ideal user popping ``targets`` in order with left twitches.

    Move duration follows the minimum-jerk peak-speed relation
    (peak = 1.875 * distance / T); the pre-click dwell grows with the
    Fitts-style index of difficulty log2(D/W + 1) so small targets get more
    settle time.  Zero targets produce an empty scenario.
    """
    cfg = cfg or DriverConfig()
    pulse_len = 0.2
    post_margin = 0.15
    segments: list[Segment] = []
    twitches: list[TwitchEvent] = []
    cur = HeadAngles(0.0, 0.0)
    cur_px: tuple[float, float] = (cfg.screen_w / 2.0, cfg.screen_h / 2.0)
    now = 0.0
    for tgt in targets:
        aim = screen_to_angles(tgt.cx, tgt.cy, cfg)
        dist_deg = math.hypot(aim.yaw - cur.yaw, aim.pitch - cur.pitch)
        t_move = max(1.875 * dist_deg / params.peak_speed_deg_s, 0.1)
        dist_px = math.hypot(tgt.cx - cur_px[0], tgt.cy - cur_px[1])
        dwell = params.click_dwell + params.fitts_slope * math.log2(dist_px / tgt.width + 1.0)
        segments.append(Segment(cur.yaw, cur.pitch, params.reaction_delay))
        segments.append(Segment(aim.yaw, aim.pitch, t_move))
        segments.append(Segment(aim.yaw, aim.pitch, dwell + pulse_len + post_margin))
        twitches.append(TwitchEvent(
            t=now + params.reaction_delay + t_move + dwell,
            channel="left", pulse_len=pulse_len))
        now += params.reaction_delay + t_move + dwell + pulse_len + post_margin
        cur = aim
        cur_px = (tgt.cx, tgt.cy)
    return Scenario(segments=segments, twitches=twitches)


# Pointing-session layout: four homogeneous levels (one width each, largest
# first) and one mixed level, with per-category target counts of
# 15/level + 30 mixed (healthy) or 9/level + 12 mixed (upper limb disabled).
HOMOGENEOUS_WIDTHS = (128.0, 96.0, 64.0, 32.0)
TARGETS_PER_LEVEL = {"healthy": (15, 30), "special": (9, 12)}


def popper_targets(
    ability: str = "special",
    cfg: DriverConfig | None = None,
    seed: int = 0,
) -> list[Target]:
    """Generate the full target sequence for one pointing session.

    The homogeneous levels share one placement sequence (ending at screen
    center) so the four widths see identical movement distances; the mixed
    level is placed independently.  Every balloon fits entirely on screen.
    """
    if ability not in TARGETS_PER_LEVEL:
        raise ValueError("ability must be 'healthy' or 'special'")
    cfg = cfg or DriverConfig()
    per_level, het_count = TARGETS_PER_LEVEL[ability]
    rng = np.random.default_rng(seed)

    margin = max(HOMOGENEOUS_WIDTHS) / 2.0
    shared: list[tuple[float, float]] = []
    for _ in range(per_level - 1):
        shared.append((
            float(rng.integers(int(margin), int(cfg.screen_w - margin) + 1)),
            float(rng.integers(int(margin), int(cfg.screen_h - margin) + 1)),
        ))
    shared.append((cfg.screen_w / 2.0, cfg.screen_h / 2.0))

    targets: list[Target] = []
    for level, width in enumerate(HOMOGENEOUS_WIDTHS, start=1):
        for cx, cy in shared:
            targets.append(Target(cx=cx, cy=cy, width=width, level=level, homogeneous=True))

    het_widths = [HOMOGENEOUS_WIDTHS[i % 4] for i in range(het_count)]
    rng.shuffle(het_widths)
    for width in het_widths:
        m = width / 2.0
        targets.append(Target(
            cx=float(rng.integers(int(m), int(cfg.screen_w - m) + 1)),
            cy=float(rng.integers(int(m), int(cfg.screen_h - m) + 1)),
            width=float(width), level=5, homogeneous=False,
        ))
    return targets


@dataclass
class PopperRun:
    targets: list[Target]
    trials: list[TrialRecord]
    stalled: list[int]  # indices of targets with a missing or out-of-target click
    result: PipelineResult


def run_popper_experiment(
    ability: str = "special",
    params: AgentParams = AgentParams(),
    cfg: DriverConfig | None = None,
    seed: int = 0,
) -> PopperRun:
    """Run the scripted agent through a full pointing session and log trials.

    Trial i starts when target i appears (the previous in-target click) and
    ends at the click that pops it; the click position is the driver cursor
    at the button-down time, so wire quantization and smoothing are included.
    """
    cfg = cfg or DriverConfig()
    targets = popper_targets(ability, cfg, seed)
    scenario = scripted_agent(targets, params, cfg)
    result = run_pipeline(scenario, cfg, seed=seed)

    downs = [e for e in result.events if e.kind == "down"]
    trace_t = [p[0] for p in result.cursor_trace]

    def cursor_at(t: float) -> tuple[int, int]:
        import bisect
        i = bisect.bisect_right(trace_t, t) - 1
        i = max(i, 0)
        return result.cursor_trace[i][1], result.cursor_trace[i][2]

    trials: list[TrialRecord] = []
    stalled: list[int] = []
    t_prev = result.reference.captured_at
    for i, tgt in enumerate(targets):
        if i >= len(downs):
            stalled.append(i)
            continue
        t_end = downs[i].t
        click = cursor_at(t_end)
        if math.hypot(click[0] - tgt.cx, click[1] - tgt.cy) >= tgt.width / 2.0:
            stalled.append(i)
        path = [(float(x), float(y)) for (t, x, y) in result.cursor_trace
                if t_prev <= t <= t_end]
        if not path:
            path = [(float(click[0]), float(click[1]))]
        trials.append(TrialRecord(
            trial=i,
            width=tgt.width,
            center=(tgt.cx, tgt.cy),
            path=path,
            t_start=t_prev,
            t_end=t_end,
            miss_clicks=0,
        ))
        t_prev = t_end
    return PopperRun(targets=targets, trials=trials, stalled=stalled, result=result)
