"""Acceptance gate: every release criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  Each test enforces its runtime budget.
"""

import math
import time

import numpy as np
import pytest

from helpers import (
    SUS_FOOTER_MEANS,
    SUS_FOOTER_SDS,
    SUS_MEAN_GRADE,
    SUS_MEAN_SCORE,
    SUS_ROWS,
    TYPING_MEAN_ROWS,
    check_event_legality,
    random_frame_stream,
    run_stream,
)

from auxilio.cli import main as cli_main
from auxilio.driver import DriverConfig, map_to_screen
from auxilio.evaluation import (
    SusResponse,
    accuracy_pct,
    completion_time,
    descriptive_stats,
    f_sf,
    f_test,
    read_sus_csv,
    sus_grade,
    sus_score,
    sus_summary,
    words_per_minute,
    write_trials_jsonl,
)
from auxilio.orientation import (
    CalibrationReference,
    FilterConfig,
    HeadAngles,
    ImuSample,
    MadgwickFilter,
    Quaternion,
    madgwick_update,
    quat_to_yaw_pitch,
)
from auxilio.sim import (
    EARTH_MAG,
    Scenario,
    Segment,
    build_trajectory,
    inverse_imu,
    run_popper_experiment,
)
from auxilio.wire import (
    CH_LEFT,
    CH_RIGHT,
    EDGE_PRESS,
    EDGE_RELEASE,
    ClickFrame,
    DecodeState,
    FrameDecoder,
    MovementFrame,
    StatusFrame,
    decode_frames,
    encode_frame,
)


def report(name: str, elapsed: float, budget: float) -> None:
    print(f"ACCEPTANCE PASS: {name} ({elapsed:.2f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"{name}: {elapsed:.2f}s exceeded {budget}s budget"


# 1 -------------------------------------------------------------------------------


def test_sus_exactness(fixtures_dir):
    t0 = time.perf_counter()
    responses = read_sus_csv(str(fixtures_dir / "table6.csv"))
    assert len(responses) == 15
    for resp, (ratings, score, grade) in zip(responses, SUS_ROWS):
        assert resp.ratings == ratings
        assert sus_score(resp) == pytest.approx(score, abs=1e-12)
        assert sus_grade(sus_score(resp)) == grade
    summary = sus_summary(responses)
    assert summary.mean_score == pytest.approx(SUS_MEAN_SCORE, abs=0.005)
    assert summary.grade == SUS_MEAN_GRADE
    for got, want in zip(summary.item_means, SUS_FOOTER_MEANS):
        assert got == pytest.approx(want, abs=0.005)
    for got, want in zip(summary.item_sds, SUS_FOOTER_SDS):
        assert got == pytest.approx(want, abs=0.005)
    report("SUS exactness (15 respondents, footer stats, grades)",
           time.perf_counter() - t0, 1.0)


# 2 -------------------------------------------------------------------------------


def test_typing_formula_consistency():
    t0 = time.perf_counter()
    for sentence, _device, _fat, sct, miss, acc_pub, wpm_pub in TYPING_MEAN_ROWS:
        length = len(sentence)
        acc = accuracy_pct(length, miss)
        assert acc == pytest.approx(acc_pub, abs=0.7), sentence
        wpm = words_per_minute(length, sct)
        assert wpm == pytest.approx(wpm_pub, rel=0.10), sentence
    report("typing-formula consistency (10 sentence/device mean rows)",
           time.perf_counter() - t0, 1.0)


# 3 -------------------------------------------------------------------------------


def test_filter_properties():
    t0 = time.perf_counter()
    cfg = FilterConfig(beta=0.1, sample_rate_hz=100.0)
    static = ImuSample(t=0.0, gyro=(0.0, 0.0, 0.0), accel=(0.0, 0.0, 1.0), mag=EARTH_MAG)

    # Static convergence: 30 deg initial error -> <0.5 deg within 5 s.
    for axis in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 1.0, 1.0)):
        q = Quaternion.from_axis_angle(axis, 30.0)
        for _ in range(500):
            q = madgwick_update(q, static, cfg, dt=0.01)
        assert q.angle_to(Quaternion.identity()) < 0.5, f"axis {axis}"

    # Noisy steady state: gyro sigma 0.5 deg/s, accel sigma 0.05 g -> <5 deg.
    rng = np.random.default_rng(8)
    ref = CalibrationReference(Quaternion.identity(), 0.0, 2.0)
    q = Quaternion.identity()
    for k in range(1000):
        sample = ImuSample(
            t=k * 0.01,
            gyro=tuple(rng.normal(0.0, math.radians(0.5), 3)),
            accel=tuple(np.array([0.0, 0.0, 1.0]) + rng.normal(0.0, 0.05, 3)),
            mag=EARTH_MAG,
        )
        q = madgwick_update(q, sample, cfg, dt=0.01)
        if k >= 500:
            angles = quat_to_yaw_pitch(q, ref)
            assert abs(angles.yaw) < 5.0 and abs(angles.pitch) < 5.0

    # Gyro-only integration vs closed form: within 0.05 deg per simulated second.
    beta0 = FilterConfig(beta=0.0, sample_rate_hz=100.0)
    omega = (math.radians(15.0), math.radians(-5.0), math.radians(25.0))
    speed = math.sqrt(sum(w * w for w in omega))
    spin = ImuSample(t=0.0, gyro=omega, accel=(0.0, 0.0, 1.0), mag=EARTH_MAG)
    q = Quaternion.identity()
    for k in range(300):
        q = madgwick_update(q, spin, beta0, dt=0.01)
        t = (k + 1) * 0.01
        oracle = Quaternion.from_axis_angle(omega, math.degrees(speed * t))
        assert q.angle_to(oracle) <= 0.05 * max(t, 0.02)
        assert abs(q.norm() - 1.0) <= 1e-6  # norm drift per step

    report("filter properties (convergence, noise bound, gyro closed form, norm)",
           time.perf_counter() - t0, 10.0)


# 4 -------------------------------------------------------------------------------


def test_roundtrip_oracle_randomized_scenarios():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    ref = CalibrationReference(Quaternion.identity(), 0.0, 2.0)
    for trial in range(20):
        segs = []
        for _ in range(3):
            segs.append(Segment(
                float(rng.uniform(-45.0, 45.0)),
                float(rng.uniform(-45.0, 45.0)),
                float(rng.uniform(0.8, 1.6)),
            ))
        segs.append(Segment(segs[-1].yaw, segs[-1].pitch, 1.0))
        traj = build_trajectory(Scenario(segments=segs))
        samples = inverse_imu(traj)
        filt = MadgwickFilter(FilterConfig(sample_rate_hz=100.0))
        sq = []
        for k, s in enumerate(samples):
            q = filt.update(s, dt=0.01)
            if s.t >= 2.0:
                est = quat_to_yaw_pitch(q, ref)
                sq.append((est.yaw - traj.yaw[k]) ** 2 + (est.pitch - traj.pitch[k]) ** 2)
        rms = math.sqrt(sum(sq) / len(sq))
        assert rms <= 1.0, f"scenario {trial}: RMS {rms:.3f} deg"
    report("round-trip oracle (20 randomized scenarios, RMS <= 1 deg)",
           time.perf_counter() - t0, 30.0)


# 5 -------------------------------------------------------------------------------


def random_frames(n: int, rng) -> list:
    frames = []
    for _ in range(n):
        r = rng.random()
        if r < 0.5:
            frames.append(MovementFrame(
                yaw_cdeg=int(rng.integers(-32768, 32768)),
                pitch_cdeg=int(rng.integers(-32768, 32768))))
        elif r < 0.85:
            frames.append(ClickFrame(
                channels=int(rng.choice([CH_LEFT, CH_RIGHT, CH_LEFT | CH_RIGHT])),
                edge=int(rng.choice([EDGE_PRESS, EDGE_RELEASE]))))
        else:
            frames.append(StatusFrame(code=int(rng.integers(0, 256))))
    return frames


def test_codec_acceptance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)

    # 10,000 randomized frames, random chunk boundaries, bit-exact recovery.
    frames = random_frames(10_000, rng)
    stream = b"".join(encode_frame(f) for f in frames)
    decoder = FrameDecoder()
    out = []
    pos = 0
    while pos < len(stream):
        step = int(rng.integers(1, 64))
        out += decoder.feed(stream[pos:pos + step])
        pos += step
    assert out == frames
    assert decoder.state.total_errors() == 0

    # Exhaustive single-byte corruption of a reference frame never decodes.
    reference = encode_frame(MovementFrame.from_degrees(1.0, 0.0))
    for pos in range(len(reference)):
        for value in range(256):
            if value == reference[pos]:
                continue
            corrupted = bytearray(reference)
            corrupted[pos] = value
            decoded, state = decode_frames(bytes(corrupted), DecodeState())
            assert decoded == []
            assert state.total_errors() >= 1

    # Every split point of a two-frame stream recovers both frames.
    two = (encode_frame(MovementFrame.from_degrees(-12.5, 3.25))
           + encode_frame(ClickFrame(channels=CH_LEFT, edge=EDGE_PRESS)))
    for split in range(len(two) + 1):
        d = FrameDecoder()
        got = d.feed(two[:split]) + d.feed(two[split:])
        assert len(got) == 2

    report("codec (10k round-trip, exhaustive corruption, all split points)",
           time.perf_counter() - t0, 5.0)


# 6 -------------------------------------------------------------------------------


def test_driver_legality_at_scale():
    t0 = time.perf_counter()
    cfg = DriverConfig()
    frames = random_frame_stream(100_000, seed=1234)
    events, driver = run_stream(frames, cfg)
    stats = check_event_legality(events, cfg)
    assert stats["modes"] > 0, "no mode toggles exercised"
    assert stats["downs"] > 0

    assert map_to_screen(HeadAngles(0.0, 0.0), cfg) == (960, 540)
    assert map_to_screen(HeadAngles(15.0, 0.0), cfg) == (1919, 540)

    report(f"driver legality (100k frames -> {len(events)} events, "
           f"{stats['modes']} mode changes)", time.perf_counter() - t0, 60.0)


# 7 -------------------------------------------------------------------------------


def test_desk_scale_popper_replication(tmp_path, capsys):
    t0 = time.perf_counter()
    run = run_popper_experiment("special", seed=0)
    assert len(run.targets) == 48, "layout must present 48 targets"
    assert run.stalled == [], f"stalled trials: {run.stalled}"
    assert len(run.trials) == 48

    by_width = {}
    for trial in run.trials:
        if trial.trial < 36:  # homogeneous levels carry the width effect
            by_width.setdefault(trial.width, []).append(completion_time(trial))
    means = {w: sum(v) / len(v) for w, v in by_width.items()}
    assert means[32.0] >= means[64.0] >= means[96.0] >= means[128.0], means

    log = tmp_path / "popper_trials.jsonl"
    write_trials_jsonl(str(log), run.trials)
    assert cli_main(["eval-pointing", str(log)]) == 0
    table = capsys.readouterr().out
    for column in ("Mean", "SD", "Min", "25th Percentile", "50th Percentile",
                   "75th Percentile", "Max"):
        assert column in table

    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        report(f"desk-scale pointing session (48 targets, width means "
               f"{[round(means[w], 3) for w in (32.0, 64.0, 96.0, 128.0)]})",
               elapsed, 60.0)


# 8 -------------------------------------------------------------------------------


def test_f_test_acceptance():
    t0 = time.perf_counter()

    closed_form = f_test([0.0, 4.0], [0.0, 2.0])
    assert closed_form.f_stat == pytest.approx(4.0, abs=1e-12)
    assert closed_form.p_value == pytest.approx(0.2952, abs=1e-4)

    rng = np.random.default_rng(555)
    a = list(rng.normal(0.0, 2.0, 24))
    b = list(rng.normal(0.0, 1.0, 18))
    assert f_test(a, b).f_stat * f_test(b, a).f_stat == pytest.approx(1.0, abs=1e-9)

    draws = 100_000
    xa = rng.normal(size=(draws, 11))
    xb = rng.normal(size=(draws, 11))
    ratios = xa.var(axis=1, ddof=1) / xb.var(axis=1, ddof=1)
    for f_obs in (0.8, 1.5, 2.5):
        empirical = float(np.mean(ratios >= f_obs))
        assert f_sf(f_obs, 10, 10) == pytest.approx(empirical, abs=0.01)

    report("F-test (closed form, reciprocal, Monte Carlo agreement)",
           time.perf_counter() - t0, 10.0)
