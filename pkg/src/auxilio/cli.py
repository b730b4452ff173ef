"""Command-line entry point for the pipeline, evaluators and the UI bridge.

Exit codes: 0 success, 1 usage error, 2 malformed input file,
3 calibration failure.  All subcommands run non-interactively; noise seeds
are explicit flags so runs are reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .driver import Driver, DriverConfig, MovementFrame, write_events_jsonl
from .evaluation import (
    DegenerateVariance,
    completion_time,
    descriptive_stats,
    f_test,
    format_stats_table,
    format_sus_table,
    format_typing_table,
    path_length,
    read_csv_column,
    read_sus_csv,
    read_trials_jsonl,
    read_typing_jsonl,
    sus_summary,
    typing_means,
)
from .orientation import CalibrationUnstable, read_imu_jsonl, write_imu_jsonl
from .actuation import read_ir_jsonl, write_ir_jsonl
from .sim import (
    NoiseSpec,
    Scenario,
    Segment,
    TwitchEvent,
    drive_streams,
    load_scenario,
    run_pipeline,
)
from .wire import read_auxw, write_auxw

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BAD_INPUT = 2
EXIT_CALIBRATION = 3

DEFAULT_PORT = 8090
PORT_ENV_VAR = "AUXILIO_PORT"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _driver_config(args: argparse.Namespace) -> DriverConfig:
    w, h = 1920, 1080
    if args.screen:
        try:
            w, h = (int(v) for v in args.screen.lower().split("x"))
        except ValueError:
            raise _UsageError(f"bad --screen value {args.screen!r}, expected WxH") from None
    return DriverConfig(
        screen_w=w,
        screen_h=h,
        range_deg=args.range_deg,
        ema_alpha=args.ema_alpha,
        invert_clicks=args.invert_clicks,
    )


def _add_driver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--screen", default=None, help="screen size WxH (default 1920x1080)")
    p.add_argument("--range-deg", type=float, default=15.0,
                   help="head rotation for full screen coverage (sensitivity)")
    p.add_argument("--ema-alpha", type=float, default=0.3, help="smoothing coefficient")
    p.add_argument("--invert-clicks", action="store_true",
                   help="swap left/right cheek to button mapping")


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _driver_config(args)
    result = run_pipeline(scenario, cfg, seed=args.seed, cal_duration=args.cal_duration)
    write_events_jsonl(args.out, result.events)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for t, x, y in result.cursor_trace:
                fh.write(json.dumps({"t": t, "x": x, "y": y}) + "\n")
    if args.capture:
        write_auxw(args.capture, result.frames)
    if args.dump_imu:
        write_imu_jsonl(args.dump_imu, result.imu)
    if args.dump_ir:
        write_ir_jsonl(args.dump_ir, result.ir)
    print(f"{len(result.events)} events from {result.frames_sent} frames -> {args.out}"
          f" (degraded samples: {result.degraded_samples},"
          f" decode errors: {sum(result.decode_errors.values())})")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    if bool(args.frames) == bool(args.imu):
        raise _UsageError("need exactly one of --frames or --imu")
    if args.frames:
        frames, state = read_auxw(args.frames)
        driver = Driver(_driver_config(args))
        events = []
        moves = 0
        for frame in frames:
            t = moves / args.rate
            if isinstance(frame, MovementFrame):
                moves += 1
                t = moves / args.rate
            events.extend(driver.step(frame, t))
        write_events_jsonl(args.out, events)
        print(f"{len(events)} events from {len(frames)} captured frames -> {args.out}"
              f" (decode errors: {state.total_errors()})")
        return EXIT_OK
    imu = read_imu_jsonl(args.imu)
    ir = read_ir_jsonl(args.ir) if args.ir else []
    result = drive_streams(
        imu, ir,
        cfg=_driver_config(args),
        sample_rate=args.rate,
        cal_duration=args.cal_duration,
    )
    write_events_jsonl(args.out, result.events)
    mag_note = "" if result.mag_used else " (6-axis stream: yaw from gyro only)"
    print(f"{len(result.events)} events from {len(imu)} IMU samples -> {args.out}{mag_note}")
    return EXIT_OK


def cmd_eval_pointing(args: argparse.Namespace) -> int:
    trials = read_trials_jsonl(args.trials)
    if not trials:
        print("no trials", file=sys.stderr)
        return EXIT_BAD_INPUT
    times = [completion_time(t) for t in trials]
    rows = [("All", descriptive_stats(times))]
    for width in sorted({t.width for t in trials}):
        group = [completion_time(t) for t in trials if t.width == width]
        rows.append((f"W={int(width)}px", descriptive_stats(group)))
    print(format_stats_table(rows))
    mean_path = sum(path_length(t.path) for t in trials) / len(trials)
    print(f"\nTrials: {len(trials)}  mean path length: {mean_path:.1f} px  "
          f"total miss-clicks: {sum(t.miss_clicks for t in trials)}")
    if args.csv:
        import csv as _csv
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["group", "n", "mean", "sd", "min", "p25", "p50", "p75", "max"])
            for label, st in rows:
                writer.writerow([label, st.n, st.mean, st.sd, st.minimum,
                                 st.p25, st.p50, st.p75, st.maximum])
    return EXIT_OK


def cmd_eval_typing(args: argparse.Namespace) -> int:
    records = read_typing_jsonl(args.log)
    if not records:
        print("no typing records", file=sys.stderr)
        return EXIT_BAD_INPUT
    rows = typing_means(records)
    print(format_typing_table(rows))
    if args.csv:
        import csv as _csv
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["sentence", "n", "fat", "sct", "miss_types", "accuracy", "wpm", "cpm"])
            for sentence, m in rows:
                writer.writerow([sentence, int(m["n"]), m["fat"], m["sct"],
                                 m["miss_types"], m["accuracy"], m["wpm"], m["cpm"]])
    return EXIT_OK


def cmd_sus(args: argparse.Namespace) -> int:
    responses = read_sus_csv(args.ratings)
    if not responses:
        print("no responses", file=sys.stderr)
        return EXIT_BAD_INPUT
    summary = sus_summary(responses)
    print(format_sus_table(summary))
    print(f"\nMean SUS score: {summary.mean_score:.2f}  grade: {summary.grade}")
    if args.csv:
        import csv as _csv
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["respondent", "score", "grade"])
            for i, (score, grade) in enumerate(zip(summary.scores, summary.grades), 1):
                writer.writerow([f"R{i}", score, grade])
            writer.writerow(["mean", summary.mean_score, summary.grade])
    return EXIT_OK


def cmd_ftest(args: argparse.Namespace) -> int:
    sample_a = read_csv_column(args.a, args.col)
    sample_b = read_csv_column(args.b, args.col)
    if len(sample_a) < 2 or len(sample_b) < 2:
        print("each sample needs at least 2 values", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        result = f_test(sample_a, sample_b)
    except DegenerateVariance as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(f"F({result.dof[0]},{result.dof[1]}) = {result.f_stat:.4f}   "
          f"p = {result.p_value:.6f}")
    return EXIT_OK


def _demo_scenario() -> Scenario:
    return Scenario(
        segments=[
            Segment(10.0, 5.0, 1.5),
            Segment(10.0, 5.0, 0.8),
            Segment(-8.0, -4.0, 1.5),
            Segment(0.0, 0.0, 1.2),
        ],
        twitches=[TwitchEvent(t=1.8, channel="left"),
                  TwitchEvent(t=3.9, channel="right")],
        noise=NoiseSpec(),
    )


def cmd_serve(args: argparse.Namespace) -> int:
    from .serve import serve_events  # deferred: needs the websockets package

    port = args.port
    if port is None:
        port = int(os.environ.get(PORT_ENV_VAR, str(DEFAULT_PORT)))
    scenario = load_scenario(args.scenario) if args.scenario else _demo_scenario()
    cfg = _driver_config(args)
    result = run_pipeline(scenario, cfg, seed=args.seed, cal_duration=args.cal_duration)
    dropped = serve_events(result.events, host=args.host, port=port,
                           speed=args.speed, loop_forever=args.loop)
    if dropped:
        print(f"dropped {dropped} events on queue overflow", file=sys.stderr)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="auxilio",
                     description="Head-mounted assistive mouse pipeline and evaluation suite")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scripted scenario through the full pipeline")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", default="events.jsonl", help="output event log")
    p.add_argument("--trace", default=None, help="optional cursor trace JSONL")
    p.add_argument("--capture", default=None, help="optional raw frame capture (.auxw)")
    p.add_argument("--dump-imu", default=None, help="also write the synthesized IMU stream (JSONL)")
    p.add_argument("--dump-ir", default=None, help="also write the synthesized IR stream (JSONL)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cal-duration", type=float, default=8.0)
    _add_driver_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="replay captured sensor streams or raw frames")
    p.add_argument("--imu", default=None, help="IMU sample JSONL")
    p.add_argument("--ir", default=None, help="IR sample JSONL")
    p.add_argument("--frames", default=None, help="raw frame capture (.auxw)")
    p.add_argument("--out", default="events.jsonl")
    p.add_argument("--rate", type=float, default=100.0, help="nominal sample rate (Hz)")
    p.add_argument("--cal-duration", type=float, default=8.0)
    _add_driver_flags(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("eval-pointing", help="descriptive statistics of pointing trials")
    p.add_argument("trials", help="trial record JSONL")
    p.add_argument("--csv", default=None, help="also write the table as CSV")
    p.set_defaults(func=cmd_eval_pointing)

    p = sub.add_parser("eval-typing", help="per-sentence typing metrics")
    p.add_argument("log", help="typing record JSONL")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_eval_typing)

    p = sub.add_parser("sus", help="score a usability questionnaire CSV")
    p.add_argument("ratings", help="CSV, one respondent per row, ten rating columns")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_sus)

    p = sub.add_parser("ftest", help="pairwise F-test for variances on a CSV column")
    p.add_argument("a", help="sample A CSV (larger-variance convention)")
    p.add_argument("b", help="sample B CSV")
    p.add_argument("--col", required=True, help="column name")
    p.set_defaults(func=cmd_ftest)

    p = sub.add_parser("serve", help="stream driver events to the UI over WebSocket")
    p.add_argument("--scenario", default=None, help="scenario JSON (default: demo sweep)")
    p.add_argument("--host", default="localhost")
    p.add_argument("--port", type=int, default=None,
                   help=f"default {DEFAULT_PORT}, or ${PORT_ENV_VAR} when set")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cal-duration", type=float, default=8.0)
    p.add_argument("--speed", type=float, default=1.0,
                   help="playback speed multiplier (0 = no pacing)")
    p.add_argument("--loop", action="store_true", help="repeat the event stream forever")
    _add_driver_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CalibrationUnstable as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}: not found", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
