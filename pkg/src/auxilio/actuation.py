"""IR cheek-sensor click actuation: baseline calibration and twitch edges.

Each cheek carries one IR reflectance channel.  During calibration the
relaxed-cheek reading is characterized per channel; afterwards a reading
crossing ``thr_on`` from below emits a Press and falling back through
``thr_off`` emits a Release.  The two thresholds form a hysteresis band that
suppresses chatter around a single cut-off.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .orientation import CalibrationUnstable

K_ON_DEFAULT = 6.0
K_OFF_DEFAULT = 3.0
STD_MIN_DEFAULT = 2.0
RELAXED_STD_LIMIT = 20.0


class Channel(Enum):
    LEFT = "left"
    RIGHT = "right"


class EdgeKind(Enum):
    PRESS = "press"
    RELEASE = "release"


@dataclass(frozen=True)
class IrSample:
    """Raw ADC counts per cheek at time t (strictly increasing per stream)."""

    t: float
    left: float
    right: float


@dataclass(frozen=True)
class ChannelBaseline:
    mean: float
    std: float
    thr_on: float
    thr_off: float


@dataclass(frozen=True)
class IrBaseline:
    left: ChannelBaseline
    right: ChannelBaseline


@dataclass(frozen=True)
class TwitchEdge:
    t: float
    channel: Channel
    kind: EdgeKind


def _channel_stats(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def calibrate_ir(
    samples: Iterable[IrSample],
    k_on: float = K_ON_DEFAULT,
    k_off: float = K_OFF_DEFAULT,
    std_min: float = STD_MIN_DEFAULT,
    relaxed_limit: float = RELAXED_STD_LIMIT,
) -> IrBaseline:
    """Derive per-channel thresholds from a relaxed-cheek window.

    thr_on = mean + k_on * std, thr_off = mean + k_off * std, with the sample
    standard deviation floored at ``std_min`` counts.  A window whose raw std
    exceeds ``relaxed_limit`` on either channel is rejected as unstable (the
    cheeks were not relaxed).
    """
    if not (k_on > k_off > 0.0):
        raise ValueError("need k_on > k_off > 0")
    window = list(samples)
    if len(window) < 2:
        raise ValueError("calibration window needs at least 2 samples")
    channels = {}
    for name in ("left", "right"):
        values = [getattr(s, name) for s in window]
        mean, std = _channel_stats(values)
        if std > relaxed_limit:
            raise CalibrationUnstable(
                f"{name} IR std {std:.1f} counts exceeds relaxed limit {relaxed_limit:.1f}"
            )
        std = max(std, std_min)
        channels[name] = ChannelBaseline(
            mean=mean,
            std=std,
            thr_on=mean + k_on * std,
            thr_off=mean + k_off * std,
        )
    return IrBaseline(left=channels["left"], right=channels["right"])


class TwitchDetector:
    """Hysteresis edge detector; single-owner, samples applied in time order.

    Per channel: inactive -> Press when reading >= thr_on, active -> Release
    when reading <= thr_off.  Readings inside the band emit nothing, so Press
    and Release strictly alternate starting with Press.
    """

    def __init__(self, baseline: IrBaseline):
        self.baseline = baseline
        self.active = {Channel.LEFT: False, Channel.RIGHT: False}

    def update(self, sample: IrSample) -> list[TwitchEdge]:
        edges: list[TwitchEdge] = []
        for channel, reading, base in (
            (Channel.LEFT, sample.left, self.baseline.left),
            (Channel.RIGHT, sample.right, self.baseline.right),
        ):
            if not self.active[channel] and reading >= base.thr_on:
                self.active[channel] = True
                edges.append(TwitchEdge(t=sample.t, channel=channel, kind=EdgeKind.PRESS))
            elif self.active[channel] and reading <= base.thr_off:
                self.active[channel] = False
                edges.append(TwitchEdge(t=sample.t, channel=channel, kind=EdgeKind.RELEASE))
        return edges


def detect_twitch(sample: IrSample, baseline: IrBaseline, state: dict[Channel, bool]) -> list[TwitchEdge]:
    """Functional form of the detector: mutates ``state`` (per-channel flags)."""
    detector = TwitchDetector(baseline)
    detector.active = state
    return detector.update(sample)


def read_ir_jsonl(path: str) -> list[IrSample]:
    out: list[IrSample] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                sample = IrSample(t=float(rec["t"]), left=float(rec["left"]), right=float(rec["right"]))
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad IR record: {exc}") from exc
            if sample.left < 0 or sample.right < 0:
                raise ValueError(f"{path}:{lineno}: IR counts must be >= 0")
            if out and sample.t <= out[-1].t:
                raise ValueError(f"{path}:{lineno}: timestamps must be strictly increasing")
            out.append(sample)
    return out


def write_ir_jsonl(path: str, samples: Iterable[IrSample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps({"t": s.t, "left": s.left, "right": s.right}) + "\n")
