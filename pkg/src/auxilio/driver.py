"""Mouse-emulation driver: smoothing, screen mapping, clicks, mode gestures.

The driver is a single sequential event loop: it consumes an ordered stream
of decoded frames (movement / click / status) and emits an ordered stream of
output events (cursor moves, button transitions, mode changes).

Movement frames pass through an exponential moving average plus a deadband,
then map linearly onto the screen (full coverage at +/-range_deg).  Click
frames drive per-button press/release.  A dual-cheek twitch while the head is
pitched past +/-gesture_pitch_deg toggles the mouse between Enabled and
Disabled; the constituent twitches of a recognized gesture never emit button
events, which is why click edges arriving inside the gesture pitch zone are
deferred for up to the gesture window before being passed through.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .actuation import Channel, EdgeKind, TwitchEdge
from .orientation import HeadAngles
from .wire import (
    CH_LEFT,
    CH_RIGHT,
    EDGE_PRESS,
    ClickFrame,
    Frame,
    MovementFrame,
    StatusFrame,
)


class Button(Enum):
    LEFT = "L"
    RIGHT = "R"


class Mode(Enum):
    ENABLED = "on"
    DISABLED = "off"


@dataclass(frozen=True)
class DriverConfig:
    screen_w: int = 1920
    screen_h: int = 1080
    range_deg: float = 15.0        # head rotation for full screen coverage
    ema_alpha: float = 0.3
    deadband_deg: float = 0.015    # about one cursor pixel at 1920 px / 30 deg
    invert_clicks: bool = False
    gesture_pitch_deg: float = 35.0
    gesture_window_ms: float = 150.0
    gesture_hysteresis_deg: float = 2.0

    def __post_init__(self) -> None:
        if self.screen_w <= 0 or self.screen_h <= 0:
            raise ValueError("screen dimensions must be positive")
        if self.range_deg <= 0.0:
            raise ValueError("range_deg must be > 0")
        if not 0.0 < self.ema_alpha <= 1.0:
            raise ValueError("ema_alpha must be in (0, 1]")
        if self.deadband_deg < 0.0:
            raise ValueError("deadband_deg must be >= 0")
        if self.gesture_pitch_deg <= self.range_deg:
            raise ValueError("gesture_pitch_deg must exceed range_deg")


@dataclass(frozen=True)
class OutputEvent:
    """One emitted driver event; kind is move | down | up | mode."""

    t: float
    kind: str
    x: int | None = None
    y: int | None = None
    btn: Button | None = None
    mode: Mode | None = None

    def to_json(self) -> dict:
        rec: dict = {"t": self.t, "kind": self.kind}
        if self.kind == "move":
            rec["x"] = self.x
            rec["y"] = self.y
        elif self.kind in ("down", "up"):
            rec["btn"] = self.btn.value  # type: ignore[union-attr]
        elif self.kind == "mode":
            rec["mode"] = self.mode.value  # type: ignore[union-attr]
        return rec

    @staticmethod
    def from_json(rec: dict) -> "OutputEvent":
        kind = rec["kind"]
        return OutputEvent(
            t=float(rec["t"]),
            kind=kind,
            x=int(rec["x"]) if kind == "move" else None,
            y=int(rec["y"]) if kind == "move" else None,
            btn=Button(rec["btn"]) if kind in ("down", "up") else None,
            mode=Mode(rec["mode"]) if kind == "mode" else None,
        )


@dataclass
class DriverState:
    mode: Mode = Mode.ENABLED
    ema_yaw: float | None = None
    ema_pitch: float | None = None
    out_yaw: float | None = None
    out_pitch: float | None = None
    pressed: dict[Button, bool] = field(
        default_factory=lambda: {Button.LEFT: False, Button.RIGHT: False})
    channel_active: dict[Channel, bool] = field(
        default_factory=lambda: {Channel.LEFT: False, Channel.RIGHT: False})
    last_press_t: dict[Channel, float] = field(default_factory=dict)
    gesture_zone: str | None = None  # None | "down" | "up"
    pending: dict[Channel, list[tuple[EdgeKind, float]]] = field(
        default_factory=lambda: {Channel.LEFT: [], Channel.RIGHT: []})
    cursor: tuple[int, int] | None = None
    force_emit: bool = True          # first movement frame (or first after enable)
    anomalies: int = 0
    last_status: int | None = None


def smooth(angles: HeadAngles, state: DriverState, cfg: DriverConfig) -> HeadAngles:
    """EMA with coefficient ema_alpha, then a per-axis deadband on the output.

    The deadband freezes each output axis until the averaged value moves more
    than deadband_deg away from the last emitted value.
    """
    if state.ema_yaw is None or state.ema_pitch is None:
        state.ema_yaw = angles.yaw
        state.ema_pitch = angles.pitch
    else:
        a = cfg.ema_alpha
        state.ema_yaw += a * (angles.yaw - state.ema_yaw)
        state.ema_pitch += a * (angles.pitch - state.ema_pitch)
    if state.out_yaw is None or abs(state.ema_yaw - state.out_yaw) > cfg.deadband_deg:
        state.out_yaw = state.ema_yaw
    if state.out_pitch is None or abs(state.ema_pitch - state.out_pitch) > cfg.deadband_deg:
        state.out_pitch = state.ema_pitch
    return HeadAngles(yaw=state.out_yaw, pitch=state.out_pitch)


def map_to_screen(angles: HeadAngles, cfg: DriverConfig) -> tuple[int, int]:
    """Linear angle-to-pixel mapping, half-up rounding, saturating at edges."""
    half_w = cfg.screen_w / 2.0
    half_h = cfg.screen_h / 2.0
    x = math.floor(half_w + angles.yaw / cfg.range_deg * half_w + 0.5)
    y = math.floor(half_h - angles.pitch / cfg.range_deg * half_h + 0.5)
    return (
        min(max(x, 0), cfg.screen_w - 1),
        min(max(y, 0), cfg.screen_h - 1),
    )


def screen_to_angles(x: float, y: float, cfg: DriverConfig) -> HeadAngles:
    """Inverse of map_to_screen (exact on the unclamped interior)."""
    yaw = (x - cfg.screen_w / 2.0) / (cfg.screen_w / 2.0) * cfg.range_deg
    pitch = (cfg.screen_h / 2.0 - y) / (cfg.screen_h / 2.0) * cfg.range_deg
    return HeadAngles(yaw=yaw, pitch=pitch)


def _update_zone(state: DriverState, pitch: float, cfg: DriverConfig) -> bool:
    """Hysteretic gesture-zone tracking; returns True when the zone was left."""
    gate_on = cfg.gesture_pitch_deg
    gate_off = cfg.gesture_pitch_deg - cfg.gesture_hysteresis_deg
    if state.gesture_zone == "down":
        if pitch > -gate_off:
            state.gesture_zone = None
            state.last_press_t.clear()
            return True
    elif state.gesture_zone == "up":
        if pitch < gate_off:
            state.gesture_zone = None
            state.last_press_t.clear()
            return True
    else:
        if pitch <= -gate_on:
            state.gesture_zone = "down"
        elif pitch >= gate_on:
            state.gesture_zone = "up"
    return False


def detect_mode_gesture(
    state: DriverState,
    pitch: float,
    edges: Iterable[TwitchEdge],
    cfg: DriverConfig,
) -> Mode | None:
    """Recognize the dual-cheek mode gesture.

    Press edges on both channels within gesture_window_ms while the head is
    pitched past -gesture_pitch_deg target Disabled; past +gesture_pitch_deg
    they target Enabled.  Returns the gesture's target mode (the caller
    applies idempotence) or None.  Press memory is cleared whenever the pitch
    zone is left, so both presses must land inside one continuous zone visit.
    """
    _update_zone(state, pitch, cfg)
    fired: Mode | None = None
    for edge in edges:
        if edge.kind is not EdgeKind.PRESS or state.gesture_zone is None:
            continue
        state.last_press_t[edge.channel] = edge.t
        other = Channel.RIGHT if edge.channel is Channel.LEFT else Channel.LEFT
        t_other = state.last_press_t.get(other)
        if t_other is not None and (edge.t - t_other) * 1000.0 <= cfg.gesture_window_ms:
            fired = Mode.DISABLED if state.gesture_zone == "down" else Mode.ENABLED
            state.last_press_t.clear()
    return fired


class Driver:
    """Sequential frame consumer; configuration fixed between construction."""

    def __init__(self, cfg: DriverConfig | None = None, state: DriverState | None = None):
        self.cfg = cfg or DriverConfig()
        self.state = state or DriverState()

    # -- per-frame entry point ------------------------------------------------

    def step(self, frame: Frame, t: float) -> list[OutputEvent]:
        events = self._flush_expired(t)
        if isinstance(frame, MovementFrame):
            events += self._movement(frame, t)
        elif isinstance(frame, ClickFrame):
            events += self._click(frame, t)
        elif isinstance(frame, StatusFrame):
            self.state.last_status = frame.code
        else:
            raise TypeError(f"not a frame: {frame!r}")
        return events

    # -- movement -------------------------------------------------------------

    def _movement(self, frame: MovementFrame, t: float) -> list[OutputEvent]:
        s = self.state
        out = smooth(HeadAngles(frame.yaw_deg, frame.pitch_deg), s, self.cfg)
        events: list[OutputEvent] = []
        if _update_zone(s, s.ema_pitch if s.ema_pitch is not None else 0.0, self.cfg):
            events += self._flush_all(t)
        if s.mode is Mode.DISABLED:
            return events
        x, y = map_to_screen(out, self.cfg)
        if s.force_emit or (x, y) != s.cursor:
            s.cursor = (x, y)
            s.force_emit = False
            events.append(OutputEvent(t=t, kind="move", x=x, y=y))
        return events

    # -- clicks and gestures ----------------------------------------------------

    def _click(self, frame: ClickFrame, t: float) -> list[OutputEvent]:
        s = self.state
        events: list[OutputEvent] = []
        kind = EdgeKind.PRESS if frame.edge == EDGE_PRESS else EdgeKind.RELEASE
        for bit, channel in ((CH_LEFT, Channel.LEFT), (CH_RIGHT, Channel.RIGHT)):
            if not frame.channels & bit:
                continue
            if kind is EdgeKind.PRESS:
                events += self._press(channel, t)
            else:
                events += self._release(channel, t)
        return events

    def _press(self, channel: Channel, t: float) -> list[OutputEvent]:
        s = self.state
        if s.channel_active[channel]:
            s.anomalies += 1  # press without intervening release
            return []
        s.channel_active[channel] = True
        if s.gesture_zone is None:
            if s.mode is Mode.ENABLED:
                return self._emit_down(channel, t)
            return []
        # Inside the gesture pitch zone: defer emission so a completing
        # gesture can swallow this press.
        events: list[OutputEvent] = []
        if s.mode is Mode.ENABLED:
            s.pending[channel].append((EdgeKind.PRESS, t))
        pitch = s.ema_pitch if s.ema_pitch is not None else 0.0
        fired = detect_mode_gesture(
            s, pitch, [TwitchEdge(t=t, channel=channel, kind=EdgeKind.PRESS)], self.cfg)
        if fired is not None:
            s.pending[Channel.LEFT].clear()
            s.pending[Channel.RIGHT].clear()
            if fired is not s.mode:
                events += self._transition(fired, t)
        return events

    def _release(self, channel: Channel, t: float) -> list[OutputEvent]:
        s = self.state
        if not s.channel_active[channel]:
            s.anomalies += 1  # release without press
            return []
        s.channel_active[channel] = False
        if s.pending[channel]:
            s.pending[channel].append((EdgeKind.RELEASE, t))
            return []
        if s.mode is Mode.ENABLED:
            return self._emit_up(channel, t)
        return []

    # -- deferred-edge bookkeeping ---------------------------------------------

    def _flush_expired(self, t: float) -> list[OutputEvent]:
        s = self.state
        window_s = self.cfg.gesture_window_ms / 1000.0
        expired = [
            ch for ch in (Channel.LEFT, Channel.RIGHT)
            if s.pending[ch] and t - s.pending[ch][0][1] > window_s
        ]
        expired.sort(key=lambda ch: s.pending[ch][0][1])
        events: list[OutputEvent] = []
        for ch in expired:
            events += self._flush_channel(ch, t)
        return events

    def _flush_all(self, t: float) -> list[OutputEvent]:
        s = self.state
        order = sorted(
            (ch for ch in (Channel.LEFT, Channel.RIGHT) if s.pending[ch]),
            key=lambda ch: s.pending[ch][0][1],
        )
        events: list[OutputEvent] = []
        for ch in order:
            events += self._flush_channel(ch, t)
        return events

    def _flush_channel(self, channel: Channel, t: float) -> list[OutputEvent]:
        s = self.state
        events: list[OutputEvent] = []
        for kind, _edge_t in s.pending[channel]:
            if kind is EdgeKind.PRESS:
                events += self._emit_down(channel, t)
            else:
                events += self._emit_up(channel, t)
        s.pending[channel].clear()
        return events

    # -- emission -----------------------------------------------------------

    def _button_for(self, channel: Channel) -> Button:
        if self.cfg.invert_clicks:
            return Button.RIGHT if channel is Channel.LEFT else Button.LEFT
        return Button.LEFT if channel is Channel.LEFT else Button.RIGHT

    def _emit_down(self, channel: Channel, t: float) -> list[OutputEvent]:
        s = self.state
        btn = self._button_for(channel)
        if s.pressed[btn]:
            s.anomalies += 1
            return []
        s.pressed[btn] = True
        return [OutputEvent(t=t, kind="down", btn=btn)]

    def _emit_up(self, channel: Channel, t: float) -> list[OutputEvent]:
        s = self.state
        btn = self._button_for(channel)
        if not s.pressed[btn]:
            # Press was swallowed by a gesture or happened while disabled.
            return []
        s.pressed[btn] = False
        return [OutputEvent(t=t, kind="up", btn=btn)]

    def _transition(self, target: Mode, t: float) -> list[OutputEvent]:
        s = self.state
        events: list[OutputEvent] = []
        if target is Mode.DISABLED:
            # Force-release anything held so no button is left stuck.
            for btn in (Button.LEFT, Button.RIGHT):
                if s.pressed[btn]:
                    s.pressed[btn] = False
                    events.append(OutputEvent(t=t, kind="up", btn=btn))
            s.mode = Mode.DISABLED
            events.append(OutputEvent(t=t, kind="mode", mode=Mode.DISABLED))
        else:
            s.mode = Mode.ENABLED
            s.force_emit = True  # re-anchor the cursor on the next movement
            events.append(OutputEvent(t=t, kind="mode", mode=Mode.ENABLED))
        return events


def write_events_jsonl(path: str, events: Iterable[OutputEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(json.dumps(e.to_json()) + "\n")


def read_events_jsonl(path: str) -> list[OutputEvent]:
    out: list[OutputEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(OutputEvent.from_json(json.loads(line)))
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad event record: {exc}") from exc
    return out
