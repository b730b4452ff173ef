"""Framing codec for the transmitter -> receiver -> driver byte channel.

Frame layout (all little-endian):

    SYNC  TYPE  LEN  payload...  CHK

    SYNC = 0xA5
    TYPE = 0x01 movement | 0x02 click | 0x03 status
    LEN  = payload length (fixed per type: 4 / 2 / 1)
    CHK  = XOR over TYPE, LEN and payload bytes

Movement payload: yaw, pitch as signed 16-bit centi-degrees (0.01 deg
granularity, +/-327.67 deg range).  Click payload: channel bitmask
(0x01 left, 0x02 right) + edge byte (0x01 press, 0x02 release).  Status
payload: one code byte.  The same byte format is the on-disk capture format
(.auxw files).

The decoder accepts arbitrary byte chunks, resynchronizes on the next SYNC
byte after any violation, and reports every violation through counters
rather than aborting the stream.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Union

SYNC = 0xA5

CH_LEFT = 0x01
CH_RIGHT = 0x02
CH_MASK_ALL = CH_LEFT | CH_RIGHT

EDGE_PRESS = 0x01
EDGE_RELEASE = 0x02

STATUS_CALIBRATING = 0x01
STATUS_CALIBRATED = 0x02
STATUS_MODE_ENABLED = 0x03
STATUS_MODE_DISABLED = 0x04


class FrameKind(IntEnum):
    MOVEMENT = 0x01
    CLICK = 0x02
    STATUS = 0x03


_PAYLOAD_LEN = {FrameKind.MOVEMENT: 4, FrameKind.CLICK: 2, FrameKind.STATUS: 1}
MAX_FRAME_LEN = 3 + max(_PAYLOAD_LEN.values()) + 1


class AngleRangeError(ValueError):
    """Movement angle outside the signed 16-bit centi-degree range."""


@dataclass(frozen=True)
class MovementFrame:
    """Absolute calibrated head angles in centi-degrees."""

    yaw_cdeg: int
    pitch_cdeg: int

    kind = FrameKind.MOVEMENT

    def __post_init__(self) -> None:
        for v in (self.yaw_cdeg, self.pitch_cdeg):
            if not -32768 <= v <= 32767:
                raise AngleRangeError(f"angle {v / 100.0} deg outside +/-327.68 deg")

    @classmethod
    def from_degrees(cls, yaw: float, pitch: float) -> "MovementFrame":
        return cls(yaw_cdeg=int(round(yaw * 100.0)), pitch_cdeg=int(round(pitch * 100.0)))

    @property
    def yaw_deg(self) -> float:
        return self.yaw_cdeg / 100.0

    @property
    def pitch_deg(self) -> float:
        return self.pitch_cdeg / 100.0


@dataclass(frozen=True)
class ClickFrame:
    channels: int  # bitmask: CH_LEFT | CH_RIGHT
    edge: int      # EDGE_PRESS | EDGE_RELEASE

    kind = FrameKind.CLICK

    def __post_init__(self) -> None:
        if self.channels == 0 or self.channels & ~CH_MASK_ALL:
            raise ValueError(f"click bitmask 0x{self.channels:02x} uses undefined bits")
        if self.edge not in (EDGE_PRESS, EDGE_RELEASE):
            raise ValueError(f"unknown click edge 0x{self.edge:02x}")


@dataclass(frozen=True)
class StatusFrame:
    code: int

    kind = FrameKind.STATUS

    def __post_init__(self) -> None:
        if not 0 <= self.code <= 0xFF:
            raise ValueError("status code must fit one byte")


Frame = Union[MovementFrame, ClickFrame, StatusFrame]


def encode_frame(frame: Frame) -> bytes:
    if isinstance(frame, MovementFrame):
        payload = struct.pack("<hh", frame.yaw_cdeg, frame.pitch_cdeg)
    elif isinstance(frame, ClickFrame):
        payload = bytes([frame.channels, frame.edge])
    elif isinstance(frame, StatusFrame):
        payload = bytes([frame.code])
    else:
        raise TypeError(f"not a frame: {frame!r}")
    body = bytes([frame.kind, len(payload)]) + payload
    chk = 0
    for b in body:
        chk ^= b
    return bytes([SYNC]) + body + bytes([chk])


@dataclass
class DecodeState:
    """Decoder buffer plus error counters by cause; single-owner sequential."""

    buf: bytearray = field(default_factory=bytearray)
    resyncs: int = 0
    errors: dict[str, int] = field(default_factory=lambda: {
        "garbage_bytes": 0,
        "type": 0,
        "length": 0,
        "checksum": 0,
        "payload": 0,
    })

    def total_errors(self) -> int:
        return sum(self.errors.values())


def _parse_payload(kind: FrameKind, payload: bytes) -> Frame | None:
    if kind is FrameKind.MOVEMENT:
        yaw, pitch = struct.unpack("<hh", payload)
        return MovementFrame(yaw_cdeg=yaw, pitch_cdeg=pitch)
    if kind is FrameKind.CLICK:
        channels, edge = payload[0], payload[1]
        if channels == 0 or channels & ~CH_MASK_ALL or edge not in (EDGE_PRESS, EDGE_RELEASE):
            return None
        return ClickFrame(channels=channels, edge=edge)
    return StatusFrame(code=payload[0])


def decode_frames(chunk: bytes, state: DecodeState) -> tuple[list[Frame], DecodeState]:
    """Consume a chunk, yielding every well-formed frame in order.

    On a type/length/checksum/payload violation the current SYNC byte is
    dropped and scanning resumes at the next SYNC; the matching error counter
    is incremented.  Never raises on wire data.  The retained buffer is at
    most one partial frame (< MAX_FRAME_LEN bytes).
    """
    buf = state.buf
    buf.extend(chunk)
    frames: list[Frame] = []
    while True:
        # Drop leading non-SYNC bytes.
        start = 0
        while start < len(buf) and buf[start] != SYNC:
            start += 1
        if start:
            state.errors["garbage_bytes"] += start
            del buf[:start]
        if len(buf) < 3:
            break
        kind_byte, length = buf[1], buf[2]
        if kind_byte not in (FrameKind.MOVEMENT, FrameKind.CLICK, FrameKind.STATUS):
            state.errors["type"] += 1
            state.resyncs += 1
            del buf[0]
            continue
        kind = FrameKind(kind_byte)
        if length != _PAYLOAD_LEN[kind]:
            state.errors["length"] += 1
            state.resyncs += 1
            del buf[0]
            continue
        total = 3 + length + 1
        if len(buf) < total:
            break
        chk = 0
        for b in buf[1:3 + length]:
            chk ^= b
        if chk != buf[3 + length]:
            state.errors["checksum"] += 1
            state.resyncs += 1
            del buf[0]
            continue
        frame = _parse_payload(kind, bytes(buf[3:3 + length]))
        if frame is None:
            state.errors["payload"] += 1
            state.resyncs += 1
            del buf[0]
            continue
        frames.append(frame)
        del buf[:total]
    return frames, state


class FrameDecoder:
    """Stateful wrapper around decode_frames for stream use."""

    def __init__(self) -> None:
        self.state = DecodeState()

    def feed(self, chunk: bytes) -> list[Frame]:
        frames, self.state = decode_frames(chunk, self.state)
        return frames

    @property
    def errors(self) -> dict[str, int]:
        return self.state.errors


def write_auxw(path: str, frames: list[Frame]) -> None:
    """Write a raw frame capture (.auxw): concatenated encoded frames."""
    with open(path, "wb") as fh:
        for frame in frames:
            fh.write(encode_frame(frame))


def read_auxw(path: str) -> tuple[list[Frame], DecodeState]:
    with open(path, "rb") as fh:
        data = fh.read()
    return decode_frames(data, DecodeState())
