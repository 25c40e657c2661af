"""Session files, the MIDI wire codec and sensor-window resampling.

A session directory holds ``sensors.csv``, ``notes.csv`` and ``meta.json``.
Note timestamps on disk are raw; ``meta.stream_offset`` is added to them on
load and subtracted again on save.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DEFAULT_RATE, SENSOR_COLUMNS, NoteEvent, SensorStream
from .errors import EmptyStream, FormatError, OrderError, RangeError, UnsupportedStatus

SENSOR_HEADER = ",".join(SENSOR_COLUMNS)
NOTE_HEADER = "t,kind,midi_note,velocity"

NOTE_ON = 0x90
NOTE_OFF = 0x80

FLEX_EPS = 1e-6


@dataclass
class SessionMeta:
    name: str = "session"
    tier: str = ""
    seed: int | None = None
    stream_offset: float = 0.0

    def to_dict(self):
        return {"name": self.name, "tier": self.tier, "seed": self.seed,
                "stream_offset": self.stream_offset}


@dataclass
class Session:
    sensors: SensorStream
    events: list
    meta: SessionMeta = field(default_factory=SessionMeta)


def _fmt(x):
    return repr(float(x))


# -- CSV -------------------------------------------------------------------

def _lines(text):
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def parse_sensor_csv(text, nominal_rate=DEFAULT_RATE):
    lines = _lines(text)
    if not lines or lines[0].strip() != SENSOR_HEADER:
        raise FormatError(f"sensor header must be {SENSOR_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(SENSOR_COLUMNS):
            raise FormatError(f"line {lineno}: expected {len(SENSOR_COLUMNS)} columns, got {len(parts)}")
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric value") from None
        if not np.all(np.isfinite(row)):
            raise FormatError(f"line {lineno}: non-finite value")
        if rows and row[0] <= rows[-1][0]:
            raise OrderError(f"line {lineno}: timestamp {row[0]} does not increase")
        rows.append(row)
    m = np.array(rows, dtype=float).reshape(len(rows), len(SENSOR_COLUMNS))
    return SensorStream(m[:, 0], m[:, 1:6], m[:, 6:11], m[:, 11:17], nominal_rate)


def format_sensor_csv(stream):
    out = [SENSOR_HEADER]
    for row in stream.as_matrix():
        out.append(",".join(_fmt(x) for x in row))
    return "\n".join(out) + "\n"


def parse_note_csv(text):
    lines = _lines(text)
    if not lines or lines[0].strip() != NOTE_HEADER:
        raise FormatError(f"note header must be {NOTE_HEADER!r}")
    events = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(f"line {lineno}: expected 4 columns, got {len(parts)}")
        t, kind, note, vel = (p.strip() for p in parts)
        if kind not in ("on", "off"):
            raise FormatError(f"line {lineno}: kind must be on/off, got {kind!r}")
        try:
            t = float(t)
            note = int(note)
            vel = int(vel)
        except ValueError:
            raise FormatError(f"line {lineno}: bad number") from None
        if not np.isfinite(t):
            raise FormatError(f"line {lineno}: non-finite time")
        if not 0 <= note <= 127 or not 0 <= vel <= 127:
            raise RangeError(f"line {lineno}: note/velocity out of 0..127")
        try:
            events.append(NoteEvent(t, kind, note, vel))
        except RangeError as exc:
            raise RangeError(f"line {lineno}: {exc}") from None
    return events


def format_note_csv(events):
    out = [NOTE_HEADER]
    for e in events:
        out.append(f"{_fmt(e.t)},{e.kind},{e.midi_note},{e.velocity}")
    return "\n".join(out) + "\n"


# -- session directories ----------------------------------------------------

def save_session(session, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    offset = session.meta.stream_offset
    raw = [NoteEvent(e.t - offset, e.kind, e.midi_note, e.velocity) for e in session.events] if offset else session.events
    (d / "sensors.csv").write_text(format_sensor_csv(session.sensors))
    (d / "notes.csv").write_text(format_note_csv(raw))
    (d / "meta.json").write_text(json.dumps(session.meta.to_dict(), indent=2, sort_keys=True) + "\n")
    return d


def load_session(directory):
    d = Path(directory)
    meta_raw = json.loads((d / "meta.json").read_text())
    meta = SessionMeta(
        name=str(meta_raw.get("name", d.name)),
        tier=str(meta_raw.get("tier", "")),
        seed=meta_raw.get("seed"),
        stream_offset=float(meta_raw.get("stream_offset", 0.0)),
    )
    sensors = parse_sensor_csv((d / "sensors.csv").read_text())
    events = parse_note_csv((d / "notes.csv").read_text())
    if meta.stream_offset:
        events = [NoteEvent(e.t + meta.stream_offset, e.kind, e.midi_note, e.velocity) for e in events]
    return Session(sensors, events, meta)


# -- MIDI ---------------------------------------------------------------------

def encode_midi_message(event, channel=0):
    if not 0 <= channel <= 15:
        raise RangeError(f"channel {channel} out of 0..15")
    status = (NOTE_ON if event.kind == "on" else NOTE_OFF) | channel
    return bytes((status, event.midi_note, event.velocity))


def decode_midi_message(data, t=0.0):
    """Inverse of :func:`encode_midi_message`.

    A note-on with velocity 0 comes back as a note-off. The channel is
    available separately through :func:`message_channel`.
    """
    if len(data) != 3:
        raise FormatError("a note message is exactly 3 bytes")
    status, note, vel = data[0], data[1], data[2]
    kind_nibble = status & 0xF0
    if kind_nibble not in (NOTE_ON, NOTE_OFF):
        raise UnsupportedStatus(f"status byte 0x{status:02X} is not note on/off")
    if note > 0x7F or vel > 0x7F:
        raise FormatError("data bytes must be < 0x80")
    kind = "on" if kind_nibble == NOTE_ON and vel > 0 else "off"
    return NoteEvent(t, kind, note, vel)


def message_channel(data):
    return data[0] & 0x0F


def write_midi_records(events, channel=0):
    """Binary stream: per message a little-endian u32 delta in ms, then 3 bytes.

    Deltas are taken between rounded absolute millisecond times, starting at 0.
    """
    out = bytearray()
    prev_ms = 0
    for e in sorted(events, key=lambda e: (e.t, e.kind != "off")):
        ms = max(int(round(e.t * 1000.0)), prev_ms)
        out += struct.pack("<I", ms - prev_ms)
        out += encode_midi_message(e, channel)
        prev_ms = ms
    return bytes(out)


def read_midi_records(data):
    if len(data) % 7:
        raise FormatError("record stream length must be a multiple of 7")
    events = []
    ms = 0
    for off in range(0, len(data), 7):
        (delta,) = struct.unpack_from("<I", data, off)
        ms += delta
        events.append(decode_midi_message(data[off + 4:off + 7], ms / 1000.0))
    return events


# -- resampling / calibration -------------------------------------------------

def resample_window(stream, channel, t_end, n, dt):
    """Channel linearly interpolated at ``t_end - (n-1)*dt, ..., t_end``.

    Times outside the recorded span take the nearest boundary value.
    """
    if n < 1 or dt <= 0:
        raise ValueError("need n >= 1 and dt > 0")
    if len(stream) == 0:
        raise EmptyStream("cannot resample an empty stream")
    times = t_end - dt * np.arange(n - 1, -1, -1, dtype=float)
    return np.interp(times, stream.t, stream.channel(channel))


def normalize_flex(stream, eps=FLEX_EPS):
    """Per-session flex recalibration: (x - median) / max(std, eps) per channel."""
    if len(stream) == 0:
        raise EmptyStream("cannot normalize an empty stream")
    flex = stream.flex
    med = np.median(flex, axis=0)
    std = np.maximum(flex.std(axis=0), eps)
    return stream.replace(flex=(flex - med) / std)
