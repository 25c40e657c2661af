"""Turn a recorded session into supervised rows.

Each played note becomes a :class:`LabeledEvent`: the finger that played it
(largest pressure integral over the note), its white-key index, the
thumb-under flag relative to the previous note, and the thumb-flex history
leading up to the onset.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import THUMB_FLEX, midi_to_white_index
from .errors import EmptyWindow, FormatError, OverlapError
from .sessionio import normalize_flex, resample_window

DEFAULT_WINDOW = 10
UNMATCHED_CLOSE = 0.1  # seconds added after the last event to close a dangling note-on


@dataclass(frozen=True)
class NoteSegment:
    t_on: float
    t_off: float
    white_index: int
    velocity: int


@dataclass(frozen=True)
class LabeledEvent:
    finger: int
    white_index: int
    tu: bool
    flex_window: tuple
    t_on: float


def segment_notes(events):
    """Pair note-on/off events into segments; one note may sound at a time."""
    segments = []
    open_on = None
    stray_offs = 0
    for e in events:
        if e.kind == "on":
            if open_on is not None:
                raise OverlapError(
                    f"note {e.midi_note} at {e.t}s starts while note {open_on.midi_note} "
                    f"from {open_on.t}s is still held")
            open_on = e
        elif open_on is not None and e.midi_note == open_on.midi_note:
            if e.t <= open_on.t:
                raise OverlapError(f"note {e.midi_note} released at or before its onset")
            segments.append(NoteSegment(open_on.t, e.t, midi_to_white_index(e.midi_note), open_on.velocity))
            open_on = None
        else:
            stray_offs += 1
    if open_on is not None:
        t_close = max(e.t for e in events) + UNMATCHED_CLOSE
        segments.append(NoteSegment(open_on.t, t_close, midi_to_white_index(open_on.midi_note), open_on.velocity))
        warnings.warn("1 unmatched note-on closed at end of session", stacklevel=2)
    if stray_offs:
        warnings.warn(f"{stray_offs} note-off event(s) without a matching note-on", stacklevel=2)
    return segments


def pressure_integrals(stream, t_on, t_off):
    """Trapezoidal integral of each pressure channel over [t_on, t_off].

    Integration uses the recorded timestamps inside the interval, plus the two
    end points linearly interpolated. The interval is clipped to the stream.
    """
    t = stream.t
    if len(t) == 0 or t_off < t[0] or t_on > t[-1]:
        raise EmptyWindow(f"no sensor data in [{t_on}, {t_off}]")
    lo = max(t_on, t[0])
    hi = min(t_off, t[-1])
    inside = (t > lo) & (t < hi)
    grid = np.concatenate(([lo], t[inside], [hi]))
    vals = np.column_stack([np.interp(grid, t, stream.pressure[:, i])
                            for i in range(stream.pressure.shape[1])])
    widths = np.diff(grid)[:, None]
    return (widths * (vals[1:] + vals[:-1]) / 2.0).sum(axis=0)


def assign_finger(stream, seg):
    integrals = pressure_integrals(stream, seg.t_on, seg.t_off)
    # argmax returns the first maximum, i.e. ties go to the thumb side
    return int(np.argmax(integrals)) + 1


def label_thumb_under(f_prev, f_curr, n_prev, n_curr):
    return (f_curr - f_prev) * (n_curr - n_prev) < 0


def build_dataset(session, n=DEFAULT_WINDOW, dt=None, normalize=True):
    """One :class:`LabeledEvent` per note segment, in time order.

    ``dt`` defaults to one nominal sample period. Flex is recalibrated with
    :func:`normalize_flex` unless ``normalize`` is false (the operation is
    idempotent, so already normalized streams are unaffected).
    """
    stream = session.sensors
    if dt is None:
        dt = 1.0 / stream.nominal_rate
    if normalize:
        stream = normalize_flex(stream)
    out = []
    prev = None
    for seg in segment_notes(session.events):
        finger = assign_finger(stream, seg)
        window = resample_window(stream, THUMB_FLEX, seg.t_on, n, dt)
        tu = False if prev is None else label_thumb_under(prev.finger, finger, prev.white_index, seg.white_index)
        ev = LabeledEvent(finger, seg.white_index, bool(tu), tuple(float(x) for x in window), seg.t_on)
        out.append(ev)
        prev = ev
    return out


def format_dataset_csv(events):
    n = len(events[0].flex_window) if events else 0
    header = ["t_on", "finger", "white_index", "tu"] + [f"w{i}" for i in range(1, n + 1)]
    lines = [",".join(header)]
    for e in events:
        row = [repr(float(e.t_on)), str(e.finger), str(e.white_index), str(int(e.tu))]
        row += [repr(float(x)) for x in e.flex_window]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_dataset_csv(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty dataset file")
    header = lines[0].split(",")
    if header[:4] != ["t_on", "finger", "white_index", "tu"]:
        raise FormatError("dataset header must start with t_on,finger,white_index,tu")
    n = len(header) - 4
    if header[4:] != [f"w{i}" for i in range(1, n + 1)]:
        raise FormatError("window columns must be w1..wn")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise FormatError(f"line {lineno}: expected {len(header)} columns")
        try:
            out.append(LabeledEvent(int(parts[1]), int(parts[2]), parts[3] == "1",
                                    tuple(float(x) for x in parts[4:]), float(parts[0])))
        except ValueError:
            raise FormatError(f"line {lineno}: bad value") from None
    return out
