"""Domain types and white-key index arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BlackKeyError, OrderError, RangeError

N_PRESSURE = 5
N_FLEX = 5
N_IMU = 6

PRESSURE_COLUMNS = tuple(f"p{i}" for i in range(1, 6))
FLEX_COLUMNS = tuple(f"f{i}" for i in range(1, 6))
IMU_COLUMNS = ("ax", "ay", "az", "gx", "gy", "gz")
SENSOR_COLUMNS = ("t",) + PRESSURE_COLUMNS + FLEX_COLUMNS + IMU_COLUMNS

THUMB_FLEX = "f1"
DEFAULT_RATE = 150.0

# pitch classes of the white keys, in order
WHITE_PITCH_CLASSES = (0, 2, 4, 5, 7, 9, 11)
_WHITE_RANK = {pc: r for r, pc in enumerate(WHITE_PITCH_CLASSES)}

MIDDLE_C = 35  # white index of MIDI 60
MAX_WHITE_INDEX = 74  # MIDI 127 (G9)


@dataclass(frozen=True)
class SensorFrame:
    t: float
    pressure: tuple
    flex: tuple
    imu: tuple

    def __post_init__(self):
        if len(self.pressure) != N_PRESSURE or len(self.flex) != N_FLEX or len(self.imu) != N_IMU:
            raise ValueError("a frame needs 5 pressure, 5 flex and 6 IMU values")
        values = (self.t, *self.pressure, *self.flex, *self.imu)
        if not np.all(np.isfinite(values)):
            raise ValueError("sensor values must be finite")
        if self.t < 0:
            raise ValueError("frame time must be non-negative")


class SensorStream:
    """Timestamped glove frames held column-wise.

    ``t`` has shape (N,), ``pressure`` and ``flex`` (N, 5), ``imu`` (N, 6).
    Timestamps must be strictly increasing; irregular gaps are fine.
    """

    def __init__(self, t, pressure, flex, imu=None, nominal_rate=DEFAULT_RATE):
        t = np.asarray(t, dtype=float).reshape(-1)
        n = len(t)
        pressure = np.asarray(pressure, dtype=float).reshape(n, N_PRESSURE)
        flex = np.asarray(flex, dtype=float).reshape(n, N_FLEX)
        if imu is None:
            imu = np.zeros((n, N_IMU))
        imu = np.asarray(imu, dtype=float).reshape(n, N_IMU)
        for arr in (t, pressure, flex, imu):
            if not np.all(np.isfinite(arr)):
                raise ValueError("sensor values must be finite")
        if n and t[0] < 0:
            raise ValueError("frame time must be non-negative")
        if n > 1 and np.any(np.diff(t) <= 0):
            raise OrderError("timestamps must be strictly increasing")
        self.t = t
        self.pressure = pressure
        self.flex = flex
        self.imu = imu
        self.nominal_rate = float(nominal_rate)

    @classmethod
    def from_frames(cls, frames, nominal_rate=DEFAULT_RATE):
        frames = list(frames)
        if not frames:
            return cls(np.zeros(0), np.zeros((0, 5)), np.zeros((0, 5)), np.zeros((0, 6)), nominal_rate)
        return cls(
            [f.t for f in frames],
            [f.pressure for f in frames],
            [f.flex for f in frames],
            [f.imu for f in frames],
            nominal_rate,
        )

    @property
    def frames(self):
        return [
            SensorFrame(float(self.t[i]), tuple(self.pressure[i]), tuple(self.flex[i]), tuple(self.imu[i]))
            for i in range(len(self))
        ]

    def __len__(self):
        return len(self.t)

    def channel(self, name):
        """Column by CSV name, e.g. ``"p3"`` or ``"f1"``."""
        if name == "t":
            return self.t
        if name in PRESSURE_COLUMNS:
            return self.pressure[:, PRESSURE_COLUMNS.index(name)]
        if name in FLEX_COLUMNS:
            return self.flex[:, FLEX_COLUMNS.index(name)]
        if name in IMU_COLUMNS:
            return self.imu[:, IMU_COLUMNS.index(name)]
        raise KeyError(f"unknown channel {name!r}")

    def as_matrix(self):
        """(N, 17) array in CSV column order."""
        return np.column_stack([self.t, self.pressure, self.flex, self.imu])

    def replace(self, **arrays):
        kw = dict(t=self.t, pressure=self.pressure, flex=self.flex, imu=self.imu,
                  nominal_rate=self.nominal_rate)
        kw.update(arrays)
        return SensorStream(**kw)

    def __eq__(self, other):
        if not isinstance(other, SensorStream):
            return NotImplemented
        return (self.nominal_rate == other.nominal_rate
                and np.array_equal(self.as_matrix(), other.as_matrix()))

    def __repr__(self):
        span = f"{self.t[0]:.3f}..{self.t[-1]:.3f}s" if len(self) else "empty"
        return f"SensorStream({len(self)} frames, {span})"


@dataclass(frozen=True, order=True)
class NoteEvent:
    t: float
    kind: str
    midi_note: int
    velocity: int = field(default=0)

    def __post_init__(self):
        if self.kind not in ("on", "off"):
            raise ValueError(f"kind must be 'on' or 'off', got {self.kind!r}")
        if not 0 <= self.midi_note <= 127:
            raise RangeError(f"MIDI note {self.midi_note} out of range")
        if not 0 <= self.velocity <= 127:
            raise RangeError(f"velocity {self.velocity} out of range")
        if self.kind == "on" and self.velocity == 0:
            raise RangeError("note-on needs velocity >= 1")


def check_finger(f):
    f = int(f)
    if not 1 <= f <= 5:
        raise ValueError(f"finger must be in 1..5, got {f}")
    return f


def is_white(midi_note):
    return midi_note % 12 in _WHITE_RANK


def midi_to_white_index(midi_note):
    midi_note = int(midi_note)
    if not 0 <= midi_note <= 127:
        raise RangeError(f"MIDI note {midi_note} out of range")
    octave, pc = divmod(midi_note, 12)
    if pc not in _WHITE_RANK:
        raise BlackKeyError(f"MIDI note {midi_note} is a black key")
    return 7 * octave + _WHITE_RANK[pc]


def white_index_to_midi(index):
    index = int(index)
    if index < 0:
        raise RangeError(f"white index {index} is negative")
    octave, rank = divmod(index, 7)
    midi = 12 * octave + WHITE_PITCH_CLASSES[rank]
    if midi > 127:
        raise RangeError(f"white index {index} maps past MIDI 127")
    return midi
