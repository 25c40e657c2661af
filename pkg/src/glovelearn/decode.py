"""Turn a glove stream into notes.

Notes are triggered by a per-finger hysteresis detector on the pressure
channels. The first trigger plays the reference note; every later one moves
by the interval the trained models predict from the finger pair and the
thumb-under guess.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MIDDLE_C, THUMB_FLEX, NoteEvent, white_index_to_midi
from .models import predict_interval, predict_tu
from .sessionio import resample_window


@dataclass(frozen=True)
class DecoderConfig:
    theta_on: float = 100.0
    theta_off: float = 50.0
    p_max: float = 800.0
    debounce: float = 0.05
    reference_note: int = MIDDLE_C
    keyboard_range: tuple = (12, 63)  # A0..C8, the 88-key piano

    def __post_init__(self):
        if not 0 < self.theta_off < self.theta_on < self.p_max:
            raise ValueError("need 0 < theta_off < theta_on < p_max")
        lo, hi = self.keyboard_range
        if not lo < hi:
            raise ValueError("keyboard_range must have lo < hi")
        if self.debounce < 0:
            raise ValueError("debounce must be >= 0")

    def to_dict(self):
        return {"theta_on": self.theta_on, "theta_off": self.theta_off, "p_max": self.p_max,
                "debounce": self.debounce, "reference_note": self.reference_note,
                "keyboard_range": list(self.keyboard_range)}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "keyboard_range" in d:
            d["keyboard_range"] = tuple(d["keyboard_range"])
        return cls(**d)


@dataclass(frozen=True)
class TriggerEvent:
    t: float
    finger: int
    peak_pressure: float
    t_release: float


@dataclass(frozen=True)
class DecodedNote:
    t_on: float
    t_off: float
    finger: int
    white_index: int
    velocity: int
    tu: bool
    interval: int


def detect_triggers(stream, cfg):
    """Hysteresis trigger detection, at most one new note per frame.

    A finger fires when its pressure reaches ``theta_on`` while armed and
    re-arms once pressure drops below ``theta_off``. A crossing within
    ``debounce`` of the finger's previous trigger is swallowed. When several
    fingers fire on the same frame only the lowest finger is kept.
    """
    p = stream.pressure
    t = stream.t
    n_frames, n_fingers = p.shape
    armed = [True] * n_fingers
    open_trigger = [None] * n_fingers  # index into `found` while held
    last_fire = [-np.inf] * n_fingers
    found = []  # [t, finger, peak, t_release]
    for k in range(n_frames):
        fired_this_frame = False
        for f in range(n_fingers):
            x = p[k, f]
            if armed[f]:
                if x >= cfg.theta_on:
                    armed[f] = False
                    if t[k] - last_fire[f] < cfg.debounce or fired_this_frame:
                        continue
                    last_fire[f] = t[k]
                    fired_this_frame = True
                    found.append([t[k], f + 1, x, None])
                    open_trigger[f] = len(found) - 1
            else:
                j = open_trigger[f]
                if x < cfg.theta_off:
                    armed[f] = True
                    if j is not None:
                        found[j][3] = t[k]
                        open_trigger[f] = None
                elif j is not None and x > found[j][2]:
                    found[j][2] = x
    t_end = t[-1] if n_frames else 0.0
    return [TriggerEvent(float(a), int(b), float(c), float(t_end if d is None else d)) for a, b, c, d in found]


def compute_velocity(peak, cfg):
    v = round(1 + 126 * (peak - cfg.theta_on) / (cfg.p_max - cfg.theta_on))
    return int(min(max(v, 1), 127))


def decode_performance(stream, im, tc, cfg=None, n=None, dt=None, interval_fn=None):
    """Decode ``stream`` (flex already normalized) into notes.

    ``n`` defaults to the classifier's window length and ``dt`` to one nominal
    sample period. ``interval_fn(k, f_prev, f_curr, tu)`` replaces the learned
    interval for the k-th trigger, which is handy for oracle checks.
    """
    cfg = cfg or DecoderConfig()
    if len(stream) == 0:
        return []
    n = tc.n if n is None else n
    dt = 1.0 / stream.nominal_rate if dt is None else dt
    lo, hi = cfg.keyboard_range
    notes = []
    for k, trig in enumerate(detect_triggers(stream, cfg)):
        window = resample_window(stream, THUMB_FLEX, trig.t, n, dt)
        tu, _ = predict_tu(tc, trig.finger, window)
        if not notes:
            dn = 0
            idx = int(cfg.reference_note)
        else:
            prev = notes[-1]
            if interval_fn is None:
                dn = predict_interval(im, prev.finger, trig.finger, tu)
            else:
                dn = int(interval_fn(k, prev.finger, trig.finger, tu))
            idx = prev.white_index + dn
        idx = min(max(idx, lo), hi)
        notes.append(DecodedNote(trig.t, trig.t_release, trig.finger, idx,
                                 compute_velocity(trig.peak_pressure, cfg), bool(tu), dn))
    return notes


def notes_to_events(notes):
    """Note-on/off event list (time ordered) for decoded notes."""
    events = []
    for note in notes:
        midi = white_index_to_midi(note.white_index)
        events.append(NoteEvent(note.t_on, "on", midi, note.velocity))
        events.append(NoteEvent(note.t_off, "off", midi, 0))
    return sorted(events, key=lambda e: (e.t, e.kind != "off"))
