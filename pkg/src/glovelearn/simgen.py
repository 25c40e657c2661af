"""Synthetic glove performances with known ground truth.

:func:`generate_score` scripts a monophonic right-hand performance (notes,
fingers, timing) for one of seven complexity tiers, and
:func:`render_sensors` turns it into a glove recording: a trapezoidal
pressure pulse on the playing finger, a thumb-flex dip ahead of every
thumb-under note, plus optional noise, drift, jitter and packet loss.
All randomness is seeded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import MIDDLE_C, NoteEvent, SensorStream, white_index_to_midi
from .errors import UnknownTier
from .labeling import label_thumb_under
from .sessionio import Session, SessionMeta

TIERS = ("cdefg", "cdefg_rand", "scales", "scales_rand", "menuet", "improv_pred", "improv_nonpred")

RATE = 150.0
START = 0.5  # first onset, seconds
TAIL = 0.5  # recording continues this long after the last release

PULSE_RISE = 0.020
PULSE_FALL = 0.030
PRESSURE_FULL = 800.0  # plateau at velocity 127
FLEX_BASELINE = 500.0
TU_DIP = 60.0  # thumb-flex dip depth ahead of a thumb-under
TU_LEAD = 0.150  # the dip spans [t_on - TU_LEAD, t_on]
TU_DIP_LOW = 0.050  # deepest point this long before the onset
TU_DEPTH_RANGE = (0.15, 1.0)  # per-note dip depth as a fraction of TU_DIP
FLEX_NOISE_TAU = 0.050  # correlation time of flex noise
IMU_SIGMA = 0.02

LOWEST = 28  # C3
HIGHEST = 49  # C5

# Minuet in G (BWV Anh. 114), first strain, transposed to C; white indices
_MENUET_BARS = (
    (39, 35, 36, 37, 38), (39, 35, 35), (40, 38, 39, 40, 41), (42, 35, 35),
    (38, 39, 38, 37, 36), (37, 38, 37, 36, 35), (34, 35, 36, 37, 35), (36,),
    (39, 35, 36, 37, 38), (39, 35, 35), (40, 38, 39, 40, 41), (42, 35, 35),
    (38, 39, 38, 37, 36), (37, 38, 37, 36, 35), (36, 37, 36, 35, 34), (35,),
)
MENUET = tuple(n for bar in _MENUET_BARS for n in bar)


@dataclass(frozen=True)
class ScoreEntry:
    white_index: int
    finger: int
    t_on: float
    duration: float
    velocity: int


@dataclass
class Score:
    entries: list
    tier: str
    seed: int | None = None

    @property
    def notes(self):
        return [e.white_index for e in self.entries]

    @property
    def fingers(self):
        return [e.finger for e in self.entries]

    @property
    def tu_flags(self):
        flags = [False]
        for a, b in zip(self.entries, self.entries[1:]):
            flags.append(bool(label_thumb_under(a.finger, b.finger, a.white_index, b.white_index)))
        return flags[:len(self.entries)]


@dataclass(frozen=True)
class NoiseParams:
    pressure_sigma: float = 0.0
    flex_sigma: float = 0.0
    flex_drift_per_minute: float = 0.0
    timing_jitter_sigma: float = 0.0
    packet_loss_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("pressure_sigma", "flex_sigma", "timing_jitter_sigma", "packet_loss_prob"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.packet_loss_prob >= 1:
            raise ValueError("packet_loss_prob must be < 1")

    def with_seed(self, seed):
        return replace(self, seed=seed)


NOISE_PRESETS = {
    "clean": NoiseParams(),
    "moderate": NoiseParams(pressure_sigma=10.0, flex_sigma=0.08 * TU_DIP, flex_drift_per_minute=10.0,
                            timing_jitter_sigma=0.001, packet_loss_prob=0.02),
    "noisy": NoiseParams(pressure_sigma=25.0, flex_sigma=0.3 * TU_DIP, flex_drift_per_minute=30.0,
                         timing_jitter_sigma=0.002, packet_loss_prob=0.05),
}


def noise_preset(name, seed=0):
    try:
        return NOISE_PRESETS[name].with_seed(seed)
    except KeyError:
        raise ValueError(f"unknown noise preset {name!r}; choose from {sorted(NOISE_PRESETS)}") from None


# -- fingering --------------------------------------------------------------------

def scale_fingering(octaves=1):
    """Ascending right-hand C-major fingering, e.g. 1 2 3 1 2 3 4 5 for one octave."""
    return [1, 2, 3, 1, 2, 3, 4] * octaves + [5]


def _scale_cycle(octaves, base=MIDDLE_C):
    up = [(base + i, f) for i, f in enumerate(scale_fingering(octaves))]
    down = up[::-1]
    return up[:-1] + down[:-1]  # one full up-and-down period


def hand_fingering(notes):
    """Greedy five-finger hand position tracker.

    The thumb sits on a white key; notes within reach use the matching finger.
    Moving past the pinky passes the thumb under, moving below the thumb
    crosses finger 3 over.
    """
    if not notes:
        return []
    thumb = notes[0]
    fingers = []
    for x in notes:
        if x > thumb + 4:
            thumb = x
        elif x < thumb:
            thumb = x - 2
        fingers.append(x - thumb + 1)
    return fingers


def _random_walk(rng, count, max_step):
    notes = [MIDDLE_C]
    steps = np.arange(-max_step, max_step + 1)
    while len(notes) < count:
        x = notes[-1] + int(rng.choice(steps))
        if LOWEST <= x <= HIGHEST:
            notes.append(x)
    return notes


def _tier_notes(tier, num_notes, rng, octaves):
    if tier == "cdefg":
        cycle = [0, 1, 2, 3, 4, 3, 2, 1]
        notes = [MIDDLE_C + cycle[i % len(cycle)] for i in range(num_notes)]
        return notes, [n - MIDDLE_C + 1 for n in notes]
    if tier == "cdefg_rand":
        ranks = [0] + [int(r) for r in rng.integers(0, 5, size=num_notes - 1)]
        return [MIDDLE_C + r for r in ranks], [r + 1 for r in ranks]
    if tier == "scales":
        cycle = _scale_cycle(octaves)
        pairs = [cycle[i % len(cycle)] for i in range(num_notes)]
        return [p[0] for p in pairs], [p[1] for p in pairs]
    if tier == "scales_rand":
        cycle = _scale_cycle(octaves)
        pairs = []
        start = 0
        while len(pairs) < num_notes:
            length = int(rng.integers(3, 9))
            pairs.extend(cycle[(start + i) % len(cycle)] for i in range(length))
            start = int(rng.integers(0, len(cycle)))
        pairs = pairs[:num_notes]
        return [p[0] for p in pairs], [p[1] for p in pairs]
    if tier == "menuet":
        notes = [MENUET[i % len(MENUET)] for i in range(num_notes)]
        return notes, hand_fingering(notes)
    if tier == "improv_pred":
        notes = _random_walk(rng, num_notes, 5)
        return notes, hand_fingering(notes)
    if tier == "improv_nonpred":
        notes = _random_walk(rng, num_notes, 12)
        return notes, hand_fingering(notes)
    raise UnknownTier(f"unknown tier {tier!r}; choose from {', '.join(TIERS)}")


def generate_score(tier, num_notes, seed=0, octaves=1):
    """Scripted performance for ``tier``; deterministic in ``seed``.

    ``octaves`` sets the span of the scale tiers (canonical fingering
    1 2 3 1 2 3 4 per octave, 5 on top, mirrored going down).
    """
    if tier not in TIERS:
        raise UnknownTier(f"unknown tier {tier!r}; choose from {', '.join(TIERS)}")
    if num_notes < 2:
        raise ValueError("num_notes must be >= 2")
    rng = np.random.default_rng(seed)
    notes, fingers = _tier_notes(tier, num_notes, rng, octaves)
    iois = rng.uniform(0.30, 0.45, size=num_notes)
    gaps = rng.uniform(0.06, 0.10, size=num_notes)
    velocities = rng.integers(60, 111, size=num_notes)
    entries = []
    t = START
    for i in range(num_notes):
        entries.append(ScoreEntry(int(notes[i]), int(fingers[i]), round(t, 6),
                                  round(float(iois[i] - gaps[i]), 6), int(velocities[i])))
        t += float(iois[i])
    return Score(entries, tier, seed)


# -- rendering ----------------------------------------------------------------------

def _pulse(t, t_on, t_off, height):
    """Trapezoid: ramp up over PULSE_RISE from t_on, hold, ramp down over PULSE_FALL from t_off."""
    up = np.clip((t - t_on) / PULSE_RISE, 0.0, 1.0)
    down = np.clip(1.0 - (t - t_off) / PULSE_FALL, 0.0, 1.0)
    return height * np.minimum(up, down)


def _tu_dip(t, t_on, depth=1.0):
    start = t_on - TU_LEAD
    low = t_on - TU_DIP_LOW
    out = np.zeros_like(t)
    fall = (t >= start) & (t < low)
    out[fall] = 0.5 * (1 - np.cos(np.pi * (t[fall] - start) / (low - start)))
    rise = (t >= low) & (t <= t_on)
    out[rise] = 0.5 * (1 + np.cos(np.pi * (t[rise] - low) / (t_on - low)))
    return -TU_DIP * depth * out


def _ar1(rng, t, sigma, tau):
    if sigma == 0:
        return np.zeros(len(t))
    eps = rng.standard_normal(len(t))
    out = np.empty(len(t))
    out[0] = sigma * eps[0]
    rho = np.exp(-np.diff(t) / tau)
    for k in range(1, len(t)):
        out[k] = rho[k - 1] * out[k - 1] + sigma * np.sqrt(1 - rho[k - 1] ** 2) * eps[k]
    return out


def render_sensors(score, noise=None, name=None):
    """Glove recording of ``score`` at 150 Hz with note events at the scripted times."""
    noise = noise or NoiseParams()
    rng = np.random.default_rng(noise.seed)
    last = max(e.t_on + e.duration for e in score.entries)
    n_frames = int(np.floor((last + TAIL) * RATE)) + 1
    t = np.arange(n_frames) / RATE
    if noise.timing_jitter_sigma > 0:
        bound = 0.45 / RATE
        t = t + np.clip(rng.normal(0.0, noise.timing_jitter_sigma, n_frames), -bound, bound)
        t[0] = max(t[0], 0.0)

    pressure = np.zeros((n_frames, 5))
    flex = np.full((n_frames, 5), FLEX_BASELINE)
    depths = rng.uniform(*TU_DEPTH_RANGE, size=len(score.entries))
    for entry, tu, depth in zip(score.entries, score.tu_flags, depths):
        height = PRESSURE_FULL * entry.velocity / 127.0
        pressure[:, entry.finger - 1] += _pulse(t, entry.t_on, entry.t_on + entry.duration, height)
        if tu:
            flex[:, 0] += _tu_dip(t, entry.t_on, depth)

    if noise.pressure_sigma > 0:
        pressure = np.maximum(pressure + rng.normal(0.0, noise.pressure_sigma, pressure.shape), 0.0)
    for ch in range(5):
        flex[:, ch] += _ar1(rng, t, noise.flex_sigma, FLEX_NOISE_TAU)
    flex += noise.flex_drift_per_minute * (t / 60.0)[:, None]
    imu = rng.normal(0.0, IMU_SIGMA, (n_frames, 6))

    if noise.packet_loss_prob > 0:
        keep = rng.random(n_frames) >= noise.packet_loss_prob
        keep[0] = True
        t, pressure, flex, imu = t[keep], pressure[keep], flex[keep], imu[keep]

    events = []
    for entry in score.entries:
        midi = white_index_to_midi(entry.white_index)
        events.append(NoteEvent(entry.t_on, "on", midi, entry.velocity))
        events.append(NoteEvent(round(entry.t_on + entry.duration, 6), "off", midi, 0))
    meta = SessionMeta(name=name or f"{score.tier}_{score.seed}", tier=score.tier, seed=score.seed)
    return Session(SensorStream(t, pressure, flex, imu, RATE), events, meta)


def simulate(tier, num_notes, seed=0, noise=None, octaves=1):
    """Score and its rendered session in one call."""
    score = generate_score(tier, num_notes, seed, octaves)
    return score, render_sensors(score, noise)
