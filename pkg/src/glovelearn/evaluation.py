"""Train/dev splitting, accuracy reports and the end-to-end benchmark run."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decode import DecoderConfig, decode_performance
from .errors import ConfigError, EmptyDev
from .labeling import build_dataset
from .models import (
    DEFAULT_ALPHA,
    DEFAULT_L2,
    DEFAULT_SUPPORT,
    FeatureSpace,
    TrainedModel,
    fit_interval_model,
    fit_tu_classifier,
    predict_interval,
    predict_tu,
    save_model,
    transition_matrix,
)
from .sessionio import normalize_flex
from .simgen import NOISE_PRESETS, TIERS, NoiseParams, generate_score, render_sensors

TRAIN_FRACTION = 0.8


def split_session(events):
    """First floor(80%) of a run for training, the rest for dev; order kept."""
    events = list(events)
    if not events:
        raise ValueError("cannot split an empty run")
    k = math.floor(TRAIN_FRACTION * len(events))
    if k == 0:
        warnings.warn("run too short for a training split; all events go to dev", stacklevel=2)
    return events[:k], events[k:]


@dataclass
class AccuracyReport:
    feature_space: FeatureSpace
    per_file: dict
    average: float
    confusion: dict  # (true interval, predicted interval) -> count
    transitions: dict = field(default_factory=dict)  # file -> number of scored transitions

    @property
    def row_normalized(self):
        totals = {}
        for (true, _), c in self.confusion.items():
            totals[true] = totals.get(true, 0) + c
        return {(true, pred): c / totals[true] for (true, pred), c in self.confusion.items()}

    def to_dict(self):
        return {
            "feature_space": str(self.feature_space),
            "per_file": self.per_file,
            "average": self.average,
            "transitions": self.transitions,
            "confusion": [[t, p, c] for (t, p), c in sorted(self.confusion.items())],
        }


def evaluate(im, tc, dev, oracle_tu=False, interval_fn=None):
    """Interval accuracy per dev file plus a pooled confusion matrix.

    ``dev`` maps a file name to its labeled dev events (a plain list of
    sequences is also accepted). The thumb-under feature comes from the
    classifier unless ``oracle_tu`` is set. ``interval_fn(f_prev, f_curr, tu)``
    replaces the model's prediction.
    """
    if not isinstance(dev, dict):
        dev = {str(i): seq for i, seq in enumerate(dev)}
    per_file = {}
    counts = {}
    confusion = {}
    for name, seq in dev.items():
        if len(seq) < 2:
            warnings.warn(f"dev file {name!r} has no transitions; excluded", stacklevel=2)
            continue
        correct = 0
        for prev, curr in zip(seq, seq[1:]):
            if oracle_tu:
                tu = curr.tu
            else:
                tu, _ = predict_tu(tc, curr.finger, curr.flex_window)
            if interval_fn is None:
                pred = predict_interval(im, prev.finger, curr.finger, tu)
            else:
                pred = interval_fn(prev.finger, curr.finger, tu)
            true = curr.white_index - prev.white_index
            correct += pred == true
            confusion[(true, pred)] = confusion.get((true, pred), 0) + 1
        per_file[name] = correct / (len(seq) - 1)
        counts[name] = len(seq) - 1
    if not per_file:
        raise EmptyDev("no dev file with at least one transition")
    average = float(np.mean(list(per_file.values())))
    return AccuracyReport(im.feature_space if im is not None else None, per_file, average, confusion, counts)


def tu_accuracy(tc, events):
    """Per present finger: (accuracy, count) of thumb-under predictions."""
    out = {}
    for finger in range(1, 6):
        rows = [e for e in events if e.finger == finger]
        if rows:
            hits = sum(predict_tu(tc, finger, e.flex_window)[0] == e.tu for e in rows)
            out[finger] = (hits / len(rows), len(rows))
    return out


def decode_transition_accuracy(decoded, truth, tolerance=0.05):
    """Fraction of ground-truth transitions the decoder reproduces.

    Each true note is matched to the decoded note with the closest onset
    within ``tolerance`` seconds; a transition counts as correct when both
    ends are matched and the decoded interval equals the true one.
    """
    if len(truth) < 2:
        raise EmptyDev("need at least two true notes")
    onsets = np.array([d.t_on for d in decoded])
    matched = []
    for ev in truth:
        if len(onsets) == 0:
            matched.append(None)
            continue
        j = int(np.argmin(np.abs(onsets - ev.t_on)))
        matched.append(decoded[j] if abs(onsets[j] - ev.t_on) <= tolerance else None)
    correct = 0
    for i in range(1, len(truth)):
        a, b = matched[i - 1], matched[i]
        if a is not None and b is not None:
            correct += (b.white_index - a.white_index) == (truth[i].white_index - truth[i - 1].white_index)
    return correct / (len(truth) - 1)


# -- pipeline config ------------------------------------------------------------

DEFAULT_CONFIG = {
    "tiers": list(TIERS),
    "notes_per_tier": 500,
    "seeds": [0],
    "noise": "moderate",
    "n": 10,
    "l2": DEFAULT_L2,
    "alpha": DEFAULT_ALPHA,
    "support": list(DEFAULT_SUPPORT),
    "decoder": DecoderConfig().to_dict(),
    "oracle_tu": False,
    "octaves": 1,
    "tol": 1e-6,
    "max_iter": 2000,
}

_NOISE_KEYS = set(NoiseParams.__dataclass_fields__) - {"seed"}
_DECODER_KEYS = set(DecoderConfig.__dataclass_fields__)


def _line_of(text, key):
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def load_config(text):
    """Parse and validate a pipeline config; missing keys take defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", 1)

    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", _line_of(text, key))

    for key in raw:
        if key not in DEFAULT_CONFIG:
            fail(key, "unknown key")
    cfg = {**DEFAULT_CONFIG, **raw}

    tiers = cfg["tiers"]
    if not isinstance(tiers, list) or not tiers or any(t not in TIERS for t in tiers):
        fail("tiers", f"must be a non-empty list drawn from {list(TIERS)}")
    for key in ("notes_per_tier", "n", "max_iter", "octaves"):
        v = cfg[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            fail(key, "must be a positive integer")
    if cfg["notes_per_tier"] < 2:
        fail("notes_per_tier", "must be >= 2")
    seeds = cfg["seeds"]
    if not isinstance(seeds, list) or not seeds or any(not isinstance(s, int) or isinstance(s, bool) for s in seeds):
        fail("seeds", "must be a non-empty list of integers")
    for key in ("l2", "alpha", "tol"):
        v = cfg[key]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
            fail(key, "must be a non-negative number")
    sup = cfg["support"]
    if (not isinstance(sup, list) or len(sup) != 2 or any(not isinstance(s, int) for s in sup)
            or not sup[0] < 0 < sup[1]):
        fail("support", "must be [lo, hi] integers with lo < 0 < hi")
    noise = cfg["noise"]
    if isinstance(noise, str):
        if noise not in NOISE_PRESETS:
            fail("noise", f"unknown preset {noise!r}")
    elif isinstance(noise, dict):
        bad = set(noise) - _NOISE_KEYS
        if bad:
            fail("noise", f"unknown noise keys {sorted(bad)}")
        try:
            NoiseParams(**noise)
        except (TypeError, ValueError) as exc:
            fail("noise", str(exc))
    else:
        fail("noise", "must be a preset name or an object")
    dec = cfg["decoder"]
    if not isinstance(dec, dict) or set(dec) - _DECODER_KEYS:
        fail("decoder", f"must be an object with keys from {sorted(_DECODER_KEYS)}")
    try:
        DecoderConfig.from_dict({**DEFAULT_CONFIG["decoder"], **dec})
    except (TypeError, ValueError) as exc:
        fail("decoder", str(exc))
    if not isinstance(cfg["oracle_tu"], bool):
        fail("oracle_tu", "must be true or false")
    cfg["decoder"] = {**DEFAULT_CONFIG["decoder"], **dec}
    return cfg


def _noise_for(cfg, seed):
    noise = cfg["noise"]
    base = NOISE_PRESETS[noise] if isinstance(noise, str) else NoiseParams(**noise)
    return base.with_seed(seed)


# -- pipeline -------------------------------------------------------------------

def simulate_corpus(cfg):
    """Render one session per (tier, seed); returns ``{file_name: (score, session)}``."""
    out = {}
    for seed in cfg["seeds"]:
        for tier in cfg["tiers"]:
            session_seed = 1000 * seed + TIERS.index(tier)
            score = generate_score(tier, cfg["notes_per_tier"], session_seed, cfg["octaves"])
            name = f"{tier}_s{seed}"
            out[name] = (score, render_sensors(score, _noise_for(cfg, session_seed), name=name))
    return out


def prepare_splits(sessions, n, dt=None):
    """Label each session and split it; returns (train, dev) dicts keyed by file."""
    train, dev = {}, {}
    for name, session in sessions.items():
        events = build_dataset(session, n=n, dt=dt)
        train[name], dev[name] = split_session(events)
    return train, dev


def check_split_firewall(train, dev):
    """Raise if any (file, event) identity appears in both splits."""
    train_ids = {(name, e.t_on) for name, seq in train.items() for e in seq}
    dev_ids = {(name, e.t_on) for name, seq in dev.items() for e in seq}
    overlap = train_ids & dev_ids
    if overlap:
        raise AssertionError(f"{len(overlap)} events present in both train and dev")
    return len(train_ids), len(dev_ids)


def train_models(train, cfg, dt):
    """All three interval models sharing one thumb-under classifier."""
    seqs = [seq for seq in train.values() if seq]
    tc = fit_tu_classifier(seqs, cfg["n"], cfg["l2"], cfg["tol"], cfg["max_iter"])
    models = {}
    for fs in FeatureSpace:
        im = fit_interval_model(seqs, fs, tuple(cfg["support"]), cfg["alpha"])
        models[fs] = TrainedModel(im, tc, dt)
    return models


def _fmt(x):
    return f"{x:.6f}"


def _csv_text(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def confusion_rows(report, support):
    lo, hi = support
    cols = list(range(lo, hi + 1))
    norm = report.row_normalized
    trues = sorted({t for t, _ in report.confusion})
    rows = [["true\\pred"] + [str(c) for c in cols]]
    for t in trues:
        rows.append([str(t)] + [repr(float(norm.get((t, c), 0.0))) for c in cols])
    return rows


def transition_rows(model):
    deltas, mat = transition_matrix(model)
    rows = [["delta_f\\delta_n"] + [str(int(d)) for d in model.intervals]]
    for d, row in zip(deltas, mat):
        rows.append([str(d)] + [repr(float(p)) for p in row])
    return rows


def run_pipeline(config, out_dir):
    """Simulate, label, split, train, evaluate and write the report files.

    ``config`` is a dict or a path to a JSON file. Writes
    ``report.json``, ``accuracy_table.csv``, ``confusion_<fs>.csv``,
    ``transition_<fs>.csv`` and ``model_<fs>.json`` into ``out_dir`` and
    returns the report dict.
    """
    if isinstance(config, dict):
        cfg = load_config(json.dumps(config))
    else:
        cfg = load_config(Path(config).read_text())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    corpus = simulate_corpus(cfg)
    sessions = {name: session for name, (_, session) in corpus.items()}
    dt = 1.0 / next(iter(sessions.values())).sensors.nominal_rate
    train, dev = prepare_splits(sessions, cfg["n"], dt)
    n_train, n_dev = check_split_firewall(train, dev)
    models = train_models(train, cfg, dt)
    dec_cfg = DecoderConfig.from_dict(cfg["decoder"])

    report = {"config": cfg, "train_events": n_train, "dev_events": n_dev, "feature_spaces": {}}
    per_tier = {}
    for fs, model in models.items():
        rep = evaluate(model.interval, model.tu, dev, oracle_tu=cfg["oracle_tu"])
        tiers = {}
        for tier in cfg["tiers"]:
            accs = [rep.per_file[f"{tier}_s{s}"] for s in cfg["seeds"] if f"{tier}_s{s}" in rep.per_file]
            tiers[tier] = float(np.mean(accs)) if accs else float("nan")
        per_tier[fs] = tiers
        entry = rep.to_dict()
        entry["per_tier"] = tiers
        entry["tier_average"] = float(np.mean(list(tiers.values())))
        report["feature_spaces"][str(fs)] = entry
        save_model(model, out / f"model_{fs}.json")
        (out / f"confusion_{fs}.csv").write_text(_csv_text(confusion_rows(rep, cfg["support"])))
        (out / f"transition_{fs}.csv").write_text(_csv_text(transition_rows(model.interval)))

    tc = models[FeatureSpace.PAIR_TU].tu
    dev_events = [e for seq in dev.values() for e in seq]
    report["tu_dev_accuracy"] = {str(f): {"accuracy": a, "count": c} for f, (a, c) in tu_accuracy(tc, dev_events).items()}

    decode_acc = {}
    tu_model = models[FeatureSpace.PAIR_TU]
    for name, session in sessions.items():
        if len(dev[name]) < 2:
            continue
        stream = normalize_flex(session.sensors)
        first = train[name][0].white_index if train[name] else dev[name][0].white_index
        cfg_ref = DecoderConfig.from_dict({**cfg["decoder"], "reference_note": first})
        decoded = decode_performance(stream, tu_model.interval, tu_model.tu, cfg_ref, dt=dt)
        t0 = dev[name][0].t_on
        decode_acc[name] = decode_transition_accuracy([d for d in decoded if d.t_on >= t0 - dec_cfg.debounce], dev[name])
    report["decode_dev_accuracy"] = decode_acc

    rows = [["tier"] + [str(fs) for fs in FeatureSpace]]
    for tier in cfg["tiers"]:
        rows.append([tier] + [_fmt(per_tier[fs][tier]) for fs in FeatureSpace])
    rows.append(["average"] + [_fmt(float(np.mean(list(per_tier[fs].values())))) for fs in FeatureSpace])
    (out / "accuracy_table.csv").write_text(_csv_text(rows))
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report
