"""Interval models and thumb-under classifiers.

An :class:`IntervalModel` counts how often each white-key interval follows a
given finger context. Three context granularities exist; a model keeps its
own table plus every coarser one so prediction can back off:

    pair_tu (f_prev, f_curr, tu) -> pair (f_prev, f_curr) -> delta_f (f_curr - f_prev)
    -> global interval counts -> interval = finger difference

The :class:`TUClassifier` holds one logistic regression per present finger
over the thumb-flex window preceding the note.
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyData, FormatError
from .labeling import LabeledEvent

DEFAULT_SUPPORT = (-12, 12)
DEFAULT_ALPHA = 1.0
DEFAULT_L2 = 1e-3


class FeatureSpace(str, enum.Enum):
    DELTA_F = "delta_f"
    PAIR = "pair"
    PAIR_TU = "pair_tu"

    def __str__(self):
        return self.value


BACKOFF_CHAIN = (FeatureSpace.PAIR_TU, FeatureSpace.PAIR, FeatureSpace.DELTA_F)


def context_key(fs, f_prev, f_curr, tu=False):
    fs = FeatureSpace(fs)
    if fs is FeatureSpace.DELTA_F:
        return int(f_curr) - int(f_prev)
    if fs is FeatureSpace.PAIR:
        return (int(f_prev), int(f_curr))
    return (int(f_prev), int(f_curr), bool(tu))


def _levels(fs):
    return BACKOFF_CHAIN[BACKOFF_CHAIN.index(FeatureSpace(fs)):]


def _as_sequences(data):
    data = list(data)
    if data and isinstance(data[0], LabeledEvent):
        return [data]
    return [list(seq) for seq in data]


@dataclass
class IntervalModel:
    feature_space: FeatureSpace
    support: tuple = DEFAULT_SUPPORT
    alpha: float = DEFAULT_ALPHA
    tables: dict = field(default_factory=dict)
    global_counts: dict = field(default_factory=dict)

    @property
    def counts(self):
        return self.tables[self.feature_space]

    @property
    def intervals(self):
        lo, hi = self.support
        return np.arange(lo, hi + 1)

    def in_support(self, dn):
        return self.support[0] <= dn <= self.support[1]


def fit_interval_model(data, fs, support=DEFAULT_SUPPORT, alpha=DEFAULT_ALPHA):
    """Count intervals per context over consecutive events of each sequence.

    Intervals outside ``support`` are dropped with a warning.
    """
    fs = FeatureSpace(fs)
    sequences = _as_sequences(data)
    if not sequences or not any(sequences):
        raise EmptyData("no labeled events to fit")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    model = IntervalModel(fs, tuple(int(s) for s in support), float(alpha),
                          {level: {} for level in _levels(fs)}, {})
    dropped = 0
    for seq in sequences:
        for prev, curr in zip(seq, seq[1:]):
            dn = curr.white_index - prev.white_index
            if not model.in_support(dn):
                dropped += 1
                continue
            for level, table in model.tables.items():
                key = context_key(level, prev.finger, curr.finger, curr.tu)
                row = table.setdefault(key, {})
                row[dn] = row.get(dn, 0) + 1
            model.global_counts[dn] = model.global_counts.get(dn, 0) + 1
    if dropped:
        warnings.warn(f"{dropped} interval(s) outside support {model.support} dropped", stacklevel=2)
    return model


def interval_distribution(model, context):
    """Smoothed P(interval | context) over the model's support.

    ``context`` is a key for the model's own feature space (see
    :func:`context_key`). With zero counts and ``alpha == 0`` the result is
    uniform.
    """
    row = model.counts.get(context, {})
    dns = model.intervals
    counts = np.array([row.get(int(d), 0) for d in dns], dtype=float)
    total = counts.sum() + model.alpha * len(dns)
    if total == 0:
        return np.full(len(dns), 1.0 / len(dns))
    return (counts + model.alpha) / total


def _argmax_interval(row):
    # most counts, then smallest |interval|, then the positive one
    return min(row, key=lambda d: (-row[d], abs(d), -d))


def predict_interval(model, f_prev, f_curr, tu=False):
    for level in _levels(model.feature_space):
        row = model.tables.get(level, {}).get(context_key(level, f_prev, f_curr, tu))
        if row and sum(row.values()) > 0:
            return _argmax_interval(row)
    if model.global_counts and sum(model.global_counts.values()) > 0:
        return _argmax_interval(model.global_counts)
    return int(f_curr) - int(f_prev)


def transition_matrix(model, finger_deltas=range(-4, 5)):
    """Rows P(interval | finger difference), columns over the support.

    Needs a model carrying a delta_f table (every feature space does).
    """
    table = model.tables[FeatureSpace.DELTA_F]
    view = IntervalModel(FeatureSpace.DELTA_F, model.support, model.alpha,
                         {FeatureSpace.DELTA_F: table}, model.global_counts)
    deltas = list(finger_deltas)
    return deltas, np.vstack([interval_distribution(view, d) for d in deltas])


# -- logistic regression --------------------------------------------------------

def sigmoid(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-np.logaddexp(0.0, -z))


def logistic_objective(w, X, y, l2):
    """Mean negative log-likelihood plus 0.5*l2*|w|^2 on all but the last (bias) weight."""
    z = X @ w
    nll = np.mean(np.logaddexp(0.0, z) - y * z)
    return nll + 0.5 * l2 * np.dot(w[:-1], w[:-1])


def logistic_gradient(w, X, y, l2):
    z = X @ w
    g = X.T @ (sigmoid(z) - y) / len(y)
    g[:-1] += l2 * w[:-1]
    return g


def fit_logistic(X, y, l2=DEFAULT_L2, tol=1e-6, max_iter=2000):
    """Full-batch gradient descent with Armijo backtracking.

    Returns ``(w, history)`` where ``history`` lists the objective after each
    accepted step (starting with the value at w = 0).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.zeros(X.shape[1])
    f = logistic_objective(w, X, y, l2)
    history = [f]
    step = 1.0
    for _ in range(max_iter):
        g = logistic_gradient(w, X, y, l2)
        if np.max(np.abs(g)) < tol:
            break
        gg = np.dot(g, g)
        while True:
            w_new = w - step * g
            f_new = logistic_objective(w_new, X, y, l2)
            if f_new <= f - 1e-4 * step * gg or step < 1e-12:
                break
            step *= 0.5
        if f_new > f:
            break
        w, f = w_new, f_new
        history.append(f)
        step *= 2.0
    return w, history


@dataclass
class TUClassifier:
    weights: np.ndarray  # (5, n + 1), bias last
    n: int
    trained: tuple = (False,) * 5
    priors: tuple = (0.0,) * 5

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (5, self.n + 1):
            raise DimensionMismatch(f"weights must have shape (5, {self.n + 1})")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")


def fit_tu_classifier(data, n=None, l2=DEFAULT_L2, tol=1e-6, max_iter=2000):
    """Five per-finger logistic classifiers predicting the thumb-under flag.

    Fingers without data, or whose labels are all one class, keep zero weights
    and are marked untrained; their label prior is stored instead.
    """
    events = [e for seq in _as_sequences(data) for e in seq]
    if n is None:
        if not events:
            raise EmptyData("cannot infer window length from no data")
        n = len(events[0].flex_window)
    for e in events:
        if len(e.flex_window) != n:
            raise DimensionMismatch(f"flex window of length {len(e.flex_window)}, expected {n}")
    weights = np.zeros((5, n + 1))
    trained = []
    priors = []
    for finger in range(1, 6):
        rows = [e for e in events if e.finger == finger]
        y = np.array([float(e.tu) for e in rows])
        prior = float(y.mean()) if len(y) else 0.0
        priors.append(prior)
        if len(rows) == 0 or prior in (0.0, 1.0):
            trained.append(False)
            continue
        X = np.column_stack([np.array([e.flex_window for e in rows], dtype=float), np.ones(len(rows))])
        weights[finger - 1], _ = fit_logistic(X, y, l2, tol, max_iter)
        trained.append(True)
    return TUClassifier(weights, n, tuple(trained), tuple(priors))


def predict_tu(clf, f_curr, window):
    """``(tu, p)`` for one window. Untrained fingers answer with their prior."""
    window = np.asarray(window, dtype=float).reshape(-1)
    if len(window) != clf.n:
        raise DimensionMismatch(f"window of length {len(window)}, expected {clf.n}")
    i = int(f_curr) - 1
    if not clf.trained[i]:
        p = clf.priors[i]
        return p >= 0.5, p
    w = clf.weights[i]
    p = float(sigmoid(np.dot(window, w[:-1]) + w[-1]))
    return p >= 0.5, p


# -- persistence ----------------------------------------------------------------

def _key_to_str(key):
    if isinstance(key, tuple):
        return ",".join(str(int(k)) for k in key)
    return str(key)


def _key_from_str(fs, s):
    parts = [int(p) for p in s.split(",")]
    if fs is FeatureSpace.DELTA_F:
        return parts[0]
    if fs is FeatureSpace.PAIR:
        return tuple(parts)
    return (parts[0], parts[1], bool(parts[2]))


def _row_to_json(row):
    return {str(d): c for d, c in sorted(row.items())}


@dataclass
class TrainedModel:
    """Everything needed to label intervals for new data."""

    interval: IntervalModel
    tu: TUClassifier
    dt: float
    flex_eps: float = 1e-6

    def to_dict(self):
        im = self.interval
        return {
            "feature_space": str(im.feature_space),
            "support": list(im.support),
            "alpha": im.alpha,
            "counts": {
                str(level): {_key_to_str(k): _row_to_json(v) for k, v in sorted(table.items(), key=lambda kv: _key_to_str(kv[0]))}
                for level, table in im.tables.items()
            },
            "global_counts": _row_to_json(im.global_counts),
            "tu_weights": self.tu.weights.tolist(),
            "tu_trained": list(self.tu.trained),
            "tu_priors": list(self.tu.priors),
            "n": self.tu.n,
            "normalization": {"method": "median_std", "dt": self.dt, "eps": self.flex_eps},
        }

    @classmethod
    def from_dict(cls, d):
        try:
            fs = FeatureSpace(d["feature_space"])
            tables = {}
            for level_name, table in d["counts"].items():
                level = FeatureSpace(level_name)
                tables[level] = {_key_from_str(level, k): {int(dn): int(c) for dn, c in row.items()}
                                 for k, row in table.items()}
            im = IntervalModel(fs, tuple(d["support"]), float(d["alpha"]), tables,
                               {int(dn): int(c) for dn, c in d["global_counts"].items()})
            tu = TUClassifier(np.array(d["tu_weights"], dtype=float), int(d["n"]),
                              tuple(bool(x) for x in d["tu_trained"]),
                              tuple(float(x) for x in d["tu_priors"]))
            norm = d["normalization"]
            return cls(im, tu, float(norm["dt"]), float(norm["eps"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed model document: {exc}") from None

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def save_model(model, path):
    Path(path).write_text(model.to_json())


def load_model(path):
    return TrainedModel.from_json(Path(path).read_text())
