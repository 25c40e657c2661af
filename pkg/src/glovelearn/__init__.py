"""Learn glove-to-keyboard note mappings from synchronized performances."""

from .core import (
    NoteEvent,
    SensorFrame,
    SensorStream,
    midi_to_white_index,
    white_index_to_midi,
)
from .decode import DecoderConfig, compute_velocity, decode_performance, detect_triggers
from .errors import (
    BlackKeyError,
    ConfigError,
    DimensionMismatch,
    EmptyData,
    EmptyDev,
    EmptyStream,
    EmptyWindow,
    FormatError,
    GloveError,
    OrderError,
    OverlapError,
    RangeError,
    UnknownTier,
    UnsupportedStatus,
)
from .evaluation import evaluate, run_pipeline, split_session
from .labeling import LabeledEvent, NoteSegment, assign_finger, build_dataset, label_thumb_under, segment_notes
from .models import (
    FeatureSpace,
    IntervalModel,
    TrainedModel,
    TUClassifier,
    fit_interval_model,
    fit_tu_classifier,
    interval_distribution,
    predict_interval,
    predict_tu,
)
from .sessionio import (
    Session,
    decode_midi_message,
    encode_midi_message,
    load_session,
    normalize_flex,
    parse_note_csv,
    parse_sensor_csv,
    resample_window,
    save_session,
)
from .simgen import NoiseParams, Score, generate_score, render_sensors

__version__ = "0.1.0"
