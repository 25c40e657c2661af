"""Command line entry point: ``glovelearn <subcommand>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .decode import DecoderConfig, decode_performance, notes_to_events
from .errors import GloveError
from .evaluation import (
    _csv_text,
    confusion_rows,
    evaluate,
    prepare_splits,
    run_pipeline,
    tu_accuracy,
)
from .labeling import build_dataset, format_dataset_csv
from .models import DEFAULT_ALPHA, DEFAULT_L2, TrainedModel, fit_interval_model, fit_tu_classifier, load_model, save_model
from .sessionio import load_session, normalize_flex, save_session, write_midi_records
from .simgen import NOISE_PRESETS, TIERS, generate_score, noise_preset, render_sensors


def _load_sessions(dirs):
    sessions = {}
    for d in dirs:
        s = load_session(d)
        name = s.meta.name or Path(d).name
        if name in sessions:
            name = str(d)
        sessions[name] = s
    return sessions


def cmd_gen(args):
    score = generate_score(args.tier, args.notes, args.seed, args.octaves)
    session = render_sensors(score, noise_preset(args.noise, args.seed))
    save_session(session, args.output)
    print(f"wrote {len(score.entries)} notes, {len(session.sensors)} frames to {args.output}")


def cmd_label(args):
    events = build_dataset(load_session(args.input), n=args.n)
    Path(args.output).write_text(format_dataset_csv(events))
    print(f"wrote {len(events)} labeled events to {args.output}")


def cmd_train(args):
    sessions = _load_sessions(args.input)
    dt = 1.0 / next(iter(sessions.values())).sensors.nominal_rate
    train, _ = prepare_splits(sessions, args.n, dt)
    seqs = [seq for seq in train.values() if seq]
    im = fit_interval_model(seqs, args.features, (args.support_lo, args.support_hi), args.alpha)
    tc = fit_tu_classifier(seqs, args.n, args.l2)
    save_model(TrainedModel(im, tc, dt), args.output)
    n_events = sum(len(s) for s in seqs)
    print(f"trained {args.features} on {n_events} events from {len(seqs)} session(s) -> {args.output}")


def cmd_eval(args):
    model = load_model(args.model)
    sessions = _load_sessions(args.input)
    _, dev = prepare_splits(sessions, model.tu.n, model.dt)
    report = evaluate(model.interval, model.tu, dev, oracle_tu=args.oracle_tu)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    doc = report.to_dict()
    doc["tu_dev_accuracy"] = {str(f): {"accuracy": a, "count": c}
                              for f, (a, c) in tu_accuracy(model.tu, [e for s in dev.values() for e in s]).items()}
    (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    fs = model.interval.feature_space
    (out / f"confusion_{fs}.csv").write_text(_csv_text(confusion_rows(report, model.interval.support)))
    for name, acc in report.per_file.items():
        print(f"{name}\t{acc:.3f}")
    print(f"average\t{report.average:.3f}")


def cmd_play(args):
    model = load_model(args.model)
    session = load_session(args.input)
    cfg = DecoderConfig(theta_on=args.theta_on, theta_off=args.theta_off, p_max=args.p_max,
                        debounce=args.debounce, reference_note=args.reference)
    notes = decode_performance(normalize_flex(session.sensors), model.interval, model.tu, cfg, dt=model.dt)
    Path(args.output).write_bytes(write_midi_records(notes_to_events(notes), args.channel))
    print(f"decoded {len(notes)} notes -> {args.output}")


def cmd_pipeline(args):
    report = run_pipeline(args.config, args.output)
    for fs, entry in report["feature_spaces"].items():
        print(f"{fs}\t{entry['tier_average']:.3f}")


def build_parser():
    p = argparse.ArgumentParser(prog="glovelearn", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    defaults = DecoderConfig()

    g = sub.add_parser("gen", help="simulate a glove session")
    g.add_argument("--tier", required=True, choices=TIERS)
    g.add_argument("--notes", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", default="clean", choices=sorted(NOISE_PRESETS))
    g.add_argument("--octaves", type=int, default=1)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    lab = sub.add_parser("label", help="dump the labeled dataset of a session")
    lab.add_argument("-i", "--input", required=True)
    lab.add_argument("-o", "--output", required=True)
    lab.add_argument("--n", type=int, default=10)
    lab.set_defaults(func=cmd_label)

    t = sub.add_parser("train", help="fit interval model and thumb-under classifiers on train splits")
    t.add_argument("--features", required=True, choices=["delta_f", "pair", "pair_tu"])
    t.add_argument("-i", "--input", nargs="+", required=True)
    t.add_argument("-o", "--output", required=True)
    t.add_argument("--n", type=int, default=10)
    t.add_argument("--l2", type=float, default=DEFAULT_L2)
    t.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    t.add_argument("--support-lo", type=int, default=-12)
    t.add_argument("--support-hi", type=int, default=12)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score a model on the dev splits")
    e.add_argument("-m", "--model", required=True)
    e.add_argument("-i", "--input", nargs="+", required=True)
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--oracle-tu", action="store_true", help="use true thumb-under labels")
    e.set_defaults(func=cmd_eval)

    pl = sub.add_parser("play", help="decode a session into a binary MIDI record stream")
    pl.add_argument("-m", "--model", required=True)
    pl.add_argument("-i", "--input", required=True)
    pl.add_argument("-o", "--output", required=True)
    pl.add_argument("--reference", type=int, default=defaults.reference_note)
    pl.add_argument("--theta-on", type=float, default=defaults.theta_on)
    pl.add_argument("--theta-off", type=float, default=defaults.theta_off)
    pl.add_argument("--p-max", type=float, default=defaults.p_max)
    pl.add_argument("--debounce", type=float, default=defaults.debounce)
    pl.add_argument("--channel", type=int, default=0)
    pl.set_defaults(func=cmd_play)

    pp = sub.add_parser("pipeline", help="full simulate/train/evaluate benchmark")
    pp.add_argument("-c", "--config", required=True)
    pp.add_argument("-o", "--output", required=True)
    pp.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (GloveError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
