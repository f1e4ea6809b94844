"""Command-line entry point: train, summarize, score, separate, jsd."""

import argparse
import logging
import os
import sys

import numpy as np

from . import model as lr_model
from .audio_io import read_wav, write_wav
from .config import load_config
from .separation import split_channels
from .summarizer import emit_manifest, summarize
from .textinfo import (
    JsdParams,
    TokenDistribution,
    build_training_pairs,
    jsd,
    read_transcript,
    tokenize,
    training_windows,
)

log = logging.getLogger("audiosum")


class CommandError(Exception):
    pass


def _effective_config(args):
    config = load_config(args.config)
    return config.replace(
        sample_rate=args.sample_rate,
        n_fft=args.n_fft,
        hop=args.hop,
        n_mfcc=args.n_mfcc,
        n_similar=args.n_similar,
        separation_gap=args.separation_gap,
        segment_length_train=args.segment_length,
        ratio=getattr(args, "ratio", None),
    )


def read_manifest(path):
    """(line number, audio path, transcript path) triples; relative paths
    resolve against the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                entries.append((lineno, None, None))
                continue
            audio, transcript = (os.path.join(base, p) for p in parts)
            entries.append((lineno, audio, transcript))
    return entries


def cmd_train(args):
    config = _effective_config(args)
    try:
        entries = read_manifest(args.manifest)
    except OSError as exc:
        raise CommandError(f"cannot read manifest: {exc}") from exc
    rows, targets = [], []
    skipped_windows = 0
    failed = 0
    used = 0
    for lineno, audio_path, transcript_path in entries:
        if audio_path is None:
            log.error("%s:%d: expected 'audio_path<TAB>transcript_path'", args.manifest, lineno)
            failed += 1
            continue
        try:
            audio = read_wav(audio_path, config.sample_rate)
            transcript = read_transcript(transcript_path)
            pairs = build_training_pairs(audio, transcript, config.segment_length_train, JsdParams(), config)
        except (OSError, ValueError) as exc:
            log.error("%s:%d: skipped: %s", args.manifest, lineno, exc)
            failed += 1
            continue
        used += 1
        skipped_windows += len(training_windows(audio.duration, config.segment_length_train)) - len(pairs)
        for x, y in pairs:
            rows.append(x)
            targets.append(y)
    if not rows:
        raise CommandError("no training data")
    if len(rows) < 2:
        raise CommandError("no training data: need at least 2 usable windows")
    fitted = lr_model.fit(np.array(rows), np.array(targets), config)
    lr_model.save(fitted, args.output)
    report = [
        ("files_used", used),
        ("files_failed", failed),
        ("rows", len(rows)),
        ("skipped_windows", skipped_windows),
        ("train_rmse", format(fitted.train_rmse, ".6g")),
        ("ridge_lambda", format(fitted.ridge_lambda, ".6g")),
        ("model", args.output),
    ]
    for key, value in report:
        print(f"{key}\t{value}")
    return 0


def _load_model(path, config):
    try:
        return lr_model.load(path, config)
    except OSError as exc:
        raise CommandError(f"cannot read model: {exc}") from exc


def _run_summary(args, config):
    model = _load_model(args.model, config)
    buffer = read_wav(args.input, config.sample_rate)
    return summarize(buffer, model, config, args.ratio)


def cmd_summarize(args):
    config = _effective_config(args)
    result = _run_summary(args, config)
    write_wav(result.audio, args.output)
    emit_manifest(result, args.manifest, args.input, args.model, config, args.plot)
    if result.warning:
        log.warning("%s", result.warning)
    return 0


def cmd_score(args):
    config = _effective_config(args)
    result = _run_summary(args, config)
    print("start\tend\tlr\tscore")
    for s in result.scored:
        print(f"{s.segment.start_time:.6f}\t{s.segment.end_time:.6f}\t{s.lr:.10g}\t{s.score:.10g}")
    return 0


def cmd_separate(args):
    config = _effective_config(args)
    buffer = read_wav(args.input, config.sample_rate)
    background, foreground = split_channels(
        buffer, config.n_fft, config.hop, config.n_similar, config.separation_gap
    )
    write_wav(background, args.background)
    write_wav(foreground, args.foreground)
    return 0


def _read_tokens(path):
    with open(path, encoding="utf-8") as fh:
        return tokenize(fh.read())


def cmd_jsd(args):
    source = TokenDistribution.from_tokens(_read_tokens(args.source))
    segment = TokenDistribution.from_tokens(_read_tokens(args.segment))
    print(repr(jsd(source, segment, JsdParams(args.delta, args.beta_factor))))
    return 0


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file (default: $AUDIOSUM_CONFIG)")
    p.add_argument("--sample-rate", type=int)
    p.add_argument("--n-fft", type=int)
    p.add_argument("--hop", type=int)
    p.add_argument("--n-mfcc", type=int)
    p.add_argument("--n-similar", type=int)
    p.add_argument("--separation-gap", type=float, help="seconds")
    p.add_argument("--segment-length", type=float, help="training window length, seconds")


def build_parser():
    parser = argparse.ArgumentParser(prog="audiosum", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the informativeness model")
    p.add_argument("--manifest", required=True, help="TSV of audio_path<TAB>transcript_path")
    p.add_argument("--output", required=True, help="model file to write")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("summarize", help="write an audio summary")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--ratio", type=float)
    p.add_argument("--output", required=True, help="summary WAV")
    p.add_argument("--manifest", required=True, help="summary manifest (TSV)")
    p.add_argument("--plot", help="SVG bar chart of segment scores")
    _add_config_flags(p)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("score", help="print per-segment scores as TSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--ratio", type=float)
    _add_config_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("separate", help="split into background and foreground")
    p.add_argument("--input", required=True)
    p.add_argument("--background", required=True)
    p.add_argument("--foreground", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("jsd", help="divergence between two text files")
    p.add_argument("--source", required=True)
    p.add_argument("--segment", required=True)
    p.add_argument("--delta", type=float, default=JsdParams.delta)
    p.add_argument("--beta-factor", type=float, default=JsdParams.beta_factor)
    p.set_defaults(func=cmd_jsd)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CommandError as exc:
        log.error("%s", exc)
        return 1
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
