"""Segment scoring, budgeted selection, audio assembly and the run manifest."""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from . import model as lr_model
from .audio_io import AudioBuffer
from .config import PipelineConfig
from .features import features_from_mfcc, segment_features
from .segmentation import cluster_segments, target_k
from .separation import split_channels
from .spectral import mfcc

log = logging.getLogger(__name__)

MANIFEST_HEADER = "audiosum-manifest v1"
CROSSFADE_SECONDS = 0.010
SIGMOID_MIDPOINT = 5.0
EMPTY_SELECTION_WARNING = "budget below minimum segment"


@dataclass(frozen=True)
class SummarySpec:
    duration: float
    ratio: float = 0.35

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ValueError(f"ratio must be in (0, 1), got {self.ratio}")
        if not self.duration > 0:
            raise ValueError("source duration must be positive")

    @property
    def theta(self):
        return self.ratio * self.duration


@dataclass(frozen=True)
class ScoredSegment:
    segment: object
    lr: float
    score: float
    log_score: float
    n_frames: int = 0
    selected: bool = False

    @property
    def duration(self):
        return self.segment.duration


def log_score_segment(seg, lr, source_duration, delta_t=None):
    dt = seg.duration if delta_t is None else delta_t
    if not dt > 0:
        raise ValueError("segment duration must be positive")
    if not source_duration > 0:
        raise ValueError("source duration must be positive")
    # log of the logistic, stable on both tails
    z = dt - SIGMOID_MIDPOINT
    log_sigmoid = -math.log1p(math.exp(-z)) if z >= 0 else z - math.log1p(math.exp(z))
    return (log_sigmoid + math.log(seg.duration / source_duration)
            - seg.start_time / dt + (1.0 - lr))


def score_segment(seg, lr, source_duration, delta_t=None):
    """Pertinence of a segment: logistic in its length (midpoint 5 s), times
    its share of the source, times exp(-start / length), times exp(1 - lr).

    ``delta_t`` defaults to the segment duration, which is also the gap to
    the next segment's start for a contiguous partition.
    """
    dt = seg.duration if delta_t is None else delta_t
    if not dt > 0:
        raise ValueError("segment duration must be positive")
    if not source_duration > 0:
        raise ValueError("source duration must be positive")
    sigmoid = 1.0 / (1.0 + math.exp(-(dt - SIGMOID_MIDPOINT)))
    return sigmoid * (seg.duration / source_duration) * math.exp(-seg.start_time / dt) * math.exp(1.0 - lr)


def score_segments(segments, lrs, source_duration, n_frames=None):
    out = []
    for i, (seg, lr) in enumerate(zip(segments, lrs)):
        lr = float(lr)
        out.append(ScoredSegment(
            segment=seg,
            lr=lr,
            score=score_segment(seg, lr, source_duration),
            log_score=log_score_segment(seg, lr, source_duration),
            n_frames=0 if n_frames is None else int(n_frames[i]),
        ))
    return out


def select_segments(scored, spec):
    """Greedy budgeted pick: best score first (ties to the earlier start),
    admit while the running total stays within ``spec.theta``, skip what
    does not fit and keep scanning. Returned in chronological order."""
    ranked = sorted(scored, key=lambda s: (-s.log_score, -s.score, s.segment.start_time))
    total = 0.0
    picked = []
    for s in ranked:
        if total + s.duration <= spec.theta:
            picked.append(s)
            total += s.duration
    return sorted(picked, key=lambda s: s.segment.start_time)


def mark_selected(scored, selected):
    chosen = {id(s) for s in selected}
    return [replace(s, selected=id(s) in chosen) for s in scored]


def assemble_summary(source, selected, crossfade=CROSSFADE_SECONDS):
    """Concatenate segments in order with a linear crossfade at each join."""
    sr = source.sample_rate
    n = len(source)
    pieces = []
    prev_end = -1
    for seg in selected:
        a = int(round(seg.start_time * sr))
        b = int(round(seg.end_time * sr))
        if a < 0 or b > n or b <= a:
            raise ValueError(f"segment [{seg.start_time}, {seg.end_time}) outside the source")
        if a < prev_end:
            raise ValueError("segments overlap or are not chronological")
        prev_end = b
        pieces.append(source.samples[a:b])
    if not pieces:
        return AudioBuffer(np.zeros(0), sr)
    fade = int(round(crossfade * sr))
    out = pieces[0]
    for piece in pieces[1:]:
        m = min(fade, len(out), len(piece))
        if m == 0:
            out = np.concatenate([out, piece])
            continue
        ramp = np.arange(1, m + 1) / (m + 1)
        mixed = out[-m:] * (1.0 - ramp) + piece[:m] * ramp
        out = np.concatenate([out[:-m], mixed, piece[m:]])
    return AudioBuffer(out, sr)


@dataclass
class SummaryResult:
    spec: SummarySpec
    k: int
    plan: object
    scored: list
    selected: list
    audio: AudioBuffer  # empty when nothing fits the budget

    @property
    def warning(self):
        return EMPTY_SELECTION_WARNING if not self.selected else None


def _features_for(buffer, seg, config):
    kwargs = dict(n_mfcc=config.n_mfcc, n_fft=config.n_fft, hop=config.hop, n_mels=config.n_mels)
    try:
        return segment_features(buffer, seg, **kwargs)
    except ValueError:
        pass
    # too short for one window: describe a window-long excerpt around it,
    # keeping the segment's own start time
    half = config.n_fft / config.sample_rate / 2.0
    mid = (seg.start_time + seg.end_time) / 2.0
    a = min(max(0.0, mid - half), max(0.0, buffer.duration - 2 * half))
    piece = buffer.slice_seconds(a, a + 2 * half + 1.0 / config.sample_rate)
    log.debug("segment %d shorter than one window, using %.3f s excerpt", seg.index, piece.duration)
    return features_from_mfcc(mfcc(piece, **kwargs), seg.start_time)


def summarize(buffer, model, config=PipelineConfig(), ratio=None):
    """Full transcript-free pipeline on one buffer."""
    lr_model.check_compatible(model, config)
    ratio = config.ratio if ratio is None else ratio
    spec = SummarySpec(buffer.duration, ratio)
    background, _ = split_channels(buffer, config.n_fft, config.hop, config.n_similar, config.separation_gap)
    bg_mfcc = mfcc(background, config.n_mfcc, config.n_fft, config.hop, config.n_mels)
    k = target_k(buffer.duration, bg_mfcc.n_frames)
    plan = cluster_segments(bg_mfcc, k, buffer.duration)
    rows = np.array([_features_for(buffer, seg, config) for seg in plan.segments])
    lrs = lr_model.predict(model, rows, config)
    scored = score_segments(plan.segments, np.atleast_1d(lrs), buffer.duration, rows[:, -2])
    selected = select_segments(scored, spec)
    scored = mark_selected(scored, selected)
    chosen = [s for s in scored if s.selected]
    audio = assemble_summary(buffer, [s.segment for s in chosen])
    log.info("k=%d, selected %d segments, budget %.2f s", k, len(chosen), spec.theta)
    return SummaryResult(spec, k, plan, scored, chosen, audio)


def _num(v):
    return format(float(v), ".10g")


def format_manifest(result, source_path="", model_path="", config=None):
    """Manifest text: ``key<TAB>value`` header, a blank line, then one TSV
    row per candidate segment."""
    sel_total = sum(s.duration for s in result.selected)
    header = [
        ("source", source_path),
        ("duration", _num(result.spec.duration)),
        ("k", str(result.k)),
        ("ratio", _num(result.spec.ratio)),
        ("theta", _num(result.spec.theta)),
        ("mean_segment_length", _num(result.plan.mean_segment_length)),
        ("n_selected", str(len(result.selected))),
        ("selected_duration", _num(sel_total)),
        ("summary_duration", _num(result.audio.duration)),
        ("model", model_path),
        ("schema_version", "1"),
    ]
    if config is not None:
        header.append(("config", config.echo()))
    if result.warning:
        header.append(("warning", result.warning))
    lines = [MANIFEST_HEADER]
    lines += [f"{k}\t{v}" for k, v in header]
    lines.append("")
    lines.append("\t".join(("index", "start", "end", "duration", "n_frames", "lr", "score", "log_score", "selected")))
    for s in result.scored:
        seg = s.segment
        lines.append("\t".join((
            str(seg.index), _num(seg.start_time), _num(seg.end_time), _num(seg.duration),
            str(s.n_frames), _num(s.lr), format(s.score, ".10g"), _num(s.log_score),
            "true" if s.selected else "false",
        )))
    return "\n".join(lines) + "\n"


def parse_manifest(text):
    """Inverse of :func:`format_manifest`: (header dict, list of row dicts)."""
    lines = text.splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        raise ValueError("not a summary manifest")
    blank = lines.index("")
    header = dict(line.split("\t", 1) for line in lines[1:blank])
    columns = lines[blank + 1].split("\t")
    rows = [dict(zip(columns, line.split("\t"))) for line in lines[blank + 2:] if line]
    return header, rows


def emit_manifest(result, manifest_path, source_path="", model_path="", config=None, plot_path=None):
    text = format_manifest(result, source_path, model_path, config)
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if plot_path is not None:
        from .plotting import plot_scores
        plot_scores(result.scored, plot_path)
    return text
