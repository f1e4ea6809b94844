import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from audiosum.audio_io import AudioBuffer
from audiosum.config import PipelineConfig
from audiosum.model import RegressionModel
from audiosum.segmentation import Segment, SegmentationPlan
from audiosum.summarizer import (
    EMPTY_SELECTION_WARNING,
    ScoredSegment,
    SummaryResult,
    SummarySpec,
    assemble_summary,
    emit_manifest,
    format_manifest,
    log_score_segment,
    parse_manifest,
    score_segment,
    score_segments,
    select_segments,
    summarize,
)
from oracles import greedy_by_enumeration

# four-factor evaluation at 40 digits: dt=10, |Q|=10, |P|=200, t=30, lr=0.4
GOLDEN_SCORE = 0.0045055395775945114275


def test_score_closed_form_points():
    seg = Segment(0.0, 5.0)
    assert score_segment(seg, 1.0, 100.0) == 0.025
    assert score_segment(seg, 0.0, 100.0) == pytest.approx(0.025 * math.e, rel=1e-12)
    assert score_segment(seg, 0.0, 100.0) == pytest.approx(0.067957045711476, rel=1e-12)


def test_score_golden_point():
    seg = Segment(30.0, 40.0)
    terms = (1 / (1 + math.exp(-5.0))) * (10 / 200) * math.exp(-3.0) * math.exp(0.6)
    assert score_segment(seg, 0.4, 200.0) == pytest.approx(terms, rel=1e-12)
    assert score_segment(seg, 0.4, 200.0) == pytest.approx(GOLDEN_SCORE, rel=1e-12)


def test_score_rejects_zero_duration():
    with pytest.raises(ValueError):
        score_segment(Segment(0.0, 1.0), 0.0, 10.0, delta_t=0.0)
    with pytest.raises(ValueError):
        score_segment(Segment(0.0, 1.0), 0.0, 0.0)


@settings(max_examples=60)
@given(
    start=st.floats(0, 100), dur=st.floats(0.5, 30), lr=st.floats(-2, 3),
    bump=st.floats(0.01, 5),
)
def test_score_monotonicity(start, dur, lr, bump):
    seg = Segment(start, start + dur)
    s = score_segment(seg, lr, 500.0)
    assert s > 0 and math.isfinite(s)
    assert score_segment(seg, lr + bump, 500.0) < s
    later = Segment(start + bump, start + bump + dur)
    assert score_segment(later, lr, 500.0) < s
    assert score_segment(seg, lr, 500.0, delta_t=dur + bump) > s
    assert log_score_segment(seg, lr, 500.0) == pytest.approx(math.log(s), rel=1e-12, abs=1e-12)


def test_log_score_survives_underflow():
    late = Segment(3000.0, 3003.0)
    early = Segment(2990.0, 2993.0)
    assert score_segment(late, 0.5, 4000.0) == 0.0
    assert log_score_segment(early, 0.5, 4000.0) > log_score_segment(late, 0.5, 4000.0)


def scored(durations, scores):
    out, t = [], 0.0
    for i, (d, s) in enumerate(zip(durations, scores)):
        seg = Segment(t, t + d, i)
        out.append(ScoredSegment(seg, 0.0, s, math.log(s)))
        t += d
    return out


def test_select_example():
    items = scored([5, 5, 5], [0.9, 0.1, 0.5])
    chosen = select_segments(items, SummarySpec(15.0, 10 / 15))
    assert [s.segment.index for s in chosen] == [0, 2]


def test_select_budget_never_binds():
    items = scored([2, 3, 4], [0.1, 0.3, 0.2])
    chosen = select_segments(items, SummarySpec(9.0, 0.99999))
    assert len(chosen) == 2  # 9 s total does not fit in 8.99991 s
    chosen = select_segments(items, SummarySpec(100.0, 0.5))
    assert [s.segment.index for s in chosen] == [0, 1, 2]


def test_select_ties_prefer_earlier():
    items = scored([3, 3, 3, 3], [0.2] * 4)
    chosen = select_segments(items, SummarySpec(12.0, 0.5))
    assert [s.segment.index for s in chosen] == [0, 1]


def test_select_skips_and_continues():
    items = scored([2, 8, 3], [0.3, 0.9, 0.5])
    # 8 s fits first, 3 s would overflow the 10 s budget, 2 s still fits
    chosen = select_segments(items, SummarySpec(20.0, 0.5))
    assert [s.segment.index for s in chosen] == [0, 1]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31), st.floats(0.05, 0.95))
def test_selection_matches_enumeration(n, seed, ratio):
    rng = np.random.default_rng(seed)
    durations = rng.uniform(0.5, 10, n).round(2)
    scores = rng.uniform(0.01, 1, n)
    items = scored(durations, scores)
    spec = SummarySpec(float(durations.sum()), ratio)
    chosen = select_segments(items, spec)
    starts = [s.segment.start_time for s in items]
    assert [s.segment.index for s in chosen] == greedy_by_enumeration(durations, scores, starts, spec.theta)
    assert sum(s.duration for s in chosen) <= spec.theta


def test_assemble_whole_file_is_identity():
    x = AudioBuffer(np.random.default_rng(0).uniform(-1, 1, 5000), 22050)
    out = assemble_summary(x, [Segment(0.0, x.duration)])
    assert np.array_equal(out.samples, x.samples)


def test_assemble_two_silences():
    x = AudioBuffer(np.zeros(22050 * 20), 22050)
    out = assemble_summary(x, [Segment(0.0, 5.0), Segment(10.0, 15.0)])
    assert len(out) == 2 * 5 * 22050 - 220
    assert out.duration == pytest.approx(9.99, abs=1 / 22050)
    assert not out.samples.any()


def test_assemble_crossfades_only_at_joins():
    sr = 22050
    t = np.arange(4 * sr) / sr
    x = np.where(t < 2, np.sin(2 * np.pi * 300 * t), np.sin(2 * np.pi * 700 * t))
    src = AudioBuffer(x, sr)
    out = assemble_summary(src, [Segment(0.5, 1.5), Segment(2.5, 3.5)]).samples
    a = x[int(0.5 * sr):int(1.5 * sr)]
    b = x[int(2.5 * sr):int(3.5 * sr)]
    m = 220
    assert np.array_equal(out[:len(a) - m], a[:-m])
    assert np.array_equal(out[len(a):], b[m:])
    ramp = np.arange(1, m + 1) / (m + 1)
    np.testing.assert_allclose(out[len(a) - m:len(a)], a[-m:] * (1 - ramp) + b[:m] * ramp, atol=1e-15)


def test_assemble_rejects_bad_segments():
    x = AudioBuffer(np.zeros(22050 * 4), 22050)
    with pytest.raises(ValueError):
        assemble_summary(x, [Segment(3.0, 5.0)])
    with pytest.raises(ValueError):
        assemble_summary(x, [Segment(1.0, 2.0), Segment(1.5, 3.0)])


def _result(durations, scores, ratio):
    items = scored(durations, scores)
    total = float(sum(durations))
    spec = SummarySpec(total, ratio)
    chosen = select_segments(items, spec)
    ids = {s.segment.index for s in chosen}
    items = [ScoredSegment(s.segment, s.lr, s.score, s.log_score, 40, s.segment.index in ids) for s in items]
    plan = SegmentationPlan(len(items), tuple(s.segment for s in items))
    audio = AudioBuffer(np.zeros(int(sum(d for d, s in zip(durations, items) if s.selected) * 100)), 100)
    return SummaryResult(spec, len(items), plan, items, [s for s in items if s.selected], audio)


def test_manifest_bookkeeping(tmp_path):
    result = _result([4, 3, 5, 4], [0.2, 0.9, 0.1, 0.8], 0.5)
    text = emit_manifest(result, tmp_path / "m.tsv", "in.wav", "model.txt", PipelineConfig())
    assert (tmp_path / "m.tsv").read_text() == text
    header, rows = parse_manifest(text)
    assert len(rows) == 4
    assert [r["selected"] for r in rows] == ["false", "true", "false", "true"]
    assert header["k"] == "4" and header["n_selected"] == "2"
    assert float(header["selected_duration"]) == 7.0 <= float(header["theta"])
    assert "warning" not in header
    assert "n_mfcc=25" in header["config"]
    for r in rows:
        assert float(r["end"]) - float(r["start"]) == pytest.approx(float(r["duration"]))


def test_manifest_warns_on_empty_selection():
    result = _result([4, 5], [0.5, 0.6], 0.3)
    assert result.selected == []
    header, _ = parse_manifest(format_manifest(result))
    assert header["warning"] == EMPTY_SELECTION_WARNING


def _bar_heights(svg, n):
    heights = []
    for i in range(n):
        m = re.search(rf'<g id="segment-{i}">\s*<path d="M [\d.]+ ([\d.]+)\s*L [\d.]+ [\d.]+\s*L [\d.]+ ([\d.]+)', svg)
        heights.append(float(m.group(1)) - float(m.group(2)))
    return np.array(heights)


def test_plot_has_one_proportional_bar_per_segment(tmp_path):
    scores = [0.2, 0.9, 0.1, 0.8, 0.45]
    result = _result([4, 3, 5, 4, 2], scores, 0.5)
    emit_manifest(result, tmp_path / "m.tsv", plot_path=tmp_path / "p.svg")
    svg = (tmp_path / "p.svg").read_text()
    assert svg.count('<g id="segment-') == 5
    h = _bar_heights(svg, 5)
    np.testing.assert_allclose(h / h.max(), np.array(scores) / max(scores), rtol=1e-4)
    emit_manifest(result, tmp_path / "m2.tsv", plot_path=tmp_path / "p2.svg")
    assert (tmp_path / "p2.svg").read_bytes() == (tmp_path / "p.svg").read_bytes()


def test_score_segments_carries_lr_and_frames():
    segs = [Segment(0.0, 3.0, 0), Segment(3.0, 7.0, 1)]
    out = score_segments(segs, [0.2, -0.1], 7.0, [130.0, 173.0])
    assert [s.lr for s in out] == [0.2, -0.1]
    assert [s.n_frames for s in out] == [130, 173]
    assert out[1].score == score_segment(segs[1], -0.1, 7.0)


def test_summarize_pipeline_on_constant_model():
    sys_path_synth = pytest.importorskip("synthetic")
    buf, _ = sys_path_synth.broadcast(30.0, seed=3)
    model = RegressionModel(np.zeros(277), 0.5, np.zeros(277), np.ones(277))
    result = summarize(buf, model)
    assert result.k == 10 == len(result.scored)
    assert sum(s.duration for s in result.selected) <= result.spec.theta
    assert all(s.lr == 0.5 for s in result.scored)
    starts = [s.segment.start_time for s in result.selected]
    assert starts == sorted(starts)
    n_joins = max(0, len(result.selected) - 1)
    expected = sum(int(round(s.segment.end_time * 22050)) - int(round(s.segment.start_time * 22050))
                   for s in result.selected) - 220 * n_joins
    assert len(result.audio) == expected
