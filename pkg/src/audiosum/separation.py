"""Background/foreground split by repetition similarity.

Each frame's repeating (background) spectrum is the per-frequency median of
the frames most similar to it, restricted to frames at least ``gap_seconds``
apart, and clamped by the frame's own magnitude.
"""

import math
from dataclasses import dataclass

import numpy as np

from .spectral import HOP, N_FFT, istft, stft

N_SIMILAR = 100
GAP_SECONDS = 2.0
MASK_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class MaskPair:
    background_mask: np.ndarray
    foreground_mask: np.ndarray


def gap_frames(spec, gap_seconds=GAP_SECONDS):
    return int(math.ceil(gap_seconds * spec.sample_rate / spec.hop))


def _unit_columns(magnitude):
    norms = np.linalg.norm(magnitude, axis=0)
    return magnitude / np.where(norms > 0, norms, 1.0)


def cosine_similarity_matrix(magnitude):
    unit = _unit_columns(magnitude)
    return unit.T @ unit


def _pick_spread(similarity_row, frame, n_similar, gap):
    # Greedy: highest similarity first, ties to the lower index; each pick
    # blocks every frame closer than `gap` to it.
    n = len(similarity_row)
    order = np.lexsort((np.arange(n), -similarity_row))
    picked = [frame]
    blocked = np.zeros(n, dtype=bool)
    blocked[max(0, frame - gap + 1):frame + gap] = True
    order = order[~blocked[order]]
    while len(picked) < n_similar and order.size:
        j = int(order[0])
        picked.append(j)
        blocked[max(0, j - gap + 1):j + gap] = True
        order = order[~blocked[order]]
    return picked


def similar_frames(spec, frame, n_similar=N_SIMILAR, gap_seconds=GAP_SECONDS, similarity=None):
    """Indices of up to ``n_similar`` frames most cosine-similar to ``frame``
    (itself included), pairwise at least ``gap_seconds`` apart."""
    n = spec.n_frames
    if not 0 <= frame < n:
        raise IndexError(f"frame {frame} out of range for {n} frames")
    if similarity is None:
        unit = _unit_columns(spec.magnitude)
        row = unit[:, frame] @ unit
    else:
        row = similarity[frame]
    return _pick_spread(row, frame, n_similar, gap_frames(spec, gap_seconds))


def repeating_model(spec, n_similar=N_SIMILAR, gap_seconds=GAP_SECONDS):
    """Per-frame median of similar frames, clamped to the original magnitude."""
    mag = spec.magnitude
    similarity = cosine_similarity_matrix(mag)
    gap = gap_frames(spec, gap_seconds)
    by_frame = np.ascontiguousarray(mag.T)
    model = np.empty_like(by_frame)
    for t in range(spec.n_frames):
        idx = _pick_spread(similarity[t], t, n_similar, gap)
        model[t] = np.median(by_frame[idx], axis=0)
    return np.minimum(model.T, mag)


def soft_masks(spec, model):
    mag = spec.magnitude
    if model.shape != mag.shape:
        raise ValueError(f"model shape {model.shape} does not match spectrogram {mag.shape}")
    background = np.clip(model / (mag + MASK_EPS), 0.0, 1.0)
    return MaskPair(background, 1.0 - background)


def split_channels(buffer, n_fft=N_FFT, hop=HOP, n_similar=N_SIMILAR, gap_seconds=GAP_SECONDS):
    """Return (background, foreground) buffers; they sum back to ``buffer``."""
    spec = stft(buffer, n_fft, hop)
    masks = soft_masks(spec, repeating_model(spec, n_similar, gap_seconds))
    n = len(buffer)
    background = istft(spec.with_frames(masks.background_mask * spec.frames), n)
    foreground = istft(spec.with_frames(masks.foreground_mask * spec.frames), n)
    return background, foreground
