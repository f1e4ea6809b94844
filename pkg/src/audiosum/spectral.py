"""STFT/ISTFT, mel filterbank, MFCCs and their temporal derivatives."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.signal

from .audio_io import AudioBuffer

N_FFT = 2048
HOP = 512
N_MELS = 128
N_MFCC = 25
LOG_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Complex STFT bins, shape (n_fft // 2 + 1, n_frames)."""

    frames: np.ndarray
    n_fft: int
    hop: int
    sample_rate: int

    @property
    def n_bins(self):
        return self.frames.shape[0]

    @property
    def n_frames(self):
        return self.frames.shape[1]

    @property
    def magnitude(self):
        return np.abs(self.frames)

    def with_frames(self, frames):
        return Spectrogram(frames, self.n_fft, self.hop, self.sample_rate)


@dataclass(frozen=True, eq=False)
class MfccMatrix:
    coefficients: np.ndarray  # (n_mfcc, n_frames)
    frame_times: np.ndarray  # seconds, frame centres

    def __post_init__(self):
        if self.coefficients.ndim != 2:
            raise ValueError("coefficients must be a 2-D matrix")
        if self.coefficients.shape[1] != len(self.frame_times):
            raise ValueError("frame_times length must match the number of frames")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("MFCC matrix contains non-finite values")

    @property
    def n_frames(self):
        return self.coefficients.shape[1]


@lru_cache(maxsize=8)
def _window(n_fft):
    return scipy.signal.get_window("hann", n_fft, fftbins=True)


def stft(buffer, n_fft=N_FFT, hop=HOP):
    """Centred, reflect-padded, Hann-windowed STFT.

    Frame ``t`` is centred on sample ``t * hop``; there are
    ``1 + len // hop`` frames.
    """
    if hop <= 0 or hop > n_fft:
        raise ValueError(f"hop must be in (0, n_fft], got {hop}")
    x = buffer.samples
    if len(x) < n_fft:
        raise ValueError(f"buffer shorter than one window ({len(x)} < {n_fft} samples)")
    padded = np.pad(x, n_fft // 2, mode="reflect")
    n_frames = 1 + len(x) // hop
    framed = np.lib.stride_tricks.sliding_window_view(padded, n_fft)[::hop][:n_frames]
    frames = np.fft.rfft(framed * _window(n_fft), axis=1).T
    return Spectrogram(np.ascontiguousarray(frames), n_fft, hop, buffer.sample_rate)


def istft(spec, length):
    """Inverse of :func:`stft` by windowed overlap-add.

    Output is normalised by the summed squared window, so ``istft(stft(x))``
    reproduces ``x``.
    """
    n_fft, hop = spec.n_fft, spec.hop
    if hop <= 0 or hop > n_fft or spec.frames.shape[0] != n_fft // 2 + 1:
        raise ValueError(
            f"inconsistent spectrogram metadata: {spec.frames.shape[0]} bins, n_fft={n_fft}, hop={hop}"
        )
    window = _window(n_fft)
    n_frames = spec.n_frames
    frames = np.fft.irfft(spec.frames.T, n=n_fft, axis=1) * window
    total = n_fft + hop * (n_frames - 1)
    out = np.zeros(total)
    norm = np.zeros(total)
    wsq = window**2
    for t in range(n_frames):
        s = t * hop
        out[s:s + n_fft] += frames[t]
        norm[s:s + n_fft] += wsq
    nonzero = norm > np.finfo(float).tiny
    out[nonzero] /= norm[nonzero]
    start = n_fft // 2
    out = out[start:start + length]
    if len(out) < length:
        out = np.pad(out, (0, length - len(out)))
    return AudioBuffer(out, spec.sample_rate)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def mel_filterbank(sample_rate, n_fft=N_FFT, n_mels=N_MELS):
    """Triangular filters of unit peak, equally spaced on the mel scale
    between 0 Hz and Nyquist. Shape (n_mels, n_fft // 2 + 1)."""
    fft_freqs = np.linspace(0.0, sample_rate / 2.0, n_fft // 2 + 1)
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    lower, centre, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (fft_freqs - lower) / (centre - lower)
    falling = (upper - fft_freqs) / (upper - centre)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights.setflags(write=False)
    return weights


def mfcc_from_spectrogram(spec, n_mfcc=N_MFCC, n_mels=N_MELS):
    power = np.abs(spec.frames) ** 2
    mel = mel_filterbank(spec.sample_rate, spec.n_fft, n_mels) @ power
    log_mel = np.log(np.maximum(mel, LOG_FLOOR))
    coefficients = scipy.fft.dct(log_mel, type=2, norm="ortho", axis=0)[:n_mfcc]
    times = np.arange(spec.n_frames) * spec.hop / spec.sample_rate
    return MfccMatrix(coefficients, times)


def mfcc(buffer, n_mfcc=N_MFCC, n_fft=N_FFT, hop=HOP, n_mels=N_MELS):
    """MFCCs: power STFT -> mel bands -> natural log -> orthonormal DCT-II."""
    return mfcc_from_spectrogram(stft(buffer, n_fft, hop), n_mfcc, n_mels)


def _centred_difference(x):
    padded = np.pad(x, ((0, 0), (1, 1)), mode="edge")
    return (padded[:, 2:] - padded[:, :-2]) / 2.0


def deltas(m):
    """First and second temporal derivatives by centred differences with
    edge replication."""
    if m.n_frames < 3:
        raise ValueError(f"need at least 3 frames for deltas, got {m.n_frames}")
    d1 = _centred_difference(m.coefficients)
    d2 = _centred_difference(d1)
    return MfccMatrix(d1, m.frame_times), MfccMatrix(d2, m.frame_times)
