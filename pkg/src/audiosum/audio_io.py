"""WAV input/output and the canonical mono buffer used by every stage."""

import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

CANONICAL_RATE = 22050


class AudioFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono float64 samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate

    def slice_seconds(self, start, end):
        a = int(round(start * self.sample_rate))
        b = int(round(end * self.sample_rate))
        return AudioBuffer(self.samples[max(a, 0):min(b, len(self.samples))], self.sample_rate)


def _to_float(data):
    kind = data.dtype
    if kind == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if kind == np.int16:
        return data.astype(np.float64) / 32768.0
    if kind == np.int32:
        # scipy left-aligns 24-bit PCM into int32, so one scale covers both
        return data.astype(np.float64) / 2147483648.0
    if kind in (np.float32, np.float64):
        return np.clip(data.astype(np.float64), -1.0, 1.0)
    raise AudioFormatError(f"unsupported sample format {kind}")


def mixdown(data):
    """Average a (frames, channels) array to mono."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        return data
    if np.all(data == data[:, :1]):
        return data[:, 0].copy()
    return data.mean(axis=1)


def read_wav(path, target_rate=CANONICAL_RATE):
    """Read a PCM or float WAV file as a mono buffer at ``target_rate``."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such audio file: {path}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(path)
    except (ValueError, EOFError, OSError) as exc:
        raise AudioFormatError(f"{path}: malformed or unsupported WAV: {exc}") from exc
    if data.size == 0 or data.shape[0] == 0:
        raise AudioFormatError(f"{path}: zero-length audio")
    samples = mixdown(_to_float(data))
    return resample_mixdown(AudioBuffer(samples, rate), target_rate)


def resample_mixdown(buffer, target_rate):
    """Linear-interpolation resampling of a mono buffer.

    The output keeps the input duration to within one output sample period.
    """
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    target_rate = int(target_rate)
    if target_rate == buffer.sample_rate:
        return AudioBuffer(buffer.samples.copy(), target_rate)
    n_in = len(buffer.samples)
    n_out = max(1, int(round(n_in * target_rate / buffer.sample_rate)))
    t_out = np.arange(n_out) / target_rate
    t_in = np.arange(n_in) / buffer.sample_rate
    out = np.interp(t_out, t_in, buffer.samples)
    return AudioBuffer(out, target_rate)


def write_wav(buffer, path):
    """Write a 16-bit PCM mono WAV file."""
    quantized = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767).astype(np.int16)
    try:
        wavfile.write(path, buffer.sample_rate, quantized)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
