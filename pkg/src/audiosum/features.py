"""The 277-value segment descriptor.

Layout, coefficient-major: for each MFCC coefficient c in 0..24 eleven
statistics in ``STAT_NAMES`` order, then the segment's frame count and its
start time in seconds.
"""

import numpy as np

from .spectral import HOP, N_FFT, N_MELS, N_MFCC, deltas, mfcc

LAYOUT_VERSION = 1
STAT_NAMES = (
    "min", "max", "median", "mean", "var", "skew", "kurt",
    "d1_mean", "d1_var", "d2_mean", "d2_var",
)
N_STATS = len(STAT_NAMES)


def n_features(n_mfcc=N_MFCC):
    return n_mfcc * N_STATS + 2


N_FEATURES = n_features()
FRAME_COUNT_INDEX = N_FEATURES - 2
START_TIME_INDEX = N_FEATURES - 1


def feature_index(coefficient, stat):
    return coefficient * N_STATS + STAT_NAMES.index(stat)


def feature_names(n_mfcc=N_MFCC):
    names = [f"c{c}_{s}" for c in range(n_mfcc) for s in STAT_NAMES]
    return names + ["n_frames", "start_time"]


def _moments(x):
    mean = x.mean()
    centred = x - mean
    m2 = np.mean(centred**2)
    # exact zero variance is rare after float arithmetic on constant input
    if m2 <= (1e-12 * max(1.0, abs(mean))) ** 2:
        return mean, 0.0, 0.0, 0.0
    m3 = np.mean(centred**3)
    m4 = np.mean(centred**4)
    return mean, m2, m3 / m2**1.5, m4 / m2**2


def stats_11(series, dseries, ddseries):
    """min, max, median, mean, variance, skewness, kurtosis of ``series``
    followed by mean and variance of each derivative series.

    Variances are population variances; kurtosis is non-excess. A constant
    series gets skewness and kurtosis 0.
    """
    # sorted copies make every statistic bit-identical under reordering
    x = np.sort(np.asarray(series, dtype=np.float64))
    d = np.sort(np.asarray(dseries, dtype=np.float64))
    dd = np.sort(np.asarray(ddseries, dtype=np.float64))
    if x.size == 0 or d.size == 0 or dd.size == 0:
        raise ValueError("statistics need non-empty series")
    mean, var, skew, kurt = _moments(x)
    d_mean, d_var, _, _ = _moments(d)
    dd_mean, dd_var, _, _ = _moments(dd)
    return np.array([
        x[0], x[-1], np.median(x), mean, var, skew, kurt,
        d_mean, d_var, dd_mean, dd_var,
    ])


def pool_features(phi, d1, d2, start_time):
    """Aggregate (n_mfcc, n_frames) matrices of coefficients and their two
    derivatives into the flat descriptor."""
    rows = [stats_11(phi[c], d1[c], d2[c]) for c in range(phi.shape[0])]
    return np.concatenate(rows + [np.array([float(phi.shape[1]), float(start_time)])])


def features_from_mfcc(m, start_time):
    d1, d2 = deltas(m)
    return pool_features(m.coefficients, d1.coefficients, d2.coefficients, start_time)


def segment_features(buffer, seg, n_mfcc=N_MFCC, n_fft=N_FFT, hop=HOP, n_mels=N_MELS):
    """Descriptor of ``seg`` computed on the samples of ``buffer`` it spans."""
    piece = buffer.slice_seconds(seg.start_time, seg.end_time)
    if len(piece) < n_fft or 1 + len(piece) // hop < 3:
        raise ValueError(
            f"segment [{seg.start_time:.3f}, {seg.end_time:.3f}) too short for features "
            f"({len(piece)} samples, need {max(n_fft, 2 * hop)})"
        )
    return features_from_mfcc(mfcc(piece, n_mfcc, n_fft, hop, n_mels), seg.start_time)
