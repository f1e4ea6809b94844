"""Contiguous segmentation by temporally-constrained agglomerative clustering."""

import heapq
import math
from dataclasses import dataclass

import numpy as np

SEGMENTS_PER_MINUTE = 20
MIN_SEGMENTS = 2


@dataclass(frozen=True)
class Segment:
    start_time: float
    end_time: float
    index: int = 0

    def __post_init__(self):
        if not self.end_time > self.start_time:
            raise ValueError(f"segment must have positive duration: [{self.start_time}, {self.end_time})")
        if self.start_time < 0:
            raise ValueError(f"segment starts before 0: {self.start_time}")

    @property
    def duration(self):
        return self.end_time - self.start_time


@dataclass(frozen=True)
class SegmentationPlan:
    k: int
    segments: tuple
    boundaries: tuple = ()  # first frame of each segment

    @property
    def mean_segment_length(self):
        return sum(s.duration for s in self.segments) / len(self.segments)


def target_k(duration, n_frames=None):
    """Number of candidate segments: 20 per minute, at least 2, at most one
    per feature frame."""
    if not duration > 0:
        raise ValueError(f"duration must be positive, got {duration}")
    k = max(MIN_SEGMENTS, int(math.floor(duration / 60.0 * SEGMENTS_PER_MINUTE + 0.5)))
    if n_frames is not None:
        k = min(k, n_frames)
    return k


def cluster_boundaries(features, k):
    """Merge adjacent clusters by least Ward cost until ``k`` remain.

    ``features`` is (n_dims, n_frames). Returns the sorted first-frame index of
    each of the ``k`` clusters (the first is always 0). Cost ties merge the
    earliest pair.
    """
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[1]
    if k < MIN_SEGMENTS:
        raise ValueError(f"k must be at least {MIN_SEGMENTS}, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of frames ({n})")

    # clusters keyed by their first frame; doubly-linked via prev/next
    size = np.ones(n)
    centroid = x.T.copy()
    nxt = list(range(1, n)) + [-1]
    prv = [-1] + list(range(n - 1))
    alive = np.ones(n, dtype=bool)
    version = [0] * n

    def cost(a, b):
        diff = centroid[a] - centroid[b]
        return size[a] * size[b] / (size[a] + size[b]) * float(diff @ diff)

    heap = [(cost(i, i + 1), i, 0, 0) for i in range(n - 1)]
    heapq.heapify(heap)
    remaining = n
    while remaining > k:
        c, a, va, vb = heapq.heappop(heap)
        b = nxt[a]
        if not alive[a] or b < 0 or version[a] != va or version[b] != vb:
            continue
        total = size[a] + size[b]
        centroid[a] = (size[a] * centroid[a] + size[b] * centroid[b]) / total
        size[a] = total
        alive[b] = False
        nxt[a] = nxt[b]
        if nxt[b] >= 0:
            prv[nxt[b]] = a
        version[a] += 1
        remaining -= 1
        p = prv[a]
        if p >= 0:
            heapq.heappush(heap, (cost(p, a), p, version[p], version[a]))
        if nxt[a] >= 0:
            heapq.heappush(heap, (cost(a, nxt[a]), a, version[a], version[nxt[a]]))
    return [int(i) for i in np.flatnonzero(alive)]


def plan_from_boundaries(boundaries, frame_times, duration, k=None):
    """Convert first-frame indices to contiguous segments in seconds.

    Inner boundaries sit midway between the last frame of one cluster and
    the first frame of the next.
    """
    times = np.asarray(frame_times, dtype=float)
    cuts = [0.0]
    for b in boundaries[1:]:
        cuts.append(float((times[b - 1] + times[b]) / 2.0))
    cuts.append(float(duration))
    segments = tuple(Segment(cuts[i], cuts[i + 1], i) for i in range(len(boundaries)))
    return SegmentationPlan(k if k is not None else len(segments), segments, tuple(boundaries))


def cluster_segments(features, k, duration=None):
    """Partition an :class:`~audiosum.spectral.MfccMatrix` into ``k``
    contiguous segments.

    ``duration`` is the source length in seconds; by default the end of the
    last frame's hop.
    """
    times = features.frame_times
    if duration is None:
        step = times[1] - times[0] if len(times) > 1 else 0.0
        duration = float(times[-1] + step)
    boundaries = cluster_boundaries(features.coefficients, k)
    return plan_from_boundaries(boundaries, times, duration, k)
