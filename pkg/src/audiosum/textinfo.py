"""Smoothed Jensen-Shannon divergence between a transcript segment and its
source document, and construction of (features, divergence) training pairs."""

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

from .features import segment_features
from .segmentation import Segment

MIN_WINDOW_SECONDS = 3.0


@dataclass(frozen=True)
class JsdParams:
    delta: float = 0.0005
    beta_factor: float = 1.5

    def __post_init__(self):
        if not self.delta > 0 or not self.beta_factor > 0:
            raise ValueError("delta and beta_factor must be positive")


@dataclass(frozen=True)
class TokenDistribution:
    counts: dict = field(default_factory=dict)

    @classmethod
    def from_tokens(cls, tokens):
        return cls(dict(Counter(tokens)))

    @property
    def total_tokens(self):
        return sum(self.counts.values())

    @property
    def vocabulary(self):
        return frozenset(self.counts)


@dataclass(frozen=True)
class TimedTranscript:
    words: tuple  # ((start_seconds, token), ...)

    def __post_init__(self):
        starts = [t for t, _ in self.words]
        if any(b < a for a, b in zip(starts, starts[1:])):
            raise ValueError("transcript start times must be non-decreasing")

    @property
    def tokens(self):
        return [w for _, w in self.words]

    def tokens_between(self, start, end):
        return [w for t, w in self.words if start <= t < end]


def _is_punct(ch):
    return unicodedata.category(ch).startswith("P")


def tokenize(text):
    """Lowercase, split on whitespace, strip edge punctuation, drop empties."""
    tokens = []
    for raw in text.lower().split():
        a, b = 0, len(raw)
        while a < b and _is_punct(raw[a]):
            a += 1
        while b > a and _is_punct(raw[b - 1]):
            b -= 1
        if a < b:
            tokens.append(raw[a:b])
    return tokens


def smoothed_prob(dist, word, params, vocab_size):
    if vocab_size < 1:
        raise ValueError("vocabulary size must be at least 1")
    beta = params.beta_factor * vocab_size
    return (dist.counts.get(word, 0) + params.delta) / (dist.total_tokens + params.delta * beta)


def jsd(source, segment, params=JsdParams()):
    """Base-2 smoothed JS divergence, summed over the union vocabulary.

    The smoothing vocabulary size is that of the union too, which equals the
    source vocabulary whenever the segment is drawn from the source and keeps
    the function symmetric otherwise.
    """
    if source.total_tokens == 0:
        raise ValueError("source distribution is empty")
    vocab = sorted(source.vocabulary | segment.vocabulary)
    v = len(vocab)
    total = 0.0
    for w in vocab:
        p = smoothed_prob(source, w, params, v)
        q = smoothed_prob(segment, w, params, v)
        m = p + q
        total += p * math.log2(2.0 * p / m) + q * math.log2(2.0 * q / m)
    return 0.5 * total


def read_transcript(path):
    """Parse ``start_seconds<TAB>token`` lines; ``#`` lines and blanks skipped."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                start, text = line.split("\t", 1)
                start = float(start)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'start<TAB>token'") from None
            for token in tokenize(text):
                words.append((start, token))
    return TimedTranscript(tuple(words))


def training_windows(duration, segment_length=10.0):
    """Consecutive windows of ``segment_length``; a remainder shorter than
    3 s is merged into the previous window."""
    if duration < MIN_WINDOW_SECONDS:
        raise ValueError(f"audio too short for a training window ({duration:.3f} s)")
    n_full = int(math.floor(duration / segment_length + 1e-9))
    cuts = [i * segment_length for i in range(n_full + 1)]
    remainder = duration - cuts[-1]
    if remainder >= MIN_WINDOW_SECONDS - 1e-9:
        cuts.append(duration)
    elif n_full >= 1:
        cuts[-1] = duration
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]


def build_training_pairs(audio, transcript, segment_length=10.0, params=JsdParams(), config=None):
    """(feature vector, divergence) for every window with spoken words."""
    if not transcript.words:
        raise ValueError("transcript is empty")
    kwargs = {}
    if config is not None:
        kwargs = dict(n_mfcc=config.n_mfcc, n_fft=config.n_fft, hop=config.hop, n_mels=config.n_mels)
    source = TokenDistribution.from_tokens(transcript.tokens)
    pairs = []
    windows = training_windows(audio.duration, segment_length)
    for i, (start, end) in enumerate(windows):
        end_incl = math.inf if i == len(windows) - 1 else end
        tokens = transcript.tokens_between(start, end_incl)
        if not tokens:
            continue
        x = segment_features(audio, Segment(start, end, i), **kwargs)
        pairs.append((x, jsd(source, TokenDistribution.from_tokens(tokens), params)))
    return pairs
