"""Pipeline configuration shared by every stage and echoed into outputs."""

import dataclasses
import json
import os
from dataclasses import dataclass

CONFIG_ENV_VAR = "AUDIOSUM_CONFIG"


@dataclass(frozen=True)
class PipelineConfig:
    sample_rate: int = 22050
    n_fft: int = 2048
    hop: int = 512
    n_mfcc: int = 25
    n_mels: int = 128
    segment_length_train: float = 10.0
    ratio: float = 0.35
    n_similar: int = 100
    separation_gap: float = 2.0

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(f"config field {field.name} must be positive, got {value!r}")
        if self.hop > self.n_fft:
            raise ValueError("hop must not exceed n_fft")
        if not self.ratio < 1:
            raise ValueError("ratio must be in (0, 1)")

    def replace(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def echo(self):
        """Single-line ``key=value`` rendering, stable field order."""
        return " ".join(f"{f.name}={getattr(self, f.name)!r}" for f in dataclasses.fields(self))

    def as_dict(self):
        return dataclasses.asdict(self)


def load_config(path=None):
    """Build the effective config.

    Precedence (lowest first): defaults, the JSON file at ``path`` or at
    ``$AUDIOSUM_CONFIG``. Command-line overrides are applied by the caller
    via :meth:`PipelineConfig.replace`.
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    known = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ValueError(f"{path}: unknown config keys {unknown}")
    return PipelineConfig(**data)
