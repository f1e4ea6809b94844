"""Transcript-free extractive audio summarization.

A linear model learned from transcripts maps MFCC statistics of an audio
segment to its word-distribution divergence from the whole document; at
summary time only audio is needed.
"""

from .audio_io import AudioBuffer, read_wav, write_wav
from .config import PipelineConfig, load_config
from .model import RegressionModel, fit, load, predict, save
from .summarizer import summarize

__all__ = [
    "AudioBuffer",
    "PipelineConfig",
    "RegressionModel",
    "fit",
    "load",
    "load_config",
    "predict",
    "read_wav",
    "save",
    "summarize",
    "write_wav",
]
__version__ = "0.1.0"
