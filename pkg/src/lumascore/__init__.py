"""Brightness-curve sonification: video in, MIDI score and analysis artifacts out."""

from .composition import HarmonyConfig, Score, compose
from .config import PipelineConfig, load_config, parse_config
from .gestures import Archetype, ShapeKind, assign_motifs, classify
from .ingest import StreamInfo, open_source
from .photometry import BrightnessCurve, CurveChannel, CurveSet, extract_curves
from .pipeline import run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Archetype",
    "BrightnessCurve",
    "CurveChannel",
    "CurveSet",
    "HarmonyConfig",
    "PipelineConfig",
    "Score",
    "ShapeKind",
    "StreamInfo",
    "assign_motifs",
    "classify",
    "compose",
    "extract_curves",
    "load_config",
    "open_source",
    "parse_config",
    "run_pipeline",
    "__version__",
]
