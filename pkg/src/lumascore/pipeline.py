"""Stage functions tying extraction, analysis and composition together.

The pipeline writes each artifact and feeds the written bytes to the next
stage, so running the stages separately over the same files produces the
same bytes as one pipeline invocation.
"""

from __future__ import annotations

from pathlib import Path

from .composition import compose
from .config import ConfigError, PipelineConfig
from .curveprep import resample, smooth
from .gestures import assign_motifs, classify
from .ingest import open_source
from .midi import write_smf
from .photometry import CurveChannel, extract_curves
from .report import (
    build_report,
    gestures_from_report,
    parse_report,
    read_curves_csv,
    report_to_bytes,
    write_curves_csv,
)
from .segmentation import SegmentationParams, apply_manual_boundaries, segment
from .svgplot import plot_svg


def extract_stage(input_path: str | Path, channels, workers: int = 1) -> bytes:
    source = open_source(input_path)
    try:
        curves = extract_curves(source, channels, workers=workers)
    finally:
        source.close()
    return write_curves_csv(curves)


def analyze_stage(csv_data: bytes, config: PipelineConfig, source_name: str = "<curves>") -> bytes:
    curves = read_curves_csv(csv_data, source_name)
    if CurveChannel.LUMA not in curves:
        raise ValueError("%s: analysis needs a luma column" % source_name)
    luma = curves[CurveChannel.LUMA]
    raw = resample(luma, config.analysis.rate_hz)
    smoothed = smooth(raw, config.analysis.smooth_window_s)
    if config.manual_boundaries_s is not None:
        segments = apply_manual_boundaries(smoothed, config.manual_boundaries_s)
    else:
        segments = segment(smoothed, SegmentationParams(
            config.analysis.min_segment_s, config.analysis.penalty_beta
        ))
    params = config.classify_params()
    rate = config.analysis.rate_hz
    gestures = [
        classify(
            smoothed.values[s.start_idx:s.end_idx],
            raw.values[s.start_idx:s.end_idx],
            rate,
            params,
            s,
        )
        for s in segments
    ]
    assign_motifs(gestures, rate)
    for override in config.overrides:
        if not 0 <= override.segment_index < len(gestures):
            raise ConfigError(
                "config: overrides segment_index %d out of range (0..%d)"
                % (override.segment_index, len(gestures) - 1)
            )
        gestures[override.segment_index].archetype = override.archetype
    source = {
        "channels": sorted(c.value for c in curves),
        "num_samples": len(luma.values),
        "sample_rate_hz": float(luma.sample_rate),
        "duration_s": float(luma.duration),
    }
    report = build_report(source, rate, smoothed, gestures, config)
    return report_to_bytes(report)


def compose_stage(report_data: bytes, config: PipelineConfig, source_name: str = "<analysis>") -> bytes:
    doc = parse_report(report_data, source_name)
    gestures, curve = gestures_from_report(doc)
    score = compose(
        gestures,
        curve,
        config.harmony,
        seed=config.seed,
        lambda_max=config.texture.lambda_max,
        grain_s=config.texture.grain_ms / 1000.0,
    )
    return write_smf(score)


def plot_stage(csv_data: bytes, report_data: bytes | None = None,
               source_name: str = "<curves>") -> bytes:
    curves = read_curves_csv(csv_data, source_name)
    if CurveChannel.LUMA in curves:
        curve = curves[CurveChannel.LUMA]
    else:
        curve = next(iter(curves.values()))
    segments = None
    if report_data is not None:
        doc = parse_report(report_data)
        segments = [
            (seg["start_s"], seg["end_s"], seg["archetype"])
            for seg in doc["segments"]
        ]
    return plot_svg(curve, segments)


def run_pipeline(
    input_path: str | Path,
    config: PipelineConfig,
    out_dir: str | Path,
    workers: int = 1,
) -> dict[str, Path]:
    """Extract, analyze, compose and plot, writing all four artifacts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_data = extract_stage(input_path, (CurveChannel.LUMA,), workers=workers)
    csv_path = out / "curves.csv"
    csv_path.write_bytes(csv_data)
    report_data = analyze_stage(csv_path.read_bytes(), config, str(csv_path))
    report_path = out / "analysis.json"
    report_path.write_bytes(report_data)
    midi_data = compose_stage(report_path.read_bytes(), config, str(report_path))
    midi_path = out / "score.mid"
    midi_path.write_bytes(midi_data)
    svg_data = plot_stage(csv_path.read_bytes(), report_path.read_bytes(), str(csv_path))
    svg_path = out / "plot.svg"
    svg_path.write_bytes(svg_data)
    return {
        "curves.csv": csv_path,
        "analysis.json": report_path,
        "score.mid": midi_path,
        "plot.svg": svg_path,
    }
