"""Resampling, smoothing and roughness for brightness curves."""

from __future__ import annotations

import math

import numpy as np

from .photometry import BrightnessCurve

ROUGHNESS_SCALE = 0.05


class NonPositiveRate(ValueError):
    pass


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def resample(curve: BrightnessCurve, rate: float) -> BrightnessCurve:
    """Linearly resample onto a grid at ``rate`` spanning the same interval.

    Resampling to the curve's own rate reproduces its values exactly.
    """
    if rate <= 0:
        raise NonPositiveRate("resample rate must be positive")
    y = curve.values
    n = len(y)
    if n == 1:
        return BrightnessCurve(curve.channel, rate, curve.t0, y.copy())
    # count of output samples on [0, (n-1)/rate_in]; the epsilon keeps
    # rational rate ratios from losing the endpoint to float rounding
    m = int(math.floor((n - 1) * rate / curve.sample_rate + 1e-9)) + 1
    pos = np.arange(m, dtype=np.float64) * (curve.sample_rate / rate)
    pos = np.clip(pos, 0.0, float(n - 1))
    base = np.minimum(pos.astype(np.int64), n - 2)
    frac = pos - base
    out = y[base] * (1.0 - frac) + y[base + 1] * frac
    np.clip(out, min(0.0, y.min()), max(1.0, y.max()), out=out)
    return BrightnessCurve(curve.channel, rate, curve.t0, out)


def smooth_values(values: np.ndarray, rate: float, window_s: float) -> np.ndarray:
    """Centered moving average; the window shrinks symmetrically at the edges."""
    y = np.asarray(values, dtype=np.float64)
    n = len(y)
    w = max(1, _round_half_up(window_s * rate))
    if w % 2 == 0:
        w += 1
    if w == 1 or n == 0:
        return y.copy()
    if np.ptp(y) == 0.0:
        # averaging invariance must hold exactly; the running sum below
        # would round a constant by an ulp
        return y.copy()
    half = w // 2
    csum = np.concatenate(([0.0], np.cumsum(y)))
    idx = np.arange(n)
    reach = np.minimum(half, np.minimum(idx, n - 1 - idx))
    lo = idx - reach
    hi = idx + reach + 1
    return (csum[hi] - csum[lo]) / (hi - lo)


def smooth(curve: BrightnessCurve, window_s: float) -> BrightnessCurve:
    return BrightnessCurve(
        curve.channel, curve.sample_rate, curve.t0,
        smooth_values(curve.values, curve.sample_rate, window_s),
    )


def residual_roughness(values: np.ndarray, smoothed: np.ndarray) -> float:
    """RMS of the residual against its smooth reference, saturating at 1."""
    resid = np.asarray(values, dtype=np.float64) - np.asarray(smoothed, dtype=np.float64)
    rms = float(np.sqrt(np.mean(resid * resid)))
    return min(1.0, rms / ROUGHNESS_SCALE)


def roughness(curve: BrightnessCurve, window_s: float, value_range: float = 1.0) -> float:
    """High-frequency content of the curve relative to its moving average.

    ``value_range`` is the caller's smoothed value range (floored at 0.05);
    the saturation scale itself is fixed, so the argument only gets validated.
    """
    if value_range <= 0:
        raise ValueError("value_range must be positive")
    smoothed = smooth_values(curve.values, curve.sample_rate, window_s)
    return residual_roughness(curve.values, smoothed)
