"""Resampling, smoothing, and roughness measurement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lumascore.curveprep import (
    NonPositiveRate,
    residual_roughness,
    resample,
    roughness,
    smooth,
    smooth_values,
)

from _synth import curve, unit_noise


def interp_oracle(values, rate_in, t):
    """Direct evaluation of the piecewise-linear function through the samples."""
    x = t * rate_in
    if x <= 0:
        return values[0]
    if x >= len(values) - 1:
        return values[-1]
    i = int(math.floor(x))
    frac = x - i
    return values[i] * (1.0 - frac) + values[i + 1] * frac


class TestResample:
    def test_same_rate_is_identity(self):
        vals = [0.1, 0.7, 0.3, 0.9, 0.2]
        out = resample(curve(vals, rate=24.0), 24.0)
        assert list(out.values) == vals
        assert out.sample_rate == 24.0

    def test_two_samples_doubled_rate(self):
        out = resample(curve([0.0, 1.0], rate=1.0), 2.0)
        assert list(out.values) == [0.0, 0.5, 1.0]

    def test_ramp_24_to_50_matches_interpolation_oracle(self):
        vals = [u for u in unit_noise(99, 48)]
        src = curve(vals, rate=24.0)
        out = resample(src, 50.0)
        for k, v in enumerate(out.values):
            expected = interp_oracle(vals, 24.0, k / 50.0)
            assert abs(v - expected) < 1e-12

    def test_output_spans_source_interval(self):
        out = resample(curve([0.0] * 48, rate=24.0), 50.0)
        # (48-1)/24 s of signal → floor(47/24*50)+1 = 98 samples
        assert len(out.values) == 98

    def test_values_stay_in_unit_interval(self):
        vals = list(unit_noise(4, 30))
        out = resample(curve(vals, rate=24.0), 50.0)
        assert np.all(out.values >= 0.0)
        assert np.all(out.values <= 1.0)

    def test_single_sample_curve(self):
        out = resample(curve([0.4], rate=24.0), 50.0)
        assert list(out.values) == [0.4]
        assert out.sample_rate == 50.0

    def test_nonpositive_rate_rejected(self):
        with pytest.raises(NonPositiveRate):
            resample(curve([0.1, 0.2]), 0.0)

    @given(
        st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=2, max_size=40
        ),
        st.sampled_from([12.0, 24.0, 25.0, 30.0, 50.0]),
    )
    @settings(max_examples=60, deadline=None)
    def test_resample_at_same_rate_is_idempotent(self, vals, rate):
        once = resample(curve(vals, rate=rate), rate)
        twice = resample(once, rate)
        assert once.values.tobytes() == twice.values.tobytes()
        assert list(once.values) == vals


class TestSmooth:
    def test_window_zero_is_identity(self):
        vals = [0.3, 0.9, 0.1]
        out = smooth(curve(vals), 0.0)
        assert list(out.values) == vals

    def test_constant_curve_unchanged(self):
        out = smooth(curve([0.6] * 10), 0.25)
        assert list(out.values) == [0.6] * 10

    def test_impulse_three_sample_window(self):
        # w = 3 at 1 Hz with a 3 s window
        out = smooth(curve([0.0, 0.0, 1.0, 0.0, 0.0], rate=1.0), 3.0)
        expected = [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]
        assert list(out.values) == pytest.approx(expected, abs=1e-15)

    def test_even_window_forced_odd(self):
        # 4 samples would be even; the window must cover 5 samples instead
        out = smooth_values(
            np.array([0.0, 0.0, 1.0, 0.0, 0.0]), 1.0, 4.0
        )
        assert out[2] == pytest.approx(0.2, abs=1e-15)

    def test_edges_shrink_symmetrically(self):
        vals = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
        out = smooth_values(vals, 1.0, 5.0)
        # at index 1 the symmetric reach is 1 sample either side
        assert out[0] == 1.0
        assert out[1] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert out[2] == pytest.approx(0.4, abs=1e-15)

    @given(
        st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=3, max_size=60),
        st.integers(1, 4),
    )
    @settings(max_examples=60, deadline=None)
    def test_mean_preserved_up_to_edge_effects(self, vals, half):
        n = len(vals)
        w = 2 * half + 1
        out = smooth_values(np.array(vals), 1.0, float(w))
        tolerance = (w / n) + 1e-9
        assert abs(float(out.mean()) - float(np.mean(vals))) <= tolerance


class TestRoughness:
    def test_constant_curve_is_smooth(self):
        assert roughness(curve([0.5] * 100), 0.25) == 0.0

    def test_clean_ramp_is_nearly_smooth(self):
        vals = np.linspace(0.0, 1.0, 250)
        assert roughness(curve(list(vals)), 0.25) < 0.1

    def test_noisy_ramp_is_granular(self):
        ramp = np.linspace(0.2, 0.8, 500)
        noise = (np.array(unit_noise(8, 500)) - 0.5) * 0.2  # amplitude ±0.1
        vals = np.clip(ramp + noise, 0.0, 1.0)
        assert roughness(curve(list(vals)), 0.25) >= 0.9

    def test_matches_residual_rms_oracle(self):
        vals = np.array(unit_noise(12, 200))
        smoothed = smooth_values(vals, 50.0, 0.25)
        resid = vals - smoothed
        rms = math.sqrt(math.fsum(r * r for r in resid) / len(resid))
        expected = min(1.0, rms / 0.05)
        assert roughness(curve(list(vals)), 0.25) == pytest.approx(
            expected, abs=1e-12
        )

    def test_saturates_at_one(self):
        vals = [0.0, 1.0] * 100
        assert roughness(curve(vals), 0.25) == 1.0

    def test_invariant_under_constant_offset(self):
        base = np.array(unit_noise(3, 150)) * 0.4
        lifted = base + 0.3
        r0 = roughness(curve(list(base)), 0.25)
        r1 = roughness(curve(list(lifted)), 0.25)
        assert r0 == pytest.approx(r1, abs=1e-9)

    def test_nonpositive_range_rejected(self):
        with pytest.raises(ValueError):
            roughness(curve([0.1, 0.2, 0.3]), 0.25, value_range=0.0)

    def test_residual_roughness_on_slices(self):
        vals = np.array(unit_noise(21, 300))
        smoothed = smooth_values(vals, 50.0, 0.25)
        whole = residual_roughness(vals, smoothed)
        assert 0.0 <= whole <= 1.0
        part = residual_roughness(vals[50:100], smoothed[50:100])
        assert 0.0 <= part <= 1.0
