"""Rule-based rendering of classified gestures into a note list.

Every archetype maps to one small playing pattern.  The only stochastic
pattern is the granular texture; it draws from a SplitMix64 generator so
scores are reproducible bit for bit from the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .gestures import Archetype, ExpFit, Gesture, StaircaseFit
from .photometry import BrightnessCurve

MASK64 = (1 << 64) - 1
DEFAULT_LAMBDA_MAX = 40.0
DEFAULT_GRAIN_S = 0.060
ARPEGGIO_RHO = 0.8
TEXTURE_GRID_S = 0.01


class NotADecay(ValueError):
    pass


class SplitMix64:
    """SplitMix64 sequence; unit reals are draws divided by 2**64."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def next_unit(self) -> float:
        return self.next_u64() / 2.0 ** 64


@dataclass(frozen=True)
class HarmonyConfig:
    scale: tuple[int, ...] = (0, 2, 3, 5, 7, 8, 10)
    root_pc: int = 0
    register: tuple[int, int] = (36, 84)
    tempo_bpm: float = 60.0
    ppq: int = 480
    channel: int = 0


@dataclass(frozen=True)
class MusicalEvent:
    onset_s: float
    duration_s: float
    pitch: int
    velocity: int
    channel: int


@dataclass(frozen=True)
class ControlEvent:
    time_s: float
    controller: int
    value: int
    channel: int = 0


@dataclass
class Score:
    notes: list[MusicalEvent] = field(default_factory=list)
    controls: list[ControlEvent] = field(default_factory=list)
    tempo_bpm: float = 60.0
    ppq: int = 480
    duration_s: float = 0.0


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def register_center(mean_brightness: float, register: tuple[int, int]) -> int:
    """Map brightness in [0, 1] onto a pitch inside the register."""
    low, high = register
    return low + _round_half_up(mean_brightness * (high - low))


def velocity_at(value: float) -> int:
    return max(1, min(127, _round_half_up(20.0 + 100.0 * value)))


def _voice_near(pitch_class: int, center: int) -> int:
    """Octave placement of a pitch class closest to center, ties downward."""
    up = center + (pitch_class - center) % 12
    down = up - 12
    if up - center < center - down:
        return up
    return down


def chord_for(motif_id: int, center: int, harmony: HarmonyConfig) -> list[int]:
    """Triad on the scale degree selected by the motif, voiced near center.

    The root goes to its closest octave; the third and fifth of the scale
    stack upward from it so the pitch-class content depends only on the
    motif and harmony, never on the register.
    """
    scale = harmony.scale
    size = len(scale)
    j = motif_id % size
    root_pc = (scale[j] + harmony.root_pc) % 12
    root = _voice_near(root_pc, center)
    notes = [root]
    for degree in (2, 4):
        interval = (scale[(j + degree) % size] - scale[j]) % 12
        note = root + interval
        while note in notes:
            note += 12
        notes.append(note)
    return sorted(notes)


def arpeggio_times(fit: ExpFit, duration_s: float, rho: float = ARPEGGIO_RHO) -> list[float]:
    """Onsets where the decay envelope loses another factor of rho.

    Times are relative to the fit's own origin and truncated to the given
    duration, at most 32 of them.
    """
    if fit.scale <= 0 or fit.degenerate:
        raise NotADecay("arpeggio onsets need a decaying exponential fit")
    spacing = fit.tau_s * math.log(1.0 / rho)
    times = []
    for k in range(1, 33):
        t = spacing * k
        if t >= duration_s:
            break
        times.append(t)
    return times


def _value_at(curve: BrightnessCurve, t: float) -> float:
    idx = _round_half_up((t - curve.t0) * curve.sample_rate)
    idx = max(0, min(len(curve.values) - 1, idx))
    return float(curve.values[idx])


def _note(onset: float, duration: float, pitch: int, velocity: int, channel: int) -> MusicalEvent:
    return MusicalEvent(onset, duration, max(0, min(127, pitch)), velocity, channel)


def _descending_pitches(chord: list[int], motif_id: int, harmony: HarmonyConfig, count: int) -> list[int]:
    """Chord tones top down, then scale degrees walking below the root.

    The walk restarts from the top when it would leave the playable range,
    which keeps long runs cycling instead of falling off the keyboard.
    """
    scale = harmony.scale
    size = len(scale)
    floor = max(0, harmony.register[0] - 12)
    out: list[int] = []
    while len(out) < count:
        out.extend(chord[::-1][: count - len(out)])
        idx = motif_id % size
        pitch = chord[0]
        while len(out) < count:
            step = (scale[idx % size] - scale[(idx - 1) % size]) % 12
            step = step or 12
            pitch -= step
            idx -= 1
            if pitch < floor:
                break
            out.append(pitch)
    return out[:count]


def render_gesture(
    gesture: Gesture,
    curve: BrightnessCurve,
    harmony: HarmonyConfig,
    rng: SplitMix64,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    grain_s: float = DEFAULT_GRAIN_S,
) -> list[MusicalEvent]:
    """Render one gesture; only the granular texture consumes the rng."""
    rate = curve.sample_rate
    seg = gesture.segment
    seg_start = seg.start_idx / rate
    seg_end = seg.end_idx / rate
    seg_dur = seg_end - seg_start
    center = register_center(gesture.mean_brightness, harmony.register)
    motif = gesture.motif_id or 0
    chord = chord_for(motif, center, harmony)
    channel = harmony.channel
    onset = seg_start
    if gesture.transient is not None:
        onset = seg_start + gesture.transient.onset_idx / rate
    body_start = seg_start
    if gesture.transient is not None:
        body_start = seg_start + (gesture.transient.onset_idx + 1) / rate
    arche = gesture.archetype
    events: list[MusicalEvent] = []

    if arche in (Archetype.CHORD_RESONANCE, Archetype.CHORD_HELD):
        vel = velocity_at(_value_at(curve, onset))
        for pitch in chord:
            events.append(_note(onset, seg_end - onset, pitch, vel, channel))
    elif arche is Archetype.CHORD_ARPEGGIO:
        vel = velocity_at(_value_at(curve, onset))
        chord_dur = min(1.0, 0.25 * seg_dur)
        for pitch in chord:
            events.append(_note(onset, chord_dur, pitch, vel, channel))
        fit = gesture.fit
        if isinstance(fit, ExpFit) and fit.scale > 0 and not fit.degenerate:
            times = arpeggio_times(fit, seg_end - body_start)
            spacing = fit.tau_s * math.log(1.0 / ARPEGGIO_RHO)
            pitches = _descending_pitches(chord, motif, harmony, len(times))
            for t, pitch in zip(times, pitches):
                at = body_start + t
                # 80% of the inter-onset gap, but a slowly fitted decay must
                # not ring past the one-second tail allowed after the segment
                dur = min(0.8 * spacing, seg_end + 1.0 - at)
                events.append(
                    _note(at, dur, pitch, velocity_at(_value_at(curve, at)), channel)
                )
    elif arche is Archetype.TREMOLO_SCRATCH:
        period = 0.120 - 0.085 * gesture.granularity
        k = 0
        # the train starts on the transient when one was detected, so the
        # first attack stays synchronized with the visual accent
        while (at := onset + k * period) < seg_end - 1e-9:
            events.append(
                _note(at, 0.6 * period, chord[0], velocity_at(_value_at(curve, at)), channel)
            )
            k += 1
    elif arche is Archetype.ARPEGGIO_DETACHED:
        fit = gesture.fit
        scale = harmony.scale
        size = len(scale)
        j = motif % size
        if isinstance(fit, StaircaseFit):
            onsets = (0.0,) + fit.step_times_s
            for k, (t, level) in enumerate(zip(onsets, fit.levels)):
                pc = (scale[(j + k) % size] + harmony.root_pc) % 12
                pitch = _voice_near(pc, register_center(min(1.0, max(0.0, level)), harmony.register))
                events.append(
                    _note(body_start + t, 0.2, pitch, velocity_at(level), channel)
                )
        else:
            # archetype forced onto a segment without staircase structure
            events.append(_note(body_start, 0.2, chord[0],
                                velocity_at(_value_at(curve, body_start)), channel))
    elif arche is Archetype.GRANULAR_TEXTURE:
        pcs = {(s + harmony.root_pc) % 12 for s in harmony.scale}
        candidates = [p for p in range(center - 12, center + 13)
                      if p % 12 in pcs and 0 <= p <= 127]
        k = 0
        while (at := seg_start + k * TEXTURE_GRID_S) < seg_end - 1e-9:
            draw = rng.next_unit()
            value = _value_at(curve, at)
            if draw < lambda_max * gesture.granularity * value * TEXTURE_GRID_S:
                pick = rng.next_unit()
                pitch = candidates[min(len(candidates) - 1, int(pick * len(candidates)))]
                events.append(_note(at, grain_s, pitch, velocity_at(value), channel))
            k += 1
    else:  # CrescendoHeld and DiminuendoHeld
        vel = velocity_at(_value_at(curve, onset))
        for pitch in chord:
            events.append(_note(onset, seg_end - onset, pitch, vel, channel))
    return events


def expression_track(curve: BrightnessCurve, rate: float = 20.0, channel: int = 0) -> list[ControlEvent]:
    """Controller 11 following the curve, duplicate values suppressed."""
    if rate <= 0:
        raise ValueError("expression rate must be positive")
    steps = int(math.floor(curve.duration * rate + 1e-9))
    events: list[ControlEvent] = []
    previous = -1
    for k in range(steps + 1):
        t = k / rate
        value = _round_half_up(_value_at(curve, t) * 127.0)
        value = max(0, min(127, value))
        if k == 0 or value != previous:
            events.append(ControlEvent(t, 11, value, channel))
            previous = value
    return events


def compose(
    gestures: list[Gesture],
    curve: BrightnessCurve,
    harmony: HarmonyConfig | None = None,
    seed: int = 0,
    lambda_max: float = DEFAULT_LAMBDA_MAX,
    grain_s: float = DEFAULT_GRAIN_S,
) -> Score:
    """Render all gestures against one rng stream and assemble the score."""
    if harmony is None:
        harmony = HarmonyConfig()
    rng = SplitMix64(seed)
    notes: list[MusicalEvent] = []
    for gesture in sorted(gestures, key=lambda g: g.segment.start_idx):
        notes.extend(
            render_gesture(gesture, curve, harmony, rng, lambda_max, grain_s)
        )
    notes.sort(key=lambda e: (e.onset_s, e.pitch))
    controls = expression_track(curve, channel=harmony.channel)
    return Score(notes, controls, harmony.tempo_bpm, harmony.ppq, curve.duration)
