"""Standard MIDI File output (format 1) and a reader for round-trip checks.

The writer never uses running status and always emits explicit note-off
events, so the byte stream is a pure function of the score.
"""

from __future__ import annotations

import math
import struct

from .composition import Score

MAX_VLQ = 0x0FFFFFFF

# event ordering classes at equal ticks: releases, controls, attacks
_CLASS_OFF = 0
_CLASS_CONTROL = 1
_CLASS_ON = 2


class ValueTooLarge(ValueError):
    pass


class MidiFormatError(ValueError):
    pass


def encode_vlq(value: int) -> bytes:
    """Variable-length quantity: big-endian 7-bit groups, minimal length."""
    if value < 0 or value > MAX_VLQ:
        raise ValueTooLarge("value %r outside VLQ range" % value)
    groups = [value & 0x7F]
    value >>= 7
    while value:
        groups.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(groups))


def ticks(t_s: float, tempo_bpm: float, ppq: int) -> int:
    """Seconds to MIDI ticks, rounding half up."""
    return int(math.floor(t_s * tempo_bpm / 60.0 * ppq + 0.5))


def _track_chunk(payload: bytes) -> bytes:
    return b"MTrk" + struct.pack(">I", len(payload)) + payload


def write_smf(score: Score) -> bytes:
    ppq = score.ppq
    tempo_us = int(math.floor(60_000_000.0 / score.tempo_bpm + 0.5))
    header = b"MThd" + struct.pack(">IHHH", 6, 1, 2, ppq)

    tempo_track = (
        b"\x00\xff\x51\x03" + tempo_us.to_bytes(3, "big") + b"\x00\xff\x2f\x00"
    )

    events: list[tuple[int, int, int, bytes]] = []
    for note in score.notes:
        on = ticks(note.onset_s, score.tempo_bpm, ppq)
        off = ticks(note.onset_s + note.duration_s, score.tempo_bpm, ppq)
        status_on = 0x90 | (note.channel & 0x0F)
        status_off = 0x80 | (note.channel & 0x0F)
        events.append((on, _CLASS_ON, note.pitch, bytes([status_on, note.pitch, note.velocity])))
        events.append((off, _CLASS_OFF, note.pitch, bytes([status_off, note.pitch, 0])))
    for control in score.controls:
        tick = ticks(control.time_s, score.tempo_bpm, ppq)
        status = 0xB0 | (control.channel & 0x0F)
        events.append((tick, _CLASS_CONTROL, control.controller,
                       bytes([status, control.controller, control.value])))
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    parts = []
    cursor = 0
    for tick, _, _, payload in events:
        parts.append(encode_vlq(tick - cursor))
        parts.append(payload)
        cursor = tick
    parts.append(b"\x00\xff\x2f\x00")
    note_track = b"".join(parts)

    return header + _track_chunk(tempo_track) + _track_chunk(note_track)


def read_smf(data: bytes) -> dict:
    """Parse what :func:`write_smf` emits; anything else raises.

    Returns the division plus per-track lists of ``(tick, event)`` tuples
    where events are ("tempo", us), ("end_of_track",), ("note_on", ch,
    pitch, vel), ("note_off", ch, pitch, vel) or ("control", ch, num, val).
    """
    if data[:4] != b"MThd":
        raise MidiFormatError("missing MThd chunk")
    length, fmt, ntrks, division = struct.unpack(">IHHH", data[4:14])
    if length != 6:
        raise MidiFormatError("unexpected MThd length %d" % length)
    if fmt != 1:
        raise MidiFormatError("unsupported format %d" % fmt)
    pos = 14
    tracks = []
    for _ in range(ntrks):
        if data[pos:pos + 4] != b"MTrk":
            raise MidiFormatError("missing MTrk chunk at byte %d" % pos)
        (size,) = struct.unpack(">I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MidiFormatError("truncated track chunk")
        tracks.append(_read_track(body))
        pos += 8 + size
    if pos != len(data):
        raise MidiFormatError("%d trailing bytes" % (len(data) - pos))
    return {"format": fmt, "division": division, "tracks": tracks}


def _read_vlq(body: bytes, pos: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= len(body):
            raise MidiFormatError("truncated variable-length quantity")
        byte = body[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise MidiFormatError("variable-length quantity longer than 4 bytes")


def _read_track(body: bytes) -> list[tuple[int, tuple]]:
    events: list[tuple[int, tuple]] = []
    tick = 0
    pos = 0
    while pos < len(body):
        delta, pos = _read_vlq(body, pos)
        tick += delta
        if pos >= len(body):
            raise MidiFormatError("truncated event")
        status = body[pos]
        pos += 1
        if status == 0xFF:
            meta = body[pos]
            size, pos2 = _read_vlq(body, pos + 1)
            payload = body[pos2:pos2 + size]
            pos = pos2 + size
            if meta == 0x51 and size == 3:
                events.append((tick, ("tempo", int.from_bytes(payload, "big"))))
            elif meta == 0x2F and size == 0:
                events.append((tick, ("end_of_track",)))
                if pos != len(body):
                    raise MidiFormatError("data after end-of-track")
                return events
            else:
                raise MidiFormatError("unsupported meta event 0x%02X" % meta)
        elif 0x80 <= status <= 0xBF:
            if pos + 2 > len(body):
                raise MidiFormatError("truncated channel event")
            d1, d2 = body[pos], body[pos + 1]
            pos += 2
            channel = status & 0x0F
            kind = status & 0xF0
            if kind == 0x90:
                events.append((tick, ("note_on", channel, d1, d2)))
            elif kind == 0x80:
                events.append((tick, ("note_off", channel, d1, d2)))
            else:
                events.append((tick, ("control", channel, d1, d2)))
        else:
            # running status in particular lands here on purpose
            raise MidiFormatError("unsupported status byte 0x%02X" % status)
    raise MidiFormatError("track missing end-of-track meta")
