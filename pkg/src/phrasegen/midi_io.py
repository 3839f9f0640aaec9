"""Standard MIDI File parsing and serialization.

Reads SMF format 0 and 1 into a quantized note model on a fixed
sixteenth-note grid (4 steps per quarter, 16 per measure, 4/4 assumed) and
writes generated phrases back out as format-1 files. The subset handled is
note-on/off (including running status and note-on-velocity-0 offs), the
first Set-Tempo meta event and End-of-Track; everything else is skipped
structurally. Parsing never crashes on arbitrary bytes: it returns a Piece
or raises a structured error.

Trio part assignment: channel 10 is drums (General MIDI convention); of the
remaining (track, channel) groups the one with the lowest mean pitch is the
bass, everything else is melody.
"""

from __future__ import annotations

import hashlib
import math
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import EmptyPhrase, EmptyPiece, MalformedFile, UnsupportedFormat

STEPS_PER_QUARTER = 4
STEPS_PER_MEASURE = 16
WRITE_TPQ = 480
DEFAULT_TEMPO_BPM = 120.0
DRUM_CHANNEL = 9  # 0-indexed; channel 10 in 1-indexed MIDI parlance


class Part(str, Enum):
    MELODY = "melody"
    BASS = "bass"
    DRUMS = "drums"


PART_ORDER = {Part.MELODY: 0, Part.BASS: 1, Part.DRUMS: 2}
PART_CHANNEL = {Part.MELODY: 0, Part.BASS: 1, Part.DRUMS: DRUM_CHANNEL}


@dataclass(frozen=True)
class NoteEvent:
    """One quantized note. onset/duration are in grid steps (sixteenths)."""

    pitch: int
    onset: int
    duration: int
    velocity: int
    part: Part

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch out of range: {self.pitch}")
        if self.onset < 0:
            raise ValueError(f"negative onset: {self.onset}")
        if self.duration < 1:
            raise ValueError(f"duration < 1: {self.duration}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity out of range: {self.velocity}")

    def sort_key(self):
        return (self.onset, self.pitch, PART_ORDER[self.part])


@dataclass(frozen=True)
class GridSpec:
    ticks_per_quarter: int
    steps_per_quarter: int = STEPS_PER_QUARTER
    steps_per_measure: int = STEPS_PER_MEASURE

    def __post_init__(self):
        if self.ticks_per_quarter <= 0:
            raise ValueError("ticks_per_quarter must be positive")


@dataclass
class Piece:
    id: str
    title: str
    notes: list[NoteEvent]
    tempo_bpm: float
    length_measures: int
    source_bytes_hash: str


def quantize(raw_tick: int, tpq: int) -> int:
    """Map an absolute tick to the nearest sixteenth step, ties rounding up.

    Integer arithmetic only: round-half-up of (raw_tick * 4 / tpq).
    """
    if tpq <= 0:
        raise ValueError("tpq must be positive")
    if raw_tick < 0:
        raise ValueError("raw_tick must be >= 0")
    num = raw_tick * STEPS_PER_QUARTER
    return (2 * num + tpq) // (2 * tpq)


def build_piece(notes: Iterable[NoteEvent], piece_id: str = "", title: str = "",
                tempo_bpm: float = DEFAULT_TEMPO_BPM,
                source_bytes_hash: str = "") -> Piece:
    """Assemble a Piece, enforcing note ordering and the measure count rule."""
    ordered = sorted(notes, key=NoteEvent.sort_key)
    if ordered:
        last = max(n.onset + n.duration for n in ordered)
        length = max(1, math.ceil(last / STEPS_PER_MEASURE))
    else:
        length = 1
    return Piece(
        id=piece_id or uuid.uuid4().hex[:12],
        title=title,
        notes=ordered,
        tempo_bpm=tempo_bpm,
        length_measures=length,
        source_bytes_hash=source_bytes_hash,
    )


# --- parsing ---------------------------------------------------------------

@dataclass
class _RawNote:
    pitch: int
    onset_tick: int
    duration_ticks: int
    velocity: int


class _Reader:
    """Cursor over the file bytes; every read is bounds-checked."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if self.remaining() < n:
            raise MalformedFile("truncated file", wanted=n, at=self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def peek(self) -> int:
        if self.remaining() < 1:
            raise MalformedFile("truncated event", at=self.pos)
        return self.data[self.pos]

    def u16(self) -> int:
        b = self.take(2)
        return (b[0] << 8) | b[1]

    def u32(self) -> int:
        b = self.take(4)
        return (b[0] << 24) | (b[1] << 16) | (b[2] << 8) | b[3]

    def vlq(self) -> int:
        """Variable-length quantity; at most 4 bytes per the SMF spec."""
        value = 0
        for i in range(4):
            b = self.u8()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MalformedFile("bad variable-length quantity", at=self.pos)


def _parse_track(chunk: bytes, collect: "_TrackCollector") -> None:
    r = _Reader(chunk)
    running_status = 0
    t = 0
    while r.remaining() > 0:
        t += r.vlq()
        status = r.peek()
        if status == 0xFF:
            r.u8()
            meta_type = r.u8()
            length = r.vlq()
            payload = r.take(length)
            if meta_type == 0x2F:
                collect.track_ended(t)
                return  # trailing bytes after End-of-Track are ignored
            collect.meta(meta_type, payload, t)
            # meta events clear running status
            running_status = 0
        elif status in (0xF0, 0xF7):
            r.u8()
            length = r.vlq()
            r.take(length)
            running_status = 0
        elif status >= 0xF8:
            # realtime bytes are legal on the wire but not in SMF track data
            raise MalformedFile("unexpected system byte in track", status=status)
        else:
            if status & 0x80:
                r.u8()
                running_status = status
            elif running_status:
                status = running_status
            else:
                raise MalformedFile("data byte with no running status", at=r.pos)
            code = status & 0xF0
            channel = status & 0x0F
            if code in (0x80, 0x90, 0xA0, 0xB0, 0xE0):
                d1, d2 = r.u8(), r.u8()
            elif code in (0xC0, 0xD0):
                d1, d2 = r.u8(), 0
            else:  # 0xF0 range already handled
                raise MalformedFile("bad status byte", status=status)
            if d1 & 0x80 or d2 & 0x80:
                raise MalformedFile("data byte with high bit set", at=r.pos)
            if code == 0x90 and d2 > 0:
                collect.note_on(channel, d1, d2, t)
            elif code == 0x80 or (code == 0x90 and d2 == 0):
                collect.note_off(channel, d1, t)
    # chunk ended without an End-of-Track meta: tolerated


class _TrackCollector:
    """Pairs note-on/off events FIFO per (channel, pitch) within one track."""

    def __init__(self, track_index: int, parent: "_FileCollector"):
        self.track_index = track_index
        self.parent = parent
        self.open: dict[tuple[int, int], list[tuple[int, int]]] = {}
        self.end_tick = 0

    def note_on(self, channel: int, pitch: int, velocity: int, tick: int):
        self.open.setdefault((channel, pitch), []).append((tick, velocity))
        self.end_tick = max(self.end_tick, tick)
        self.parent.saw_note_on = True

    def note_off(self, channel: int, pitch: int, tick: int):
        queue = self.open.get((channel, pitch))
        if not queue:
            return  # stray note-off; ignore
        onset, velocity = queue.pop(0)
        self.end_tick = max(self.end_tick, tick)
        self._emit(channel, pitch, onset, max(0, tick - onset), velocity)

    def meta(self, meta_type: int, payload: bytes, tick: int):
        if meta_type == 0x51 and len(payload) == 3 and self.parent.tempo_bpm is None:
            usec = (payload[0] << 16) | (payload[1] << 8) | payload[2]
            if usec > 0:
                self.parent.tempo_bpm = 60_000_000.0 / usec
        elif meta_type == 0x03 and self.parent.track_name is None:
            self.parent.track_name = payload.decode("latin-1", errors="replace")

    def track_ended(self, tick: int):
        self.end_tick = max(self.end_tick, tick)

    def close_dangling(self):
        # notes never turned off end at the last event tick seen
        for (channel, pitch), queue in sorted(self.open.items()):
            for onset, velocity in queue:
                self._emit(channel, pitch, onset, max(0, self.end_tick - onset), velocity)
        self.open.clear()

    def _emit(self, channel: int, pitch: int, onset: int, duration: int, velocity: int):
        key = (self.track_index, channel)
        group = self.parent.groups.get(key)
        if group is None:
            group = self.parent.groups[key] = []
            self.parent.group_order.append(key)
        group.append(_RawNote(pitch, onset, duration, velocity))


class _FileCollector:
    def __init__(self):
        self.groups: dict[tuple[int, int], list[_RawNote]] = {}
        self.group_order: list[tuple[int, int]] = []
        self.tempo_bpm: float | None = None
        self.track_name: str | None = None
        self.saw_note_on = False


def assign_parts(groups: Sequence[tuple[int, Sequence[_RawNote]]]) -> list[Part]:
    """Part per note group: drums by channel, lowest mean pitch is bass.

    Groups on channel 9 (0-indexed) are drums. Of the rest, the group with
    the lowest mean pitch is the bass; every other group is melody. Mean
    ties keep the earlier group as bass.
    """
    parts: list[Part | None] = [None] * len(groups)
    melodic: list[tuple[float, int]] = []
    for i, (channel, notes) in enumerate(groups):
        if channel == DRUM_CHANNEL:
            parts[i] = Part.DRUMS
        elif notes:
            mean = sum(n.pitch for n in notes) / len(notes)
            melodic.append((mean, i))
        else:
            parts[i] = Part.MELODY
    if melodic:
        _, bass_index = min(melodic, key=lambda mi: (mi[0], mi[1]))
        for _, i in melodic:
            parts[i] = Part.BASS if i == bass_index else Part.MELODY
    return [p if p is not None else Part.MELODY for p in parts]


def parse_smf(data: bytes, title: str = "", piece_id: str = "") -> Piece:
    """Parse SMF format 0/1 bytes into a quantized, part-assigned Piece."""
    r = _Reader(data)
    if r.take(4) != b"MThd":
        raise MalformedFile("missing MThd header")
    header_len = r.u32()
    if header_len < 6:
        raise MalformedFile("short header chunk", length=header_len)
    smf_format = r.u16()
    ntrks = r.u16()
    division = r.u16()
    r.take(header_len - 6)
    if smf_format == 2:
        raise UnsupportedFormat("SMF format 2 is not supported")
    if smf_format not in (0, 1):
        raise MalformedFile("unknown SMF format", format=smf_format)
    if division & 0x8000:
        raise UnsupportedFormat("SMPTE time division is not supported")
    if division == 0:
        raise MalformedFile("zero time division")
    if ntrks < 1:
        raise MalformedFile("no tracks declared")

    collector = _FileCollector()
    tracks_read = 0
    while tracks_read < ntrks:
        if r.remaining() < 8:
            raise MalformedFile("truncated track list", read=tracks_read, declared=ntrks)
        chunk_type = r.take(4)
        chunk_len = r.u32()
        chunk = r.take(chunk_len)
        if chunk_type != b"MTrk":
            continue  # alien chunks are skipped per the SMF spec
        track = _TrackCollector(tracks_read, collector)
        _parse_track(chunk, track)
        track.close_dangling()
        tracks_read += 1

    if not collector.saw_note_on:
        raise EmptyPiece("no note-on events in file")

    ordered_groups = [(ch, collector.groups[(trk, ch)]) for trk, ch in collector.group_order]
    parts = assign_parts(ordered_groups)

    notes: list[NoteEvent] = []
    for (channel, raw_notes), part in zip(ordered_groups, parts):
        for raw in raw_notes:
            onset = quantize(raw.onset_tick, division)
            duration = max(1, quantize(raw.duration_ticks, division))
            velocity = min(127, max(1, raw.velocity))
            notes.append(NoteEvent(raw.pitch, onset, duration, velocity, part))

    return build_piece(
        notes,
        piece_id=piece_id or hashlib.sha256(data).hexdigest()[:12],
        title=title or collector.track_name or "untitled",
        tempo_bpm=collector.tempo_bpm if collector.tempo_bpm is not None else DEFAULT_TEMPO_BPM,
        source_bytes_hash=hashlib.sha256(data).hexdigest(),
    )


# --- serialization ----------------------------------------------------------

def _vlq_bytes(value: int) -> bytes:
    if value < 0:
        raise ValueError("negative delta time")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def _track_chunk(events: list[tuple[int, bytes]]) -> bytes:
    """events: (absolute_tick, message bytes), already in emit order."""
    body = bytearray()
    prev = 0
    for tick, message in events:
        body += _vlq_bytes(tick - prev)
        body += message
        prev = tick
    body += _vlq_bytes(0) + b"\xff\x2f\x00"
    return b"MTrk" + len(body).to_bytes(4, "big") + bytes(body)


def write_smf(notes: Iterable[NoteEvent], tempo_bpm: float = DEFAULT_TEMPO_BPM) -> bytes:
    """Serialize notes to SMF format 1: a tempo track plus one track per part.

    Melody goes to channel 1, bass to 2, drums to 10 (1-indexed). Re-parsing
    the output reproduces the identical note multiset.
    """
    notes = sorted(notes, key=NoteEvent.sort_key)
    if not notes:
        raise EmptyPhrase("phrase has no notes")
    if tempo_bpm <= 0:
        raise ValueError("tempo must be positive")

    ticks_per_step = WRITE_TPQ // STEPS_PER_QUARTER
    usec_per_quarter = round(60_000_000 / tempo_bpm)
    tempo_track = _track_chunk([(0, b"\xff\x51\x03" + usec_per_quarter.to_bytes(3, "big"))])

    part_tracks: list[bytes] = []
    for part in (Part.MELODY, Part.BASS, Part.DRUMS):
        part_notes = [n for n in notes if n.part is part]
        if not part_notes:
            continue
        channel = PART_CHANNEL[part]
        events: list[tuple[int, int, bytes]] = []  # (tick, off_first_rank, msg)
        for n in part_notes:
            on_tick = n.onset * ticks_per_step
            off_tick = (n.onset + n.duration) * ticks_per_step
            events.append((on_tick, 1, bytes((0x90 | channel, n.pitch, n.velocity))))
            events.append((off_tick, 0, bytes((0x80 | channel, n.pitch, 0))))
        events.sort(key=lambda e: (e[0], e[1], e[2]))
        part_tracks.append(_track_chunk([(t, m) for t, _, m in events]))

    header = b"MThd" + (6).to_bytes(4, "big") + (1).to_bytes(2, "big") \
        + (1 + len(part_tracks)).to_bytes(2, "big") + WRITE_TPQ.to_bytes(2, "big")
    return header + tempo_track + b"".join(part_tracks)
