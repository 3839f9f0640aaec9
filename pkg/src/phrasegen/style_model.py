"""Statistical style model trained from a corpus.

Feature families, all first-order so a train/generate loop stays in the
seconds-to-minutes range:

* per-part rhythm: one 16-bit onset mask per measure (bit = sixteenth step
  carries an onset) with a Markov chain over masks,
* melodic and bass pitch transition chains over the observed pitch range,
* a chord chain over 25 symbols (12 major + 12 minor triads + N) estimated
  per measure by template matching on a duration-weighted pitch-class
  histogram,
* per-part note-density statistics over non-empty measures,
* a per-metrical-step distribution of drum-hit pitch sets.

Counting rules: transitions are counted between consecutive measures (or
notes) within one piece and never across piece boundaries; initial
distributions count each piece's first observation. Pieces that do not
contain a part at all contribute nothing to that part's chains. Laplace
smoothing with a user-set alpha is applied over each vocabulary; a row
whose smoothed denominator is zero (alpha 0 and no observations from that
state) falls back to uniform so matrices stay row-stochastic.

Raw counts are kept alongside the smoothed matrices, both for exact-count
verification and because alpha-0 support queries need them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

import numpy as np

from .corpus import Corpus
from .errors import EmptyCorpus, EmptyPart, ParamOutOfRange, SingleNote
from .midi_io import Part, Piece, STEPS_PER_MEASURE

PITCH_CLASSES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]
CHORD_SYMBOLS = PITCH_CLASSES + [pc + "m" for pc in PITCH_CLASSES] + ["N"]
NO_CHORD = "N"

DEFAULT_ALPHA = 0.1
ALPHA_RANGE = (0.0, 10.0)


@dataclass
class MeasureNote:
    """A note clipped to its measure: step offset, clipped duration, pitch."""
    step: int
    duration: int
    pitch: int
    velocity: int


@dataclass
class Measure:
    index: int
    notes: dict[Part, list[MeasureNote]]

    def mask(self, part: Part) -> int:
        bits = 0
        for note in self.notes.get(part, []):
            bits |= 1 << note.step
        return bits

    def count(self, part: Part) -> int:
        return len(self.notes.get(part, []))


def segment_measures(piece: Piece) -> list[Measure]:
    """Split a piece into 16-step measures; bar-crossing notes are truncated
    at the bar line for feature extraction."""
    measures = [Measure(i, {p: [] for p in Part}) for i in range(piece.length_measures)]
    for note in piece.notes:
        index = note.onset // STEPS_PER_MEASURE
        step = note.onset % STEPS_PER_MEASURE
        clipped = min(note.duration, STEPS_PER_MEASURE - step)
        measures[index].notes[note.part].append(
            MeasureNote(step, clipped, note.pitch, note.velocity))
    return measures


def _smooth_rows(counts: np.ndarray, alpha: float) -> np.ndarray:
    """Row-wise Laplace smoothing; zero-denominator rows become uniform."""
    counts = counts.astype(float)
    size = counts.shape[-1]
    if counts.ndim == 1:
        denom = counts.sum() + alpha * size
        if denom == 0:
            return np.full(size, 1.0 / size)
        return (counts + alpha) / denom
    out = np.empty_like(counts)
    for i, row in enumerate(counts):
        denom = row.sum() + alpha * size
        out[i] = np.full(size, 1.0 / size) if denom == 0 else (row + alpha) / denom
    return out


@dataclass
class RhythmChain:
    part: Part
    vocabulary: list[int]              # sorted onset masks
    initial: np.ndarray                # (V,)
    transitions: np.ndarray            # (V, V), row-stochastic
    initial_counts: np.ndarray         # (V,) raw
    transition_counts: np.ndarray      # (V, V) raw
    smoothing_alpha: float

    def index(self, mask: int) -> int:
        return self.vocabulary.index(mask)


@dataclass
class PitchChain:
    part: Part
    low: int
    high: int
    initial: np.ndarray
    transitions: np.ndarray
    initial_counts: np.ndarray
    transition_counts: np.ndarray
    smoothing_alpha: float

    @property
    def pitches(self) -> list[int]:
        return list(range(self.low, self.high + 1))

    def index(self, pitch: int) -> int:
        return pitch - self.low


@dataclass
class ChordModel:
    initial: np.ndarray                # (25,)
    transitions: np.ndarray            # (25, 25)
    initial_counts: np.ndarray
    transition_counts: np.ndarray
    smoothing_alpha: float


@dataclass
class PartDensity:
    min_notes: float
    mean_notes: float
    max_notes: float


@dataclass
class DensityStats:
    parts: dict[Part, PartDensity]

    def for_part(self, part: Part) -> Optional[PartDensity]:
        return self.parts.get(part)


@dataclass
class DrumHitModel:
    # per step: observed onset pitch-set -> count; only steps with hits observe
    step_counts: list[dict[tuple[int, ...], int]]
    fallback: tuple[int, ...]          # most frequent set overall

    def distribution(self, step: int) -> list[tuple[tuple[int, ...], float]]:
        counts = self.step_counts[step % STEPS_PER_MEASURE]
        total = sum(counts.values())
        if total == 0:
            return []
        return [(pitches, c / total) for pitches, c in sorted(counts.items())]


@dataclass
class StyleModel:
    model_id: str
    corpus_id: str
    corpus_hash: str
    smoothing_alpha: float
    rhythm: dict[Part, RhythmChain]
    melody_pitch: Optional[PitchChain]
    bass_pitch: Optional[PitchChain]
    chords: ChordModel
    density: DensityStats
    drums: Optional[DrumHitModel]
    trained_at: str
    stale: Optional[bool] = field(default=None, compare=False)

    def trained_parts(self) -> list[Part]:
        """Parts this model can generate."""
        parts = []
        if Part.MELODY in self.rhythm and self.melody_pitch is not None:
            parts.append(Part.MELODY)
        if Part.BASS in self.rhythm and self.bass_pitch is not None:
            parts.append(Part.BASS)
        if Part.DRUMS in self.rhythm and self.drums is not None:
            parts.append(Part.DRUMS)
        return parts


# --- extraction -------------------------------------------------------------

def extract_rhythm_chain(piece_measures: list[list[Measure]], part: Part,
                         alpha: float) -> RhythmChain:
    sequences = []
    for measures in piece_measures:
        masks = [m.mask(part) for m in measures]
        if any(masks):
            sequences.append(masks)
    if not sequences:
        raise EmptyPart(f"no {part.value} onsets in corpus", part=part.value)

    vocabulary = sorted({mask for seq in sequences for mask in seq})
    idx = {mask: i for i, mask in enumerate(vocabulary)}
    size = len(vocabulary)
    initial_counts = np.zeros(size)
    transition_counts = np.zeros((size, size))
    for seq in sequences:
        initial_counts[idx[seq[0]]] += 1
        for a, b in zip(seq, seq[1:]):
            transition_counts[idx[a], idx[b]] += 1
    return RhythmChain(
        part=part,
        vocabulary=vocabulary,
        initial=_smooth_rows(initial_counts, alpha),
        transitions=_smooth_rows(transition_counts, alpha),
        initial_counts=initial_counts,
        transition_counts=transition_counts,
        smoothing_alpha=alpha,
    )


def _part_pitch_sequence(measures: list[Measure], part: Part) -> list[int]:
    flat = []
    for measure in measures:
        base = measure.index * STEPS_PER_MEASURE
        for note in measure.notes[part]:
            flat.append((base + note.step, note.pitch))
    flat.sort()
    return [pitch for _, pitch in flat]


def extract_pitch_chain(piece_measures: list[list[Measure]], part: Part,
                        alpha: float) -> PitchChain:
    if part not in (Part.MELODY, Part.BASS):
        raise ValueError("pitch chains cover melody and bass only")
    sequences = [seq for seq in (_part_pitch_sequence(m, part) for m in piece_measures)
                 if seq]
    if not sequences:
        raise EmptyPart(f"no {part.value} notes in corpus", part=part.value)
    total = sum(len(s) for s in sequences)
    if total < 2:
        raise SingleNote(f"need at least two {part.value} notes", part=part.value)

    low = min(min(s) for s in sequences)
    high = max(max(s) for s in sequences)
    size = high - low + 1
    initial_counts = np.zeros(size)
    transition_counts = np.zeros((size, size))
    for seq in sequences:
        initial_counts[seq[0] - low] += 1
        for a, b in zip(seq, seq[1:]):
            transition_counts[a - low, b - low] += 1
    return PitchChain(
        part=part,
        low=low,
        high=high,
        initial=_smooth_rows(initial_counts, alpha),
        transitions=_smooth_rows(transition_counts, alpha),
        initial_counts=initial_counts,
        transition_counts=transition_counts,
        smoothing_alpha=alpha,
    )


def estimate_chord(measure: Measure) -> str:
    """Triad template match on a duration-weighted pitch-class histogram of
    the measure's melody and bass notes. Ties go to the lowest root, major
    before minor; an empty histogram is N."""
    weights = np.zeros(12)
    for part in (Part.MELODY, Part.BASS):
        for note in measure.notes[part]:
            weights[note.pitch % 12] += note.duration
    if not weights.any():
        return NO_CHORD
    best_name, best_score = NO_CHORD, 0.0
    for root in range(12):
        for quality, intervals in (("", (0, 4, 7)), ("m", (0, 3, 7))):
            score = sum(weights[(root + iv) % 12] for iv in intervals)
            if score > best_score:
                best_score = score
                best_name = PITCH_CLASSES[root] + quality
    return best_name


def extract_chord_model(piece_measures: list[list[Measure]], alpha: float) -> ChordModel:
    index = {symbol: i for i, symbol in enumerate(CHORD_SYMBOLS)}
    size = len(CHORD_SYMBOLS)
    initial_counts = np.zeros(size)
    transition_counts = np.zeros((size, size))
    for measures in piece_measures:
        seq = [estimate_chord(m) for m in measures]
        if not seq:
            continue
        initial_counts[index[seq[0]]] += 1
        for a, b in zip(seq, seq[1:]):
            transition_counts[index[a], index[b]] += 1
    return ChordModel(
        initial=_smooth_rows(initial_counts, alpha),
        transitions=_smooth_rows(transition_counts, alpha),
        initial_counts=initial_counts,
        transition_counts=transition_counts,
        smoothing_alpha=alpha,
    )


def extract_density(piece_measures: list[list[Measure]]) -> DensityStats:
    parts = {}
    for part in Part:
        counts = [m.count(part) for measures in piece_measures for m in measures
                  if m.count(part) > 0]
        if counts:
            parts[part] = PartDensity(float(min(counts)),
                                      float(sum(counts) / len(counts)),
                                      float(max(counts)))
    return DensityStats(parts)


def extract_drum_hits(piece_measures: list[list[Measure]]) -> Optional[DrumHitModel]:
    step_counts: list[dict[tuple[int, ...], int]] = [dict() for _ in range(STEPS_PER_MEASURE)]
    for measures in piece_measures:
        for measure in measures:
            by_step: dict[int, set[int]] = {}
            for note in measure.notes[Part.DRUMS]:
                by_step.setdefault(note.step, set()).add(note.pitch)
            for step, pitches in by_step.items():
                key = tuple(sorted(pitches))
                step_counts[step][key] = step_counts[step].get(key, 0) + 1
    overall: dict[tuple[int, ...], int] = {}
    for counts in step_counts:
        for key, c in counts.items():
            overall[key] = overall.get(key, 0) + c
    if not overall:
        return None
    # mode; ties prefer the lexicographically smallest set for determinism
    fallback = min(overall, key=lambda k: (-overall[k], k))
    return DrumHitModel(step_counts=step_counts, fallback=fallback)


# --- training ---------------------------------------------------------------

def validate_training_params(params: dict | None) -> float:
    params = dict(params or {})
    alpha = params.pop("smoothing_alpha", DEFAULT_ALPHA)
    if params:
        raise ParamOutOfRange(f"unknown training parameter {next(iter(params))!r}")
    try:
        alpha = float(alpha)
    except (TypeError, ValueError):
        raise ParamOutOfRange("smoothing_alpha must be a number") from None
    if not ALPHA_RANGE[0] <= alpha <= ALPHA_RANGE[1]:
        raise ParamOutOfRange(
            f"smoothing_alpha {alpha} outside [{ALPHA_RANGE[0]}, {ALPHA_RANGE[1]}]")
    return alpha


def train(corpus: Corpus, params: dict | None = None,
          progress_cb: Optional[Callable[[float], None]] = None,
          trained_at: str | None = None) -> StyleModel:
    """Run every extractor over the corpus. Parts without usable data are
    omitted from the model rather than failing the whole run."""
    alpha = validate_training_params(params)
    if not corpus.pieces:
        raise EmptyCorpus(f"corpus {corpus.id!r} has no pieces", corpus_id=corpus.id)

    def report(fraction: float):
        if progress_cb:
            progress_cb(min(1.0, max(0.0, fraction)))

    pieces = [corpus.pieces[pid] for pid in sorted(corpus.pieces)]
    piece_measures = []
    for i, piece in enumerate(pieces):
        piece_measures.append(segment_measures(piece))
        report(0.3 * (i + 1) / len(pieces))

    rhythm: dict[Part, RhythmChain] = {}
    for part in Part:
        try:
            rhythm[part] = extract_rhythm_chain(piece_measures, part, alpha)
        except EmptyPart:
            pass
    report(0.5)

    melody_pitch = bass_pitch = None
    try:
        melody_pitch = extract_pitch_chain(piece_measures, Part.MELODY, alpha)
    except (EmptyPart, SingleNote):
        pass
    try:
        bass_pitch = extract_pitch_chain(piece_measures, Part.BASS, alpha)
    except (EmptyPart, SingleNote):
        pass
    report(0.7)

    chords = extract_chord_model(piece_measures, alpha)
    density = extract_density(piece_measures)
    drums = extract_drum_hits(piece_measures)
    report(0.9)

    corpus_hash = corpus.content_hash()
    fingerprint = hashlib.sha256(
        f"{corpus_hash}:alpha={alpha!r}".encode()).hexdigest()
    model = StyleModel(
        model_id="m" + fingerprint[:12],
        corpus_id=corpus.id,
        corpus_hash=corpus_hash,
        smoothing_alpha=alpha,
        rhythm=rhythm,
        melody_pitch=melody_pitch,
        bass_pitch=bass_pitch,
        chords=chords,
        density=density,
        drums=drums,
        trained_at=trained_at or datetime.now(timezone.utc).isoformat(timespec="microseconds"),
    )
    report(1.0)
    return model


# --- serialization ----------------------------------------------------------

def _chain_to_dict(chain: RhythmChain | PitchChain | ChordModel) -> dict:
    doc = {
        "initial": chain.initial.tolist(),
        "transitions": chain.transitions.tolist(),
        "initial_counts": chain.initial_counts.tolist(),
        "transition_counts": chain.transition_counts.tolist(),
    }
    if isinstance(chain, RhythmChain):
        doc["vocabulary"] = chain.vocabulary
    elif isinstance(chain, PitchChain):
        doc["low"], doc["high"] = chain.low, chain.high
    return doc


def model_to_dict(model: StyleModel) -> dict:
    return {
        "kind": "builtin",
        "model_name": "model1",
        "model_id": model.model_id,
        "corpus_id": model.corpus_id,
        "corpus_hash": model.corpus_hash,
        "smoothing_alpha": model.smoothing_alpha,
        "trained_at": model.trained_at,
        "rhythm": {part.value: _chain_to_dict(chain)
                   for part, chain in sorted(model.rhythm.items(), key=lambda kv: kv[0].value)},
        "melody_pitch": _chain_to_dict(model.melody_pitch) if model.melody_pitch else None,
        "bass_pitch": _chain_to_dict(model.bass_pitch) if model.bass_pitch else None,
        "chords": _chain_to_dict(model.chords),
        "density": {part.value: [d.min_notes, d.mean_notes, d.max_notes]
                    for part, d in sorted(model.density.parts.items(), key=lambda kv: kv[0].value)},
        "drums": {
            "steps": [sorted([list(k), c] for k, c in counts.items())
                      for counts in model.drums.step_counts],
            "fallback": list(model.drums.fallback),
        } if model.drums else None,
    }


def serialize_model(model: StyleModel) -> str:
    """Canonical JSON: sorted keys, repr-accurate floats (17 significant
    digits), so identical models serialize to identical bytes."""
    return json.dumps(model_to_dict(model), sort_keys=True, indent=1)


def _rhythm_from_dict(part: Part, doc: dict, alpha: float) -> RhythmChain:
    return RhythmChain(
        part=part,
        vocabulary=list(doc["vocabulary"]),
        initial=np.array(doc["initial"]),
        transitions=np.array(doc["transitions"]),
        initial_counts=np.array(doc["initial_counts"]),
        transition_counts=np.array(doc["transition_counts"]),
        smoothing_alpha=alpha,
    )


def _pitch_from_dict(part: Part, doc: dict, alpha: float) -> PitchChain:
    return PitchChain(
        part=part,
        low=doc["low"],
        high=doc["high"],
        initial=np.array(doc["initial"]),
        transitions=np.array(doc["transitions"]),
        initial_counts=np.array(doc["initial_counts"]),
        transition_counts=np.array(doc["transition_counts"]),
        smoothing_alpha=alpha,
    )


def model_from_dict(doc: dict) -> StyleModel:
    alpha = doc["smoothing_alpha"]
    drums = None
    if doc.get("drums"):
        steps = [
            {tuple(k): c for k, c in entries}
            for entries in doc["drums"]["steps"]
        ]
        drums = DrumHitModel(step_counts=steps, fallback=tuple(doc["drums"]["fallback"]))
    return StyleModel(
        model_id=doc["model_id"],
        corpus_id=doc["corpus_id"],
        corpus_hash=doc["corpus_hash"],
        smoothing_alpha=alpha,
        rhythm={Part(name): _rhythm_from_dict(Part(name), chain, alpha)
                for name, chain in doc["rhythm"].items()},
        melody_pitch=_pitch_from_dict(Part.MELODY, doc["melody_pitch"], alpha)
        if doc.get("melody_pitch") else None,
        bass_pitch=_pitch_from_dict(Part.BASS, doc["bass_pitch"], alpha)
        if doc.get("bass_pitch") else None,
        chords=ChordModel(
            initial=np.array(doc["chords"]["initial"]),
            transitions=np.array(doc["chords"]["transitions"]),
            initial_counts=np.array(doc["chords"]["initial_counts"]),
            transition_counts=np.array(doc["chords"]["transition_counts"]),
            smoothing_alpha=alpha,
        ),
        density=DensityStats({Part(name): PartDensity(*vals)
                              for name, vals in doc["density"].items()}),
        drums=drums,
        trained_at=doc["trained_at"],
    )
