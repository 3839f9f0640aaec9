"""Two-stage constrained phrase generation from a trained style model.

Rhythm first, then pitches. Each stage is a first-order beam search (or a
seeded sample) over the model's chains, steered by four user parameters:

* note_density d: maps affinely onto the corpus's observed per-measure
  note-count range; the rhythm objective penalizes each measure's onset
  count distance from that target.
* melodic_typicality t: melody/bass transition distribution is the convex
  mixture t * learned + (1 - t) * uniform over the observed pitch range.
* harmonic_following h: chord sampling uses h * learned + (1 - h) * uniform
  over the 25 chord symbols, for the initial distribution as well.
* num_measures m: phrase length.

Rhythm objective for a mask sequence: sum of log transition probability
(log initial for the first measure) minus density_weight times
|popcount(mask) - density target| per measure. Pitch objective: sum of
log mixed transition probability plus chord_bonus when the pitch class is
a tone of the measure's chord (no bonus under N).

The beam keeps the best hypothesis per last state before width pruning
(same-state recombination): lower-scoring hypotheses that end in the same
state can never overtake under a first-order objective, so with the width
at least the vocabulary size the search is exact. Ties prefer the
lexicographically smaller sequence. Randomness enters only as a seeded
jitter of jitter_eps * Uniform[0,1) per candidate, drawn from independent
per-stage substreams, so distinct seeds give distinct phrases while scores
dominate and editing one stage's inputs never scrambles another stage.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .errors import ParamOutOfRange, UntrainedPart
from .midi_io import NoteEvent, Part, STEPS_PER_MEASURE
from .style_model import (
    CHORD_SYMBOLS,
    NO_CHORD,
    PartDensity,
    PITCH_CLASSES,
    StyleModel,
)

GENERATED_VELOCITY = 96
MEASURES_RANGE = (1, 64)


@dataclass(frozen=True)
class GenParams:
    melodic_typicality: float = 0.5
    harmonic_following: float = 0.5
    num_measures: int = 4
    note_density: float = 0.5


@dataclass(frozen=True)
class PhraseRequest:
    model_id: str
    seed: int
    params: GenParams = GenParams()
    parts: tuple[Part, ...] = (Part.MELODY, Part.BASS, Part.DRUMS)


@dataclass
class Phrase:
    notes: list[NoteEvent]
    chords: list[str]
    request: PhraseRequest
    score: float
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class GenConfig:
    """Search constants; overridable through a generation-config document."""

    beam_width: int = 16
    density_weight: float = 1.0
    chord_bonus: float = 1.0
    jitter_eps: float = 1e-3

    @classmethod
    def from_dict(cls, doc: dict) -> "GenConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ParamOutOfRange(f"unknown generation-config key {sorted(unknown)[0]!r}")
        return replace(cls(), **doc)


DEFAULT_CONFIG = GenConfig()


def validate_request(request: PhraseRequest) -> None:
    p = request.params
    if not 0 <= request.seed < 2 ** 64:
        raise ParamOutOfRange(f"seed {request.seed} outside uint64 range")
    for name, value in (("melodic_typicality", p.melodic_typicality),
                        ("harmonic_following", p.harmonic_following),
                        ("note_density", p.note_density)):
        if not 0.0 <= value <= 1.0:
            raise ParamOutOfRange(f"{name} {value} outside [0, 1]", param=name)
    if not MEASURES_RANGE[0] <= p.num_measures <= MEASURES_RANGE[1] \
            or int(p.num_measures) != p.num_measures:
        raise ParamOutOfRange(
            f"num_measures {p.num_measures} outside {list(MEASURES_RANGE)}",
            param="num_measures")
    if not request.parts:
        raise ParamOutOfRange("parts must not be empty", param="parts")


def substream(seed: int, label: str) -> random.Random:
    """Deterministic per-stage RNG derived from the root seed."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


def target_density(d: float, stats: PartDensity) -> float:
    """Affine map of d in [0,1] onto [min, max] observed notes per measure."""
    return stats.min_notes + d * (stats.max_notes - stats.min_notes)


# --- beam core ---------------------------------------------------------------

def beam_search_first_order(vocab: Sequence, n_steps: int, initial_score,
                            step_score, width: int, rng: random.Random,
                            jitter: float, start_state=None,
                            forced_first=None) -> tuple[list, float]:
    """Maximize sum of per-step scores over state sequences.

    initial_score(v) scores the first state when start_state is None;
    otherwise the first step is scored as step_score(start_state, v, 0).
    forced_first pins the first state (scored 0). Hypotheses ending in the
    same state are recombined keeping the best, so the search is exact
    whenever width >= len(vocab).
    """
    ordered = sorted(vocab)

    def expand(hyps, step_index):
        candidates = []
        for score, seq in hyps:
            prev = seq[-1] if seq else start_state
            for v in ordered:
                if step_index == 0 and prev is None:
                    inc = initial_score(v)
                else:
                    inc = step_score(prev, v, step_index)
                if jitter > 0.0:
                    inc += jitter * rng.random()
                candidates.append((score + inc, seq + (v,)))
        best_by_state = {}
        for score, seq in candidates:
            cur = best_by_state.get(seq[-1])
            if cur is None or score > cur[0] or (score == cur[0] and seq < cur[1]):
                best_by_state[seq[-1]] = (score, seq)
        survivors = sorted(best_by_state.values(), key=lambda c: (-c[0], c[1]))
        return survivors[:width]

    if n_steps == 0:
        return [], 0.0
    if forced_first is not None:
        beam = [(0.0, (forced_first,))]
        first = 1
    else:
        beam = [(0.0, ())]
        first = 0
    for i in range(first, n_steps):
        beam = expand(beam, i)
    score, seq = beam[0]
    return list(seq), score


# --- stages -------------------------------------------------------------------

def generate_rhythm(model: StyleModel, part: Part, m: int, d: float, seed: int,
                    config: GenConfig = DEFAULT_CONFIG) -> tuple[list[int], float]:
    chain = model.rhythm.get(part)
    stats = model.density.for_part(part)
    if chain is None or stats is None:
        raise UntrainedPart(f"model has no {part.value} rhythm", part=part.value)
    target = target_density(d, stats)
    weight = config.density_weight
    log_initial = [_log(p) for p in chain.initial]
    log_trans = [[_log(p) for p in row] for row in chain.transitions]
    index = {mask: i for i, mask in enumerate(chain.vocabulary)}

    def penalty(mask: int) -> float:
        return weight * abs(bin(mask).count("1") - target)

    def initial_score(mask: int) -> float:
        return log_initial[index[mask]] - penalty(mask)

    def step_score(prev: int, mask: int, _i: int) -> float:
        return log_trans[index[prev]][index[mask]] - penalty(mask)

    rng = substream(seed, f"rhythm:{part.value}")
    return beam_search_first_order(chain.vocabulary, m, initial_score, step_score,
                                   config.beam_width, rng, config.jitter_eps)


def _sample(rng: random.Random, probs: Sequence[float]) -> int:
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return len(probs) - 1  # float remainder lands on the last symbol


def generate_chords(model: StyleModel, m: int, h: float, seed: int) -> list[str]:
    """Sequential seeded sampling from the h-mixed chord chain."""
    rng = substream(seed, "chords")
    size = len(CHORD_SYMBOLS)

    def mix(row) -> list[float]:
        return [h * p + (1.0 - h) / size for p in row]

    chords = []
    current = _sample(rng, mix(model.chords.initial))
    chords.append(CHORD_SYMBOLS[current])
    for _ in range(1, m):
        current = _sample(rng, mix(model.chords.transitions[current]))
        chords.append(CHORD_SYMBOLS[current])
    return chords


def chord_tones(symbol: str) -> frozenset[int]:
    if symbol == NO_CHORD:
        return frozenset()
    minor = symbol.endswith("m")
    root = PITCH_CLASSES.index(symbol[:-1] if minor else symbol)
    third = 3 if minor else 4
    return frozenset(((root + iv) % 12 for iv in (0, third, 7)))


def _onsets_per_measure(masks: list[int]) -> list[list[int]]:
    return [[s for s in range(STEPS_PER_MEASURE) if mask & (1 << s)] for mask in masks]


def _notes_from_measure(measure_index: int, onsets: list[int], pitches: list[int],
                        part: Part) -> list[NoteEvent]:
    notes = []
    base = measure_index * STEPS_PER_MEASURE
    for i, (step, pitch) in enumerate(zip(onsets, pitches)):
        end = onsets[i + 1] if i + 1 < len(onsets) else STEPS_PER_MEASURE
        notes.append(NoteEvent(pitch, base + step, end - step, GENERATED_VELOCITY, part))
    return notes


def _pitch_pass(chain, masks: list[int], chords: list[str], t: float, rng,
                config: GenConfig, part: Part,
                force_first_of_measure=None) -> tuple[list[NoteEvent], float]:
    """Per-measure beam over pitch choices; measures chain through the last
    chosen pitch. force_first_of_measure(measure_idx, prev_pitch) may pin
    the first onset's pitch of each measure (bass root placement)."""
    pitches = chain.pitches
    size = len(pitches)
    uniform = 1.0 / size
    log_initial = [_log(t * p + (1 - t) * uniform) for p in chain.initial]
    log_trans = [[_log(t * p + (1 - t) * uniform) for p in row] for row in chain.transitions]
    bonus_weight = config.chord_bonus

    def trans_row(prev: int) -> list[float]:
        # a forced root can land outside the observed range (range narrower
        # than an octave); transitions from it fall back to the initial mix
        if chain.low <= prev <= chain.high:
            return log_trans[chain.index(prev)]
        return log_initial

    notes: list[NoteEvent] = []
    total = 0.0
    prev_pitch: Optional[int] = None
    for measure_index, onsets in enumerate(_onsets_per_measure(masks)):
        if not onsets:
            continue
        tones = chord_tones(chords[measure_index])

        def bonus(pitch: int) -> float:
            return bonus_weight if pitch % 12 in tones else 0.0

        def initial_score(pitch: int) -> float:
            return log_initial[chain.index(pitch)] + bonus(pitch)

        def step_score(prev: int, pitch: int, _i: int) -> float:
            return trans_row(prev)[chain.index(pitch)] + bonus(pitch)

        forced = None
        if force_first_of_measure is not None:
            forced = force_first_of_measure(measure_index, prev_pitch)
        seq, score = beam_search_first_order(
            pitches, len(onsets), initial_score, step_score,
            config.beam_width, rng, config.jitter_eps,
            start_state=prev_pitch, forced_first=forced)
        total += score
        notes.extend(_notes_from_measure(measure_index, onsets, seq, part))
        prev_pitch = seq[-1]
    return notes, total


def generate_melody_pitches(model: StyleModel, masks: list[int], chords: list[str],
                            t: float, seed: int,
                            config: GenConfig = DEFAULT_CONFIG) -> tuple[list[NoteEvent], float]:
    if model.melody_pitch is None:
        raise UntrainedPart("model has no melody pitch chain", part=Part.MELODY.value)
    rng = substream(seed, "melody")
    return _pitch_pass(model.melody_pitch, masks, chords, t, rng, config, Part.MELODY)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _nearest_in_class(pitch_class: int, low: int, high: int) -> int:
    """Pitch of the class nearest the range midpoint; in-range candidates
    win, ties go to the lower octave."""
    midpoint = (low + high) / 2
    candidates = [p for p in range(low, high + 1) if p % 12 == pitch_class]
    if not candidates:
        candidates = [p for p in range(0, 128) if p % 12 == pitch_class]
    return min(candidates, key=lambda p: (abs(p - midpoint), p))


def generate_bass_pitches(model: StyleModel, masks: list[int], chords: list[str],
                          t: float, seed: int,
                          config: GenConfig = DEFAULT_CONFIG) -> tuple[list[NoteEvent], float]:
    if model.bass_pitch is None:
        raise UntrainedPart("model has no bass pitch chain", part=Part.BASS.value)
    chain = model.bass_pitch
    rng = substream(seed, "bass")

    def root_for(measure_index: int, prev_pitch: Optional[int]) -> int:
        symbol = chords[measure_index]
        if symbol == NO_CHORD:
            if prev_pitch is not None:
                return prev_pitch
            return _round_half_up((chain.low + chain.high) / 2)
        minor = symbol.endswith("m")
        root_class = PITCH_CLASSES.index(symbol[:-1] if minor else symbol)
        return _nearest_in_class(root_class, chain.low, chain.high)

    return _pitch_pass(chain, masks, chords, t, rng, config, Part.BASS,
                       force_first_of_measure=root_for)


def generate_drums(model: StyleModel, masks: list[int], seed: int) -> list[NoteEvent]:
    if model.drums is None:
        raise UntrainedPart("model has no drum-hit data", part=Part.DRUMS.value)
    rng = substream(seed, "drums")
    notes = []
    for measure_index, onsets in enumerate(_onsets_per_measure(masks)):
        base = measure_index * STEPS_PER_MEASURE
        for step in onsets:
            dist = model.drums.distribution(step % STEPS_PER_MEASURE)
            if dist:
                sets, probs = zip(*dist)
                hit = sets[_sample(rng, probs)]
            else:
                hit = model.drums.fallback
            for pitch in hit:
                notes.append(NoteEvent(pitch, base + step, 1, GENERATED_VELOCITY,
                                       Part.DRUMS))
    return notes


# --- orchestration ------------------------------------------------------------

def generate(model: StyleModel, request: PhraseRequest,
             config: GenConfig = DEFAULT_CONFIG) -> Phrase:
    """Full pipeline: per-part rhythm, chord sequence, pitch passes.

    Untrained requested parts are omitted with a warning; if every
    requested part is untrained the request fails.
    """
    validate_request(request)
    p = request.params
    trained = set(model.trained_parts())
    requested = list(dict.fromkeys(request.parts))
    usable = [part for part in (Part.MELODY, Part.BASS, Part.DRUMS)
              if part in requested and part in trained]
    if not usable:
        raise UntrainedPart(
            "no requested part is trained",
            requested=[part.value for part in requested])
    warnings = [f"part '{part.value}' is not trained in this model; omitted"
                for part in requested if part not in trained]

    chords = generate_chords(model, p.num_measures, p.harmonic_following, request.seed)

    notes: list[NoteEvent] = []
    score = 0.0
    for part in usable:
        masks, rhythm_score = generate_rhythm(model, part, p.num_measures,
                                              p.note_density, request.seed, config)
        score += rhythm_score
        if part is Part.MELODY:
            part_notes, pitch_score = generate_melody_pitches(
                model, masks, chords, p.melodic_typicality, request.seed, config)
            score += pitch_score
        elif part is Part.BASS:
            part_notes, pitch_score = generate_bass_pitches(
                model, masks, chords, p.melodic_typicality, request.seed, config)
            score += pitch_score
        else:
            part_notes = generate_drums(model, masks, request.seed)
        notes.extend(part_notes)

    notes.sort(key=NoteEvent.sort_key)
    return Phrase(notes=notes, chords=chords, request=request, score=score,
                  warnings=warnings)
