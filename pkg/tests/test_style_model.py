"""Style model training: segmentation, chains, chords, density, drums."""

import random

import numpy as np
import pytest

from phrasegen.corpus import Corpus
from phrasegen.errors import EmptyCorpus, EmptyPart, ParamOutOfRange, SingleNote, UnknownModel
from phrasegen.midi_io import NoteEvent, Part, build_piece
from phrasegen.model_store import ModelStore
from phrasegen.style_model import (
    CHORD_SYMBOLS,
    estimate_chord,
    extract_chord_model,
    extract_density,
    extract_drum_hits,
    extract_pitch_chain,
    extract_rhythm_chain,
    model_from_dict,
    segment_measures,
    serialize_model,
    train,
)

import oracles


def note(pitch, onset, duration=1, part=Part.MELODY, velocity=96):
    return NoteEvent(pitch, onset, duration, velocity, part)


def piece_of(notes, pid="p1"):
    return build_piece(notes, piece_id=pid)


def corpus_of(pieces, cid="test-corpus"):
    return Corpus(cid, cid, "t0", "t0", {p.id: p for p in pieces})


def measures_of(*pieces):
    return [segment_measures(p) for p in pieces]


# masks: A = onset at step 0 only; B = onsets at steps 0 and 8
MASK_A = 1
MASK_B = (1 << 0) | (1 << 8)


def mask_piece(mask_seq, part=Part.MELODY, pid="p1", pitch_cycle=(60, 64)):
    """Build a piece whose per-measure onset masks for `part` are mask_seq."""
    notes = []
    k = 0
    for m, mask in enumerate(mask_seq):
        for step in range(16):
            if mask & (1 << step):
                notes.append(note(pitch_cycle[k % len(pitch_cycle)], m * 16 + step,
                                  1, part))
                k += 1
    return piece_of(notes, pid)


# --- segmentation -----------------------------------------------------------

def test_segment_measure_count_ceil():
    piece = piece_of([note(60, 0), note(60, 16, 1)])
    assert piece.length_measures == 2
    assert len(segment_measures(piece)) == 2


def test_segment_truncates_at_barline():
    piece = piece_of([note(60, 15, 4)])
    measures = segment_measures(piece)
    assert len(measures) == 2
    entry = measures[0].notes[Part.MELODY][0]
    assert (entry.step, entry.duration) == (15, 1)
    assert measures[1].notes[Part.MELODY] == []


def test_segment_trio_fixture_hand_count():
    from test_midi_io import load
    from phrasegen.midi_io import parse_smf
    piece = parse_smf(load("trio.mid"))
    measures = segment_measures(piece)
    assert len(measures) == 1  # hand count: all events inside one measure
    assert measures[0].mask(Part.MELODY) == (1 | 1 << 4 | 1 << 8 | 1 << 12)
    assert measures[0].mask(Part.DRUMS) == (1 | 1 << 4 | 1 << 8 | 1 << 12)
    assert measures[0].count(Part.BASS) == 2


# --- rhythm chain -----------------------------------------------------------

def test_rhythm_chain_abab_alpha0():
    # hand count: pairs A->B, B->A, A->B; initial A
    chain = extract_rhythm_chain(measures_of(mask_piece([MASK_A, MASK_B, MASK_A, MASK_B])),
                                 Part.MELODY, alpha=0.0)
    assert chain.vocabulary == sorted([MASK_A, MASK_B])
    a, b = chain.index(MASK_A), chain.index(MASK_B)
    assert chain.transitions[a, b] == 1.0
    assert chain.transitions[b, a] == 1.0
    assert chain.initial[a] == 1.0
    assert chain.transition_counts[a, b] == 2
    assert chain.transition_counts[b, a] == 1


def test_rhythm_chain_abab_smoothed():
    chain = extract_rhythm_chain(measures_of(mask_piece([MASK_A, MASK_B, MASK_A, MASK_B])),
                                 Part.MELODY, alpha=0.1)
    a, b = chain.index(MASK_A), chain.index(MASK_B)
    assert chain.transitions[a, b] == pytest.approx((2 + 0.1) / (2 + 0.2), abs=1e-12)


def test_rhythm_chain_single_measure_uniform_rows():
    chain = extract_rhythm_chain(measures_of(mask_piece([MASK_A])), Part.MELODY, 0.1)
    assert chain.transition_counts.sum() == 0
    np.testing.assert_allclose(chain.transitions, 1.0)  # single-symbol vocab


def test_rhythm_chain_empty_part():
    with pytest.raises(EmptyPart):
        extract_rhythm_chain(measures_of(mask_piece([MASK_A])), Part.DRUMS, 0.1)


def test_rhythm_chain_does_not_cross_pieces():
    p1 = mask_piece([MASK_A, MASK_B], pid="p1")
    p2 = mask_piece([MASK_B, MASK_A], pid="p2")
    chain = extract_rhythm_chain(measures_of(p1, p2), Part.MELODY, 0.0)
    a, b = chain.index(MASK_A), chain.index(MASK_B)
    # one A->B from p1, one B->A from p2, nothing across the boundary
    assert chain.transition_counts[a, b] == 1
    assert chain.transition_counts[b, a] == 1
    assert chain.initial_counts[a] == 1 and chain.initial_counts[b] == 1


# --- pitch chain ------------------------------------------------------------

def test_pitch_chain_cycle_alpha0():
    piece = piece_of([note(60, 0), note(64, 4), note(60, 8), note(64, 12)])
    chain = extract_pitch_chain(measures_of(piece), Part.MELODY, 0.0)
    assert (chain.low, chain.high) == (60, 64)
    assert chain.transitions[chain.index(60), chain.index(64)] == 1.0
    assert chain.transitions[chain.index(64), chain.index(60)] == 1.0


def test_pitch_chain_single_note():
    with pytest.raises(SingleNote):
        extract_pitch_chain(measures_of(piece_of([note(60, 0)])), Part.MELODY, 0.1)


def test_pitch_chain_empty():
    with pytest.raises(EmptyPart):
        extract_pitch_chain(measures_of(piece_of([note(36, 0, 1, Part.BASS),
                                                  note(38, 4, 1, Part.BASS)])),
                            Part.MELODY, 0.1)


def test_pitch_chain_simultaneous_onsets_order_by_pitch():
    piece = piece_of([note(67, 0), note(60, 0), note(64, 0)])
    chain = extract_pitch_chain(measures_of(piece), Part.MELODY, 0.0)
    assert chain.transition_counts[chain.index(60), chain.index(64)] == 1
    assert chain.transition_counts[chain.index(64), chain.index(67)] == 1
    assert chain.transition_counts.sum() == 2


# --- chord estimation -------------------------------------------------------

def test_estimate_chord_c_major():
    piece = piece_of([note(60, 0, 4), note(64, 4, 4), note(67, 8, 4)])
    assert estimate_chord(segment_measures(piece)[0]) == "C"


def test_estimate_chord_empty_measure():
    piece = piece_of([note(36, 0, 1, Part.DRUMS)])
    assert estimate_chord(segment_measures(piece)[0]) == "N"


def test_estimate_chord_a_minor_beats_c_major():
    # pitch classes {A, C, E}: Am matches 3 templates notes vs C's 2.
    # expected value derived with the independent 24-template scan.
    piece = piece_of([note(69, 0, 4), note(60, 4, 4), note(64, 8, 4)])
    expected = oracles.reference_estimate_chord({9: 4.0, 0: 4.0, 4: 4.0})
    assert expected == "Am"
    assert estimate_chord(segment_measures(piece)[0]) == "Am"


def test_estimate_chord_duration_weighting():
    # G lasts 12 steps vs C+E 2 each: G-major (G dominates) per the oracle
    weights = {7: 12.0, 0: 2.0, 4: 2.0}
    expected = oracles.reference_estimate_chord(weights)
    piece = piece_of([note(67, 0, 12), note(60, 12, 2), note(64, 14, 2)])
    assert estimate_chord(segment_measures(piece)[0]) == expected


# --- chord model ------------------------------------------------------------

def chord_piece(chord_seq, pid="p1"):
    """One measure per chord symbol, spelled as a closed triad."""
    roots = {name: i for i, name in enumerate(
        ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"])}
    notes = []
    for m, symbol in enumerate(chord_seq):
        if symbol == "N":
            continue
        minor = symbol.endswith("m")
        root = roots[symbol[:-1] if minor else symbol]
        third = root + (3 if minor else 4)
        for i, pc in enumerate((root, third, root + 7)):
            notes.append(note(60 + pc, m * 16 + i * 4, 4))
    return piece_of(notes, pid)


def test_chord_model_cg_cycle():
    model = extract_chord_model(measures_of(chord_piece(["C", "G", "C", "G"])), 0.0)
    c, g = CHORD_SYMBOLS.index("C"), CHORD_SYMBOLS.index("G")
    assert model.transitions[c, g] == 1.0
    assert model.transitions[g, c] == 1.0
    assert model.initial[c] == 1.0


def test_chord_model_all_empty_measures():
    piece = piece_of([note(36, 0, 1, Part.DRUMS), note(36, 16, 1, Part.DRUMS),
                      note(36, 32, 1, Part.DRUMS)])
    model = extract_chord_model(measures_of(piece), 0.5)
    n = CHORD_SYMBOLS.index("N")
    assert model.transition_counts[n, n] == 2
    # row N: (2 + .5) / (2 + .5*25) for N, .5/denominator elsewhere
    assert model.transitions[n, n] == pytest.approx((2 + 0.5) / (2 + 0.5 * 25))
    assert model.transitions[n, 0] == pytest.approx(0.5 / (2 + 0.5 * 25))


def test_chord_model_alpha1_zero_counts_uniform():
    piece = piece_of([note(36, 0, 1, Part.DRUMS)])  # single N measure, no pairs
    model = extract_chord_model(measures_of(piece), 1.0)
    np.testing.assert_allclose(model.transitions, 1.0 / 25)


# --- density / drums --------------------------------------------------------

def test_density_min_mean_max():
    notes = []
    for m, count in enumerate([2, 6, 10]):
        for i in range(count):
            notes.append(note(60, m * 16 + i))
    stats = extract_density(measures_of(piece_of(notes)))
    d = stats.for_part(Part.MELODY)
    assert (d.min_notes, d.mean_notes, d.max_notes) == (2, 6, 10)


def test_density_skips_empty_measures():
    notes = [note(60, 0), note(60, 1), note(60, 32)]  # measures 0 and 2
    d = extract_density(measures_of(piece_of(notes))).for_part(Part.MELODY)
    assert (d.min_notes, d.mean_notes, d.max_notes) == (1, 1.5, 2)


def test_drum_hits_empty():
    assert extract_drum_hits(measures_of(piece_of([note(60, 0)]))) is None


def test_drum_hits_point_mass():
    notes = []
    for m in range(2):
        for step in range(16):
            notes.append(note(36, m * 16 + step, 1, Part.DRUMS))
            notes.append(note(42, m * 16 + step, 1, Part.DRUMS))
    model = extract_drum_hits(measures_of(piece_of(notes)))
    for step in range(16):
        assert model.distribution(step) == [((36, 42), 1.0)]
    assert model.fallback == (36, 42)


def test_drum_hits_unobserved_step_empty():
    piece = piece_of([note(36, 0, 1, Part.DRUMS)])
    model = extract_drum_hits(measures_of(piece))
    assert model.distribution(0) == [((36,), 1.0)]
    assert model.distribution(5) == []


# --- train ------------------------------------------------------------------

def trio_corpus(pid_prefix="piece", n_pieces=2, measures=4, seed=7):
    rng = random.Random(seed)
    pieces = []
    for k in range(n_pieces):
        notes = []
        for m in range(measures):
            for step in (0, 4, 8, 12):
                notes.append(note(rng.choice([60, 62, 64, 67]), m * 16 + step, 2))
            notes.append(note(rng.choice([36, 40, 43]), m * 16, 4, Part.BASS))
            notes.append(note(rng.choice([36, 40, 43]), m * 16 + 8, 4, Part.BASS))
            for step in (0, 8):
                notes.append(note(36, m * 16 + step, 1, Part.DRUMS))
            notes.append(note(42, m * 16 + 4, 1, Part.DRUMS))
        pieces.append(piece_of(notes, f"{pid_prefix}-{k}"))
    return corpus_of(pieces)


def test_train_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train(corpus_of([]))


def test_train_rejects_bad_alpha():
    with pytest.raises(ParamOutOfRange):
        train(trio_corpus(), {"smoothing_alpha": -1})
    with pytest.raises(ParamOutOfRange):
        train(trio_corpus(), {"smoothing_alpha": 11})
    with pytest.raises(ParamOutOfRange):
        train(trio_corpus(), {"mystery_knob": 1})


def test_train_rows_sum_to_one():
    model = train(trio_corpus())
    for chain in model.rhythm.values():
        np.testing.assert_allclose(chain.transitions.sum(axis=1), 1.0, atol=1e-9)
        assert chain.initial.sum() == pytest.approx(1.0, abs=1e-9)
    for chain in (model.melody_pitch, model.bass_pitch, model.chords):
        np.testing.assert_allclose(chain.transitions.sum(axis=1), 1.0, atol=1e-9)
        assert chain.initial.sum() == pytest.approx(1.0, abs=1e-9)


def test_train_counts_match_naive_oracle():
    corpus = trio_corpus(n_pieces=3, measures=4, seed=123)
    model = train(corpus, {"smoothing_alpha": 0.0})
    pieces = [corpus.pieces[pid] for pid in sorted(corpus.pieces)]

    for part_name, part in (("melody", Part.MELODY), ("bass", Part.BASS),
                            ("drums", Part.DRUMS)):
        initial, trans = oracles.count_rhythm(pieces, part_name)
        chain = model.rhythm[part]
        assert set(chain.vocabulary) == set(initial) | {m for pair in trans for m in pair}
        for (a, b), c in trans.items():
            assert chain.transition_counts[chain.index(a), chain.index(b)] == c
        assert chain.transition_counts.sum() == sum(trans.values())
        for mask, c in initial.items():
            assert chain.initial_counts[chain.index(mask)] == c

    for part_name, chain in (("melody", model.melody_pitch), ("bass", model.bass_pitch)):
        initial, trans, lo, hi = oracles.count_pitch(pieces, part_name)
        assert (chain.low, chain.high) == (lo, hi)
        for (a, b), c in trans.items():
            assert chain.transition_counts[chain.index(a), chain.index(b)] == c
        assert chain.transition_counts.sum() == sum(trans.values())

    initial, trans = oracles.count_chords(pieces)
    for (a, b), c in trans.items():
        assert model.chords.transition_counts[CHORD_SYMBOLS.index(a),
                                              CHORD_SYMBOLS.index(b)] == c
    assert model.chords.transition_counts.sum() == sum(trans.values())


def test_train_degrades_to_available_parts():
    melody_only = corpus_of([piece_of([note(60, 0), note(62, 4), note(64, 8)])])
    model = train(melody_only)
    assert model.melody_pitch is not None
    assert model.bass_pitch is None
    assert model.drums is None
    assert Part.BASS not in model.rhythm


def test_train_deterministic_serialization():
    c = trio_corpus(seed=5)
    m1 = train(c, trained_at="2026-01-01T00:00:00+00:00")
    m2 = train(c, trained_at="2026-01-01T00:00:00+00:00")
    assert serialize_model(m1) == serialize_model(m2)
    # a different timestamp must be the only difference
    m3 = train(c, trained_at="2026-01-02T00:00:00+00:00")
    d1, d3 = serialize_model(m1), serialize_model(m3)
    assert d1 != d3
    assert d1.replace("2026-01-01", "2026-01-02") == d3


# --- store ------------------------------------------------------------------

def test_save_load_model_roundtrip(tmp_path):
    store = ModelStore(tmp_path / "models_trained")
    model = train(trio_corpus())
    store.save_model(model)
    loaded = store.load_model(model.model_id)
    assert serialize_model(loaded) == serialize_model(model)
    assert loaded.stale is None  # no corpus store attached


def test_load_unknown_model(tmp_path):
    store = ModelStore(tmp_path / "models_trained")
    with pytest.raises(UnknownModel):
        store.load_model("missing")


def test_staleness_flag(tmp_path):
    from phrasegen.corpus import CorpusStore
    from test_midi_io import load as load_fixture

    corpora = CorpusStore(tmp_path / "corpora")
    c = corpora.create_corpus("s")
    corpora.add_piece(c.id, load_fixture("trio.mid"))
    store = ModelStore(tmp_path / "models_trained", corpora)
    model = train(corpora.load_corpus(c.id))
    store.save_model(model)
    assert store.load_model(model.model_id).stale is False
    corpora.add_piece(c.id, load_fixture("chorale.mid"))
    assert store.load_model(model.model_id).stale is True


def test_serialization_precision():
    model = train(trio_corpus(), {"smoothing_alpha": 0.1})
    doc = serialize_model(model)
    reloaded = model_from_dict(__import__("json").loads(doc))
    for part, chain in model.rhythm.items():
        np.testing.assert_array_equal(reloaded.rhythm[part].transitions, chain.transitions)
    np.testing.assert_array_equal(reloaded.chords.transitions, model.chords.transitions)
