"""Composes the bundled demo corpus and writes it into the package data.

Run from the repo root: python scripts/make_demo_corpus.py
Eight-measure trio pieces in three small styles, deterministic by seed.
"""

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from phrasegen.midi_io import NoteEvent, Part, write_smf  # noqa: E402

MAJOR = [0, 2, 4, 5, 7, 9, 11]
MINOR = [0, 2, 3, 5, 7, 8, 10]
PENTA = [0, 2, 4, 7, 9]

ROCK_BEAT = {0: (36, 42), 2: (42,), 4: (38, 42), 6: (42,), 8: (36, 42),
             10: (42,), 12: (38, 42), 14: (42,)}
SPARSE_BEAT = {0: (36,), 4: (42,), 8: (38,), 12: (42,)}
SYNCO_BEAT = {0: (36, 42), 3: (42,), 6: (38,), 8: (36,), 11: (42,), 14: (38, 42)}


def compose(seed: int, scale, beat, root: int, tempo: float) -> bytes:
    rng = random.Random(seed)
    notes = []
    degree = rng.randrange(len(scale))
    octave = 0
    progression = [0, 3, 4, 0, 5, 3, 4, 0]  # scale-degree roots per measure
    for m in range(8):
        onsets = sorted(rng.sample([0, 2, 4, 6, 8, 10, 12, 14],
                                   k=rng.choice([3, 4, 4, 5, 6])))
        for i, step in enumerate(onsets):
            move = rng.choice([-2, -1, -1, 0, 1, 1, 2, 3])
            degree += move
            while degree < 0:
                degree += len(scale)
                octave -= 1
            while degree >= len(scale):
                degree -= len(scale)
                octave += 1
            octave = max(-1, min(1, octave))
            pitch = 60 + root + scale[degree] + 12 * octave
            end = onsets[i + 1] if i + 1 < len(onsets) else 16
            notes.append(NoteEvent(pitch, m * 16 + step, end - step,
                                   rng.randint(70, 100), Part.MELODY))
        bass_degree = progression[m] % len(scale)
        bass_pitch = 36 + root + scale[bass_degree]
        notes.append(NoteEvent(bass_pitch, m * 16, 8, 85, Part.BASS))
        fifth = bass_pitch + 7 if bass_pitch + 7 < 56 else bass_pitch - 5
        notes.append(NoteEvent(fifth, m * 16 + 8, 8, 80, Part.BASS))
        for step, pitches in beat.items():
            for p in pitches:
                notes.append(NoteEvent(p, m * 16 + step, 1, 92, Part.DRUMS))
    return write_smf(notes, tempo)


PIECES = [
    ("bright-one", 11, MAJOR, ROCK_BEAT, 0, 112),
    ("bright-two", 12, MAJOR, ROCK_BEAT, 0, 112),
    ("dusk-one", 21, MINOR, SPARSE_BEAT, 9, 96),
    ("dusk-two", 22, MINOR, SPARSE_BEAT, 9, 96),
    ("open-sky-one", 31, PENTA, SYNCO_BEAT, 2, 124),
    ("open-sky-two", 32, PENTA, SYNCO_BEAT, 2, 124),
]


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "phrasegen" / "demo_corpus"
    out.mkdir(parents=True, exist_ok=True)
    for name, seed, scale, beat, root, tempo in PIECES:
        data = compose(seed, scale, beat, root, tempo)
        (out / f"{name}.mid").write_bytes(data)
        print(f"wrote {name}.mid ({len(data)} bytes)")
