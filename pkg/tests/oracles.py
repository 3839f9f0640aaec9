"""Independent reference implementations used to derive expected test values.

Everything here is deliberately naive and written separately from the
package code paths it checks: a stream-style MIDI event reader, O(n^2)
transition counting over pieces, a from-scratch chord template scorer and
exhaustive sequence search. Keep these dumb; their only job is to be
obviously correct.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict

# ---------------------------------------------------------------------------
# Reference MIDI reader: returns raw events without any quantization.
# ---------------------------------------------------------------------------


def reference_read_smf(data: bytes):
    """Return (tpq, tempo_us_or_None, notes) where notes are dicts with
    track/channel/pitch/velocity/onset_tick/duration_ticks, paired FIFO.
    Raises plain ValueError on anything unexpected."""
    pos = 0

    def need(n):
        nonlocal pos
        if pos + n > len(data):
            raise ValueError("eof")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    if need(4) != b"MThd":
        raise ValueError("no MThd")
    hlen = int.from_bytes(need(4), "big")
    header = need(hlen)
    fmt = int.from_bytes(header[0:2], "big")
    ntrks = int.from_bytes(header[2:4], "big")
    tpq = int.from_bytes(header[4:6], "big")
    if fmt not in (0, 1):
        raise ValueError("format")

    tempo_us = None
    notes = []
    track_index = 0
    while track_index < ntrks:
        ctype = need(4)
        clen = int.from_bytes(need(4), "big")
        body = need(clen)
        if ctype != b"MTrk":
            continue
        # walk the track body
        i = 0
        t = 0
        running = None
        open_notes = defaultdict(list)

        def vlq():
            nonlocal i
            v = 0
            for _ in range(4):
                b = body[i]
                i += 1
                v = (v << 7) | (b & 0x7F)
                if not b & 0x80:
                    return v
            raise ValueError("vlq")

        while i < len(body):
            t += vlq()
            b = body[i]
            if b == 0xFF:
                i += 1
                mtype = body[i]
                i += 1
                mlen = vlq()
                payload = body[i:i + mlen]
                i += mlen
                if mtype == 0x2F:
                    break
                if mtype == 0x51 and tempo_us is None:
                    tempo_us = int.from_bytes(payload, "big")
                running = None
            elif b in (0xF0, 0xF7):
                i += 1
                slen = vlq()
                i += slen
                running = None
            else:
                if b & 0x80:
                    status = b
                    i += 1
                    running = status
                else:
                    status = running
                hi = status & 0xF0
                ch = status & 0x0F
                if hi in (0xC0, 0xD0):
                    i += 1
                    continue
                d1 = body[i]
                d2 = body[i + 1]
                i += 2
                if hi == 0x90 and d2 > 0:
                    open_notes[(ch, d1)].append((t, d2))
                elif hi == 0x80 or (hi == 0x90 and d2 == 0):
                    q = open_notes.get((ch, d1))
                    if q:
                        onset, vel = q.pop(0)
                        notes.append(dict(track=track_index, channel=ch, pitch=d1,
                                          velocity=vel, onset_tick=onset,
                                          duration_ticks=t - onset))
        for (ch, pitch), q in open_notes.items():
            for onset, vel in q:
                notes.append(dict(track=track_index, channel=ch, pitch=pitch,
                                  velocity=vel, onset_tick=onset,
                                  duration_ticks=t - onset))
        track_index += 1
    return tpq, tempo_us, notes


# ---------------------------------------------------------------------------
# Naive feature counting over Piece objects (duck-typed: .notes with
# .pitch/.onset/.duration/.part, part values "melody"/"bass"/"drums").
# ---------------------------------------------------------------------------

STEPS = 16


def piece_part_notes(piece, part):
    return [n for n in piece.notes if n.part.value == part]


def rhythm_masks(piece, part):
    """Per-measure onset bitmask for a part, one entry per piece measure."""
    masks = [0] * piece.length_measures
    for n in piece_part_notes(piece, part):
        masks[n.onset // STEPS] |= 1 << (n.onset % STEPS)
    return masks


def count_rhythm(pieces, part):
    """(initial_counts, transition_counts) over pieces where the part occurs."""
    initial = Counter()
    trans = Counter()
    for piece in pieces:
        if not piece_part_notes(piece, part):
            continue
        masks = rhythm_masks(piece, part)
        initial[masks[0]] += 1
        for a, b in zip(masks, masks[1:]):
            trans[(a, b)] += 1
    return initial, trans


def pitch_sequence(piece, part):
    return [n.pitch for n in sorted(piece_part_notes(piece, part),
                                    key=lambda n: (n.onset, n.pitch))]


def count_pitch(pieces, part):
    initial = Counter()
    trans = Counter()
    lo, hi = None, None
    for piece in pieces:
        seq = pitch_sequence(piece, part)
        if not seq:
            continue
        initial[seq[0]] += 1
        for a, b in zip(seq, seq[1:]):
            trans[(a, b)] += 1
        lo = min(seq) if lo is None else min(lo, min(seq))
        hi = max(seq) if hi is None else max(hi, max(seq))
    return initial, trans, lo, hi


PITCH_CLASSES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]


def chord_symbols():
    return [pc for pc in PITCH_CLASSES] + [pc + "m" for pc in PITCH_CLASSES] + ["N"]


def reference_estimate_chord(weighted_pcs):
    """weighted_pcs: dict pitch_class -> weight. Scan all 24 triads in
    (root asc, major-then-minor) order keeping strictly better scores."""
    if not weighted_pcs or all(w <= 0 for w in weighted_pcs.values()):
        return "N"
    best_name, best_score = "N", 0.0
    for root in range(12):
        for quality, intervals in (("", (0, 4, 7)), ("m", (0, 3, 7))):
            score = sum(weighted_pcs.get((root + iv) % 12, 0.0) for iv in intervals)
            if score > best_score:
                best_score = score
                best_name = PITCH_CLASSES[root] + quality
    return best_name


def piece_chords(piece):
    """Chord per measure from duration-weighted melody+bass pitch classes,
    durations clipped at the bar line."""
    chords = []
    for m in range(piece.length_measures):
        lo, hi = m * STEPS, (m + 1) * STEPS
        weights = defaultdict(float)
        for n in piece.notes:
            if n.part.value == "drums" or not lo <= n.onset < hi:
                continue
            weights[n.pitch % 12] += min(n.duration, hi - n.onset)
        chords.append(reference_estimate_chord(dict(weights)))
    return chords


def count_chords(pieces):
    initial = Counter()
    trans = Counter()
    for piece in pieces:
        seq = piece_chords(piece)
        initial[seq[0]] += 1
        for a, b in zip(seq, seq[1:]):
            trans[(a, b)] += 1
    return initial, trans


def density_stats(pieces, part):
    """(min, mean, max) of per-measure note counts over non-empty measures."""
    counts = []
    for piece in pieces:
        per_measure = [0] * piece.length_measures
        for n in piece_part_notes(piece, part):
            per_measure[n.onset // STEPS] += 1
        counts.extend(c for c in per_measure if c > 0)
    if not counts:
        return None
    return min(counts), sum(counts) / len(counts), max(counts)


def smoothed_row(counts_row, alpha, size):
    """Laplace smoothing; an all-zero row with alpha 0 falls back to uniform."""
    total = sum(counts_row)
    denom = total + alpha * size
    if denom == 0:
        return [1.0 / size] * size
    return [(c + alpha) / denom for c in counts_row]


# ---------------------------------------------------------------------------
# Exhaustive search oracles.
# ---------------------------------------------------------------------------


def exhaustive_best_sequence(vocab, n_steps, initial_score, step_score):
    """Max-scoring state sequence by full enumeration. Scores accumulate
    left to right so floats match an incremental beam exactly. Ties prefer
    the lexicographically smaller sequence."""
    best_seq, best_score = None, -math.inf
    for seq in itertools.product(sorted(vocab), repeat=n_steps):
        score = initial_score(seq[0])
        for i in range(1, n_steps):
            score = score + step_score(seq[i - 1], seq[i], i)
        if score > best_score or (score == best_score and best_seq is not None and list(seq) < list(best_seq)):
            best_score = score
            best_seq = list(seq)
    return best_seq, best_score


def chi_square_statistic(observed, expected_total_per_bin):
    return sum((obs - expected_total_per_bin) ** 2 / expected_total_per_bin
               for obs in observed)
