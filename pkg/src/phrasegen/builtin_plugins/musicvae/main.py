#!/usr/bin/env python3
"""Stand-in latent-variable model exercising the plugin protocol.

Deliberately self-contained (no host imports): speaks only the file
contract. ``train`` records corpus statistics into a state directory;
``generate`` writes a deterministic seeded 16-measure trio phrase. The
STUB_EXIT_CODE / STUB_SLEEP_SECONDS environment variables force failure
modes so the host's crash and timeout paths can be exercised in tests.

argv: <command> <input_path> <request.json> <output_dir>
"""

import json
import os
import random
import struct
import sys
import time
from pathlib import Path

MEASURES = 16
TPQ = 480
STEP = TPQ // 4  # sixteenth grid


def vlq(value):
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def track(events):
    """events: (absolute_tick, message) pairs sorted by tick."""
    body = bytearray()
    prev = 0
    for tick, msg in events:
        body += vlq(tick - prev) + msg
        prev = tick
    body += vlq(0) + b"\xff\x2f\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def note_events(channel, notes):
    """notes: (step, pitch, dur_steps, velocity); returns sorted events with
    note-offs before note-ons at equal ticks."""
    events = []
    for step, pitch, dur, vel in notes:
        events.append((step * STEP, 1, bytes((0x90 | channel, pitch, vel))))
        events.append(((step + dur) * STEP, 0, bytes((0x80 | channel, pitch, 0))))
    events.sort(key=lambda e: (e[0], e[1], e[2]))
    return [(t, m) for t, _, m in events]


def generate_phrase(rng, temperature):
    scale = [0, 2, 4, 5, 7, 9, 11]
    wander = max(1, int(round(2 * temperature)))
    melody, bass, drums = [], [], []
    degree = rng.randrange(len(scale))
    for m in range(MEASURES):
        for step in range(0, 16, 2):
            degree = max(0, min(13, degree + rng.randint(-wander, wander)))
            pitch = 64 + scale[degree % 7] + 12 * (degree // 7)
            melody.append((m * 16 + step, pitch, 2, 96))
        root = scale[rng.randrange(len(scale))]
        bass.append((m * 16, 40 + root, 8, 90))
        bass.append((m * 16 + 8, 40 + (root + 7) % 12, 8, 90))
        for step in (0, 4, 8, 12):
            drums.append((m * 16 + step, 36 if step % 8 == 0 else 38, 1, 100))
            drums.append((m * 16 + step + 2, 42, 1, 80))
    return melody, bass, drums


def write_phrase(path, rng, temperature):
    melody, bass, drums = generate_phrase(rng, temperature)
    tempo_track = track([(0, b"\xff\x51\x03" + (500000).to_bytes(3, "big"))])
    chunks = [tempo_track,
              track(note_events(0, melody)),
              track(note_events(1, bass)),
              track(note_events(9, drums))]
    header = b"MThd" + struct.pack(">IHHH", 6, 1, len(chunks), TPQ)
    path.write_bytes(header + b"".join(chunks))


def main():
    if os.environ.get("STUB_EXIT_CODE"):
        print("forced failure for testing", file=sys.stderr)
        sys.exit(int(os.environ["STUB_EXIT_CODE"]))
    if os.environ.get("STUB_SLEEP_SECONDS"):
        time.sleep(float(os.environ["STUB_SLEEP_SECONDS"]))

    if len(sys.argv) != 5:
        print("usage: main.py <command> <input> <request.json> <output_dir>",
              file=sys.stderr)
        sys.exit(2)
    command, input_path, request_path, output_dir = sys.argv[1:]
    request = json.loads(Path(request_path).read_text())
    seed = request["seed"]
    params = request.get("params", {})
    out = Path(output_dir)

    if command == "train":
        pieces = sorted(Path(input_path).glob("pieces/*.mid"))
        state = out / "state"
        state.mkdir(parents=True, exist_ok=True)
        (state / "state.json").write_text(json.dumps({
            "piece_count": len(pieces),
            "piece_bytes": sum(p.stat().st_size for p in pieces),
            "seed": seed,
            "params": params,
        }, sort_keys=True))
    elif command == "generate":
        method = params.get("method", 0)
        noise = params.get("noise_amount", 0.001)
        temperature = params.get("temperature", 1.0)
        state_fingerprint = ""
        state_file = Path(input_path) / "state.json"
        if state_file.is_file():
            state_fingerprint = state_file.read_text()
        rng = random.Random(f"{seed}:{method}:{noise!r}:{temperature!r}:{state_fingerprint}")
        write_phrase(out / "phrase.mid", rng, temperature)
    else:
        print(f"unknown command {command!r}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
