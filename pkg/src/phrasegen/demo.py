"""Bundled demo corpus: small trio pieces for first runs and smoke tests."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def demo_pieces() -> list[tuple[str, bytes]]:
    """(filename, bytes) for every bundled demo piece, sorted by name."""
    package = resources.files(__package__) / "demo_corpus"
    pieces = []
    for entry in sorted(package.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".mid"):
            pieces.append((entry.name, entry.read_bytes()))
    return pieces


def export_demo_corpus(out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, data in demo_pieces():
        path = out_dir / name
        path.write_bytes(data)
        written.append(path)
    return written
