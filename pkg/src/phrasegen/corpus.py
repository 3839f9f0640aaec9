"""Named, editable collections of parsed MIDI pieces, persisted on disk.

Layout: ``<root>/<corpus_id>/manifest.json`` plus the original upload bytes
under ``<root>/<corpus_id>/pieces/<piece_id>.mid``. Originals are stored
verbatim so pieces can be re-parsed if quantization rules evolve; dedup is
by content hash. Manifest writes go through a temp file + rename so a
failed mutation leaves the previous state intact. Mutations are serialized
per corpus id; reads can run concurrently.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import midi_io
from .errors import (
    DuplicateName,
    DuplicatePiece,
    InvalidName,
    StorageFailure,
    UnknownCorpus,
    UnknownPiece,
)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass
class CorpusSummary:
    id: str
    name: str
    created_at: str
    modified_at: str
    piece_count: int


@dataclass
class Corpus:
    id: str
    name: str
    created_at: str
    modified_at: str
    pieces: dict[str, midi_io.Piece]

    def content_hash(self) -> str:
        """Hash over the sorted piece content hashes; changes on add/remove."""
        joined = "\n".join(sorted(p.source_bytes_hash for p in self.pieces.values()))
        return hashlib.sha256(joined.encode()).hexdigest()


class CorpusStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, corpus_id: str) -> threading.RLock:
        with self._locks_guard:
            return self._locks.setdefault(corpus_id, threading.RLock())

    def _dir(self, corpus_id: str) -> Path:
        return self.root / corpus_id

    def _manifest_path(self, corpus_id: str) -> Path:
        return self._dir(corpus_id) / "manifest.json"

    def _read_manifest(self, corpus_id: str) -> dict:
        path = self._manifest_path(corpus_id)
        if not path.is_file():
            raise UnknownCorpus(f"no corpus {corpus_id!r}", corpus_id=corpus_id)
        try:
            return json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"unreadable manifest for {corpus_id!r}: {exc}") from exc

    def _write_manifest(self, corpus_id: str, manifest: dict) -> None:
        path = self._manifest_path(corpus_id)
        tmp = path.with_suffix(".json.tmp")
        try:
            tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageFailure(f"cannot write manifest: {exc}") from exc

    # --- operations ---------------------------------------------------------

    def create_corpus(self, name: str) -> Corpus:
        if not name or not name.strip():
            raise InvalidName("corpus name must be non-empty")
        with self._locks_guard:
            for existing in self._iter_manifests():
                if existing["name"] == name:
                    raise DuplicateName(f"corpus named {name!r} exists", name=name)
            corpus_id = "c" + uuid.uuid4().hex[:12]
            now = _now()
            corpus_dir = self._dir(corpus_id)
            try:
                (corpus_dir / "pieces").mkdir(parents=True)
            except OSError as exc:
                raise StorageFailure(f"cannot create corpus dir: {exc}") from exc
        manifest = {"id": corpus_id, "name": name, "created_at": now,
                    "modified_at": now, "pieces": []}
        self._write_manifest(corpus_id, manifest)
        return Corpus(corpus_id, name, now, now, {})

    def add_piece(self, corpus_id: str, file_bytes: bytes, title: str = "") -> midi_io.Piece:
        with self._lock(corpus_id):
            manifest = self._read_manifest(corpus_id)
            piece = midi_io.parse_smf(file_bytes, title=title)
            if any(p["hash"] == piece.source_bytes_hash for p in manifest["pieces"]):
                raise DuplicatePiece("identical file already in corpus",
                                     hash=piece.source_bytes_hash)
            piece_path = self._dir(corpus_id) / "pieces" / f"{piece.id}.mid"
            try:
                piece_path.write_bytes(file_bytes)
            except OSError as exc:
                raise StorageFailure(f"cannot store piece: {exc}") from exc
            manifest["pieces"].append({
                "id": piece.id,
                "title": piece.title,
                "tempo_bpm": piece.tempo_bpm,
                "length_measures": piece.length_measures,
                "hash": piece.source_bytes_hash,
            })
            manifest["modified_at"] = _now()
            try:
                self._write_manifest(corpus_id, manifest)
            except StorageFailure:
                piece_path.unlink(missing_ok=True)
                raise
            return piece

    def remove_piece(self, corpus_id: str, piece_id: str) -> None:
        with self._lock(corpus_id):
            manifest = self._read_manifest(corpus_id)
            remaining = [p for p in manifest["pieces"] if p["id"] != piece_id]
            if len(remaining) == len(manifest["pieces"]):
                raise UnknownPiece(f"no piece {piece_id!r}", piece_id=piece_id)
            manifest["pieces"] = remaining
            manifest["modified_at"] = _now()
            self._write_manifest(corpus_id, manifest)
            (self._dir(corpus_id) / "pieces" / f"{piece_id}.mid").unlink(missing_ok=True)

    def save_corpus(self, corpus_id: str) -> None:
        """Mutations persist eagerly; saving re-validates and rewrites."""
        with self._lock(corpus_id):
            self._write_manifest(corpus_id, self._read_manifest(corpus_id))

    def manifest(self, corpus_id: str) -> dict:
        """Raw manifest document: corpus metadata plus piece metadata."""
        return self._read_manifest(corpus_id)

    def corpus_dir(self, corpus_id: str) -> Path:
        if not self._manifest_path(corpus_id).is_file():
            raise UnknownCorpus(f"no corpus {corpus_id!r}", corpus_id=corpus_id)
        return self._dir(corpus_id)

    def load_corpus(self, corpus_id: str) -> Corpus:
        manifest = self._read_manifest(corpus_id)
        pieces: dict[str, midi_io.Piece] = {}
        for meta in manifest["pieces"]:
            data = self.piece_bytes(corpus_id, meta["id"])
            pieces[meta["id"]] = midi_io.parse_smf(data, title=meta["title"],
                                                   piece_id=meta["id"])
        return Corpus(manifest["id"], manifest["name"], manifest["created_at"],
                      manifest["modified_at"], pieces)

    def piece_bytes(self, corpus_id: str, piece_id: str) -> bytes:
        if not self._manifest_path(corpus_id).is_file():
            raise UnknownCorpus(f"no corpus {corpus_id!r}", corpus_id=corpus_id)
        path = self._dir(corpus_id) / "pieces" / f"{piece_id}.mid"
        if not path.is_file():
            raise UnknownPiece(f"no piece {piece_id!r}", piece_id=piece_id)
        return path.read_bytes()

    def list_corpora(self) -> list[CorpusSummary]:
        summaries = [
            CorpusSummary(m["id"], m["name"], m["created_at"], m["modified_at"],
                          len(m["pieces"]))
            for m in self._iter_manifests()
        ]
        summaries.sort(key=lambda s: (s.created_at, s.id))
        return summaries

    def content_hash(self, corpus_id: str) -> str:
        manifest = self._read_manifest(corpus_id)
        joined = "\n".join(sorted(p["hash"] for p in manifest["pieces"]))
        return hashlib.sha256(joined.encode()).hexdigest()

    def _iter_manifests(self):
        if not self.root.is_dir():
            return
        for entry in sorted(self.root.iterdir()):
            manifest = entry / "manifest.json"
            if manifest.is_file():
                try:
                    yield json.loads(manifest.read_text())
                except (OSError, json.JSONDecodeError):
                    continue  # damaged corpora are skipped, not fatal
