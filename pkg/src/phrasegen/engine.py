"""Facade tying the stores, trainer, generator and plugin host together.

The HTTP service and the CLI both drive this class, so the two paths
produce identical artifacts for identical inputs. All state lives under
one data directory:

    corpora/<corpus_id>/manifest.json + pieces/<piece_id>.mid
    models_trained/<model_id>.json (+ <model_id>.state/ for plugins)
    model_storage/<plugin>/manifest.json + entry point
    phrases/<phrase_id>.mid + <phrase_id>.json
"""

from __future__ import annotations

import hashlib
import json
import secrets
import shutil
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Optional

from . import generator, plugins, style_model
from .config import ServiceConfig
from .corpus import CorpusStore
from .errors import (
    EmptyCorpus,
    StorageFailure,
    UnknownModel,
    UnknownPhrase,
    ValidationError,
)
from .midi_io import Part, parse_smf, write_smf
from .model_store import ExternalTrainedModel, ModelStore
from .plugins import BUILTIN_MODEL_NAME
from .style_model import StyleModel

EXPORT_TEMPO_BPM = 120.0


@dataclass
class PhraseRecord:
    phrase_id: str
    meta: dict
    midi_bytes: bytes


def _notes_to_json(notes) -> list[dict]:
    return [{"pitch": n.pitch, "onset_step": n.onset, "duration_steps": n.duration,
             "velocity": n.velocity, "part": n.part.value} for n in notes]


def _parse_parts(parts: list[str] | None) -> tuple[Part, ...]:
    if parts is None:
        return (Part.MELODY, Part.BASS, Part.DRUMS)
    try:
        parsed = tuple(Part(p) for p in parts)
    except ValueError:
        raise ValidationError(
            f"unknown part in {parts!r}; expected melody/bass/drums") from None
    if not parsed:
        raise ValidationError("parts must not be empty")
    return parsed


class Engine:
    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        data = self.config.data_dir
        data.mkdir(parents=True, exist_ok=True)
        self.corpora = CorpusStore(data / "corpora")
        self.models = ModelStore(data / "models_trained", self.corpora)
        self.phrase_dir = data / "phrases"
        self.phrase_dir.mkdir(parents=True, exist_ok=True)
        self.config.model_storage.mkdir(parents=True, exist_ok=True)
        plugins.ensure_builtin_plugins(self.config.model_storage)

    # --- models ------------------------------------------------------------

    def list_models(self) -> plugins.DiscoveryResult:
        return plugins.discover_models(self.config.model_storage)

    def manifest_for(self, model_name: str) -> plugins.PluginManifest:
        manifest = self.list_models().by_name(model_name)
        if manifest is None:
            raise UnknownModel(f"no model named {model_name!r}", model_name=model_name)
        return manifest

    # --- training ----------------------------------------------------------

    def train(self, model_name: str, corpus_id: str, params: dict | None = None,
              seed: int | None = None,
              progress_cb: Optional[Callable[[float], None]] = None) -> str:
        """Synchronous train; returns the trained model id. The service runs
        this inside a background job."""
        manifest = self.manifest_for(model_name)
        validated = plugins.validate_params(manifest.train_params, params)
        self.corpora.save_corpus(corpus_id)  # existence check
        if manifest.kind == "builtin":
            corpus = self.corpora.load_corpus(corpus_id)
            model = style_model.train(corpus, validated, progress_cb=progress_cb)
            self.models.save_model(model)
            return model.model_id
        return self._train_external(manifest, corpus_id, validated,
                                    0 if seed is None else seed, progress_cb)

    def _train_external(self, manifest, corpus_id, params, seed, progress_cb) -> str:
        corpus_hash = self.corpora.content_hash(corpus_id)
        if not self.corpora.load_corpus(corpus_id).pieces:
            raise EmptyCorpus(f"corpus {corpus_id!r} has no pieces", corpus_id=corpus_id)
        fingerprint = hashlib.sha256(
            f"{corpus_hash}:{manifest.model_name}:{sorted(params.items())!r}:{seed}"
            .encode()).hexdigest()
        model_id = "m" + fingerprint[:12]
        workdir = self.config.data_dir / "tmp" / f"train-{model_id}-{uuid.uuid4().hex[:6]}"
        if progress_cb:
            progress_cb(0.1)
        try:
            state = plugins.invoke_external(
                manifest, "train", self.corpora.corpus_dir(corpus_id), params, seed,
                workdir, timeout=self.config.train_timeout)
            record = ExternalTrainedModel(
                model_id=model_id,
                model_name=manifest.model_name,
                corpus_id=corpus_id,
                corpus_hash=corpus_hash,
                params=params,
                seed=seed,
                trained_at=datetime.now(timezone.utc).isoformat(timespec="microseconds"),
                state_dir=state,
            )
            self.models.save_external(record, state)
        finally:
            shutil.rmtree(workdir, ignore_errors=True)
        if progress_cb:
            progress_cb(1.0)
        return model_id

    def trained_summaries(self) -> list[dict]:
        return [{"model_id": s.model_id, "model_name": s.model_name, "kind": s.kind,
                 "corpus_id": s.corpus_id, "trained_at": s.trained_at,
                 "stale": s.stale} for s in self.models.list_trained()]

    # --- generation ----------------------------------------------------------

    def generate(self, model_id: str, params: dict | None = None,
                 parts: list[str] | None = None,
                 seed: int | None = None) -> PhraseRecord:
        trained = self.models.load_model(model_id)
        if seed is None:
            seed = secrets.randbits(64)
        if isinstance(trained, StyleModel):
            record = self._generate_builtin(trained, params, parts, seed)
        else:
            record = self._generate_external(trained, params, parts, seed)
        if trained.stale:
            record.meta.setdefault("warnings", []).append(
                "corpus_modified_since_training")
        self._persist_phrase(record)
        return record

    def _generate_builtin(self, model: StyleModel, params, parts, seed) -> PhraseRecord:
        manifest = plugins.builtin_model1_manifest()
        validated = plugins.validate_params(manifest.generate_params, params)
        request = generator.PhraseRequest(
            model_id=model.model_id,
            seed=seed,
            params=generator.GenParams(**validated),
            parts=_parse_parts(parts),
        )
        phrase = generator.generate(model, request, self.config.generation)
        midi = write_smf(phrase.notes, EXPORT_TEMPO_BPM)
        meta = {
            "phrase_id": "p" + uuid.uuid4().hex[:12],
            "model_id": model.model_id,
            "model_name": BUILTIN_MODEL_NAME,
            "seed": seed,
            "params": validated,
            "parts": [p.value for p in request.parts],
            "score": phrase.score,
            "chords": phrase.chords,
            "warnings": list(phrase.warnings),
            "tempo_bpm": EXPORT_TEMPO_BPM,
            "notes": _notes_to_json(phrase.notes),
        }
        return PhraseRecord(meta["phrase_id"], meta, midi)

    def _generate_external(self, trained: ExternalTrainedModel, params, parts,
                           seed) -> PhraseRecord:
        if parts is not None:
            raise ValidationError("part selection applies to builtin models only")
        manifest = self.manifest_for(trained.model_name)
        workdir = self.config.data_dir / "tmp" / f"gen-{uuid.uuid4().hex[:8]}"
        try:
            phrase_path = plugins.invoke_external(
                manifest, "generate", trained.state_dir, params, seed, workdir,
                timeout=self.config.generate_timeout)
            midi = phrase_path.read_bytes()
        finally:
            shutil.rmtree(workdir, ignore_errors=True)
        piece = parse_smf(midi)
        validated = plugins.validate_params(manifest.generate_params, params)
        meta = {
            "phrase_id": "p" + uuid.uuid4().hex[:12],
            "model_id": trained.model_id,
            "model_name": trained.model_name,
            "seed": seed,
            "params": validated,
            "parts": sorted({n.part.value for n in piece.notes}),
            "score": 0.0,
            "chords": ["N"] * piece.length_measures,  # plugins carry no harmony
            "warnings": [],
            "tempo_bpm": piece.tempo_bpm,
            "notes": _notes_to_json(piece.notes),
        }
        return PhraseRecord(meta["phrase_id"], meta, midi)

    def _persist_phrase(self, record: PhraseRecord) -> None:
        try:
            (self.phrase_dir / f"{record.phrase_id}.mid").write_bytes(record.midi_bytes)
            (self.phrase_dir / f"{record.phrase_id}.json").write_text(
                json.dumps(record.meta, indent=1, sort_keys=True))
        except OSError as exc:
            raise StorageFailure(f"cannot persist phrase: {exc}") from exc

    def phrase_bytes(self, phrase_id: str) -> bytes:
        path = self.phrase_dir / f"{phrase_id}.mid"
        if not path.is_file():
            raise UnknownPhrase(f"no phrase {phrase_id!r}", phrase_id=phrase_id)
        return path.read_bytes()

    def phrase_meta(self, phrase_id: str) -> dict:
        path = self.phrase_dir / f"{phrase_id}.json"
        if not path.is_file():
            raise UnknownPhrase(f"no phrase {phrase_id!r}", phrase_id=phrase_id)
        return json.loads(path.read_text())
