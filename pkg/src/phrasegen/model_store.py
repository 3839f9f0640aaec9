"""Persistence for trained models.

One JSON document per model at ``<root>/<model_id>.json``. Builtin style
models embed all matrices; externally trained plugin models store metadata
plus a pointer to their opaque state directory ``<model_id>.state/``.
Loading surfaces a staleness flag when the source corpus has been edited
(or deleted) since training.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from . import style_model
from .corpus import CorpusStore
from .errors import StorageFailure, UnknownCorpus, UnknownModel
from .style_model import StyleModel


@dataclass
class ExternalTrainedModel:
    model_id: str
    model_name: str
    corpus_id: str
    corpus_hash: str
    params: dict
    seed: int
    trained_at: str
    state_dir: Path
    stale: Optional[bool] = None


TrainedModel = Union[StyleModel, ExternalTrainedModel]


@dataclass
class TrainedSummary:
    model_id: str
    model_name: str
    kind: str
    corpus_id: str
    trained_at: str
    stale: Optional[bool]


class ModelStore:
    def __init__(self, root: Path | str, corpora: CorpusStore | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.corpora = corpora

    def _path(self, model_id: str) -> Path:
        return self.root / f"{model_id}.json"

    def save_model(self, model: StyleModel) -> None:
        try:
            self._path(model.model_id).write_text(style_model.serialize_model(model))
        except OSError as exc:
            raise StorageFailure(f"cannot write model: {exc}") from exc

    def save_external(self, record: ExternalTrainedModel, state_source: Path) -> None:
        """Adopt a plugin's state directory and persist the record."""
        state_dest = self.root / f"{record.model_id}.state"
        try:
            if state_dest.exists():
                shutil.rmtree(state_dest)
            shutil.move(str(state_source), str(state_dest))
            record.state_dir = state_dest
            doc = {
                "kind": "external",
                "model_name": record.model_name,
                "model_id": record.model_id,
                "corpus_id": record.corpus_id,
                "corpus_hash": record.corpus_hash,
                "params": record.params,
                "seed": record.seed,
                "trained_at": record.trained_at,
                "state_dir": state_dest.name,
            }
            self._path(record.model_id).write_text(json.dumps(doc, sort_keys=True, indent=1))
        except OSError as exc:
            raise StorageFailure(f"cannot store external model: {exc}") from exc

    def _staleness(self, corpus_id: str, corpus_hash: str) -> Optional[bool]:
        if self.corpora is None:
            return None
        try:
            return self.corpora.content_hash(corpus_id) != corpus_hash
        except UnknownCorpus:
            return True

    def load_model(self, model_id: str) -> TrainedModel:
        path = self._path(model_id)
        if not path.is_file():
            raise UnknownModel(f"no trained model {model_id!r}", model_id=model_id)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StorageFailure(f"unreadable model {model_id!r}: {exc}") from exc
        if doc.get("kind") == "external":
            return ExternalTrainedModel(
                model_id=doc["model_id"],
                model_name=doc["model_name"],
                corpus_id=doc["corpus_id"],
                corpus_hash=doc["corpus_hash"],
                params=doc["params"],
                seed=doc["seed"],
                trained_at=doc["trained_at"],
                state_dir=self.root / doc["state_dir"],
                stale=self._staleness(doc["corpus_id"], doc["corpus_hash"]),
            )
        model = style_model.model_from_dict(doc)
        model.stale = self._staleness(model.corpus_id, model.corpus_hash)
        return model

    def list_trained(self) -> list[TrainedSummary]:
        summaries = []
        for path in sorted(self.root.glob("*.json")):
            try:
                doc = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                continue
            summaries.append(TrainedSummary(
                model_id=doc["model_id"],
                model_name=doc.get("model_name", "model1"),
                kind=doc.get("kind", "builtin"),
                corpus_id=doc["corpus_id"],
                trained_at=doc["trained_at"],
                stale=self._staleness(doc["corpus_id"], doc["corpus_hash"]),
            ))
        summaries.sort(key=lambda s: (s.trained_at, s.model_id))
        return summaries
