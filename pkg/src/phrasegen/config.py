"""Runtime configuration: one JSON file plus environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .generator import DEFAULT_CONFIG, GenConfig

ENV_PREFIX = "PHRASEGEN_"


@dataclass
class ServiceConfig:
    data_dir: Path = Path("data")
    model_storage: Path | None = None      # defaults to <data_dir>/model_storage
    host: str = "127.0.0.1"
    port: int = 8400
    base_path: str = ""
    train_timeout: float = 600.0
    generate_timeout: float = 60.0
    generation: GenConfig = field(default_factory=lambda: DEFAULT_CONFIG)
    ui_dir: Path | None = None

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.model_storage is None:
            self.model_storage = self.data_dir / "model_storage"
        self.model_storage = Path(self.model_storage)
        if self.ui_dir is not None:
            self.ui_dir = Path(self.ui_dir)

    @classmethod
    def from_file(cls, path: Path | str) -> "ServiceConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "ServiceConfig":
        doc = dict(doc)
        generation = GenConfig.from_dict(doc.pop("generation", {}))
        known = set(cls.__dataclass_fields__) - {"generation"}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config key {sorted(unknown)[0]!r}")
        return cls(generation=generation, **doc)

    def apply_env(self, env=os.environ) -> "ServiceConfig":
        mapping = {
            "DATA_DIR": ("data_dir", Path),
            "MODEL_STORAGE": ("model_storage", Path),
            "HOST": ("host", str),
            "PORT": ("port", int),
            "BASE_PATH": ("base_path", str),
            "TRAIN_TIMEOUT": ("train_timeout", float),
            "GENERATE_TIMEOUT": ("generate_timeout", float),
            "UI_DIR": ("ui_dir", Path),
        }
        for suffix, (attr, cast) in mapping.items():
            raw = env.get(ENV_PREFIX + suffix)
            if raw is not None:
                try:
                    setattr(self, attr, cast(raw))
                except ValueError as exc:
                    raise ValidationError(
                        f"bad {ENV_PREFIX}{suffix} value {raw!r}") from exc
        return self


def load_config(path: Path | str | None = None, env=os.environ) -> ServiceConfig:
    config = ServiceConfig.from_file(path) if path else ServiceConfig()
    return config.apply_env(env)
