"""Exception hierarchy shared by every layer.

Each error carries a stable machine-readable ``code`` (the closed enumeration
surfaced by the HTTP API and the CLI) and the HTTP status it maps to.
"""

from __future__ import annotations

from typing import Any


class EngineError(Exception):
    """Base class for all expected failures."""

    code = "engine_error"
    http_status = 500

    def __init__(self, message: str = "", **detail: Any):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


# --- MIDI parsing / serialization ---

class MalformedFile(EngineError):
    code = "malformed_file"
    http_status = 422


class UnsupportedFormat(EngineError):
    code = "unsupported_format"
    http_status = 422


class EmptyPiece(EngineError):
    code = "empty_piece"
    http_status = 422


class EmptyPhrase(EngineError):
    code = "empty_phrase"
    http_status = 400


# --- corpus management ---

class InvalidName(EngineError):
    code = "invalid_name"
    http_status = 400


class DuplicateName(EngineError):
    # also raised for duplicate parameter names in plugin manifests
    code = "duplicate_name"
    http_status = 409


class UnknownCorpus(EngineError):
    code = "unknown_corpus"
    http_status = 404


class UnknownPiece(EngineError):
    code = "unknown_piece"
    http_status = 404


class DuplicatePiece(EngineError):
    code = "duplicate_piece"
    http_status = 409


class StorageFailure(EngineError):
    code = "storage_failure"
    http_status = 500


# --- training ---

class EmptyCorpus(EngineError):
    code = "empty_corpus"
    http_status = 400


class EmptyPart(EngineError):
    code = "empty_part"
    http_status = 400


class SingleNote(EngineError):
    code = "single_note"
    http_status = 400


class UnknownModel(EngineError):
    code = "unknown_model"
    http_status = 404


class TrainingInProgress(EngineError):
    code = "training_in_progress"
    http_status = 409


# --- generation ---

class UntrainedPart(EngineError):
    code = "untrained_part"
    http_status = 400


class UnknownPhrase(EngineError):
    code = "unknown_phrase"
    http_status = 404


class UnknownJob(EngineError):
    code = "unknown_job"
    http_status = 404


# --- plugin protocol ---

class MalformedJson(EngineError):
    code = "malformed_json"
    http_status = 400


class MissingKey(EngineError):
    code = "missing_key"
    http_status = 400


class RangeViolation(EngineError):
    code = "range_violation"
    http_status = 400


class UnknownType(EngineError):
    code = "unknown_type"
    http_status = 400


class ParamOutOfRange(EngineError):
    code = "param_out_of_range"
    http_status = 400


class PluginCrashed(EngineError):
    code = "plugin_crashed"
    http_status = 502


class PluginTimeout(EngineError):
    code = "plugin_timeout"
    http_status = 502


class BadPluginOutput(EngineError):
    code = "bad_plugin_output"
    http_status = 502


class ValidationError(EngineError):
    code = "validation_error"
    http_status = 400
