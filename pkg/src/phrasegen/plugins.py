"""Discovery and invocation of external generative-model plugins.

A plugin is a subdirectory of the model storage folder containing a
``manifest.json`` with exactly the keys ``model_name``, ``entry``,
``train_params`` and ``generate_params``. Parameter definitions use the
seven-key JSON schema {default, desc, display_name, max, min, name, type}
that also drives GUI control rendering. The builtin model is exposed
through the identical mechanism so the UI has a single code path.

Invocation is file-based and language-neutral: the entry point is spawned
as ``<entry> <command> <input_path> <request.json> <output_dir>`` with a
wall-clock timeout, and success is judged by exit code 0 plus the expected
output layout (``phrase.mid`` for generate, ``state/`` for train).
Parameters are validated against the manifest before anything is spawned;
out-of-range values are an error, never clamped.
"""

from __future__ import annotations

import json
import logging
import os
import shutil
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import midi_io
from .errors import (
    BadPluginOutput,
    DuplicateName,
    MalformedJson,
    MissingKey,
    ParamOutOfRange,
    PluginCrashed,
    PluginTimeout,
    RangeViolation,
    StorageFailure,
    UnknownType,
)
from .generator import GenParams, MEASURES_RANGE

logger = logging.getLogger(__name__)

PARAM_SPEC_KEYS = {"default", "desc", "display_name", "max", "min", "name", "type"}
MANIFEST_KEYS = {"model_name", "entry", "train_params", "generate_params"}

BUILTIN_MODEL_NAME = "model1"
DEFAULT_TRAIN_TIMEOUT = 600.0
DEFAULT_GENERATE_TIMEOUT = 60.0

_STDERR_TAIL_BYTES = 2048


@dataclass(frozen=True)
class ParamSpec:
    name: str
    display_name: str
    desc: str
    type: str            # "float" or "int"
    min: float
    max: float
    default: float

    def to_dict(self) -> dict:
        return {"default": self.default, "desc": self.desc,
                "display_name": self.display_name, "max": self.max,
                "min": self.min, "name": self.name, "type": self.type}


@dataclass
class PluginManifest:
    model_name: str
    kind: str                                  # "builtin" | "external"
    entry: Path | None
    train_params: list[ParamSpec]
    generate_params: list[ParamSpec]
    plugin_dir: Path | None = None

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "kind": self.kind,
            "train_params": [s.to_dict() for s in self.train_params],
            "generate_params": [s.to_dict() for s in self.generate_params],
        }


@dataclass
class DiscoveryResult:
    manifests: list[PluginManifest]
    diagnostics: list[str] = field(default_factory=list)

    def by_name(self, model_name: str) -> PluginManifest | None:
        for manifest in self.manifests:
            if manifest.model_name == model_name:
                return manifest
        return None


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_integer(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_one_spec(obj) -> ParamSpec:
    if not isinstance(obj, dict):
        raise MalformedJson("parameter definition must be an object")
    name = obj.get("name")
    label = name if isinstance(name, str) and name else "<unnamed>"
    for key in sorted(PARAM_SPEC_KEYS):
        if key not in obj:
            raise MissingKey(f"parameter {label!r} lacks key {key!r}", key=key)
    unknown = set(obj) - PARAM_SPEC_KEYS
    if unknown:
        raise MalformedJson(
            f"parameter {label!r} has unknown key {sorted(unknown)[0]!r}",
            key=sorted(unknown)[0])
    if not isinstance(name, str) or not name:
        raise MalformedJson("parameter name must be a non-empty string")
    if not isinstance(obj["display_name"], str) or not isinstance(obj["desc"], str):
        raise MalformedJson(f"parameter {name!r}: desc and display_name must be strings")
    ptype = obj["type"]
    if ptype not in ("float", "int"):
        raise UnknownType(f"parameter {name!r} has unknown type {ptype!r}", name=name)
    lo, hi, default = obj["min"], obj["max"], obj["default"]
    if ptype == "int":
        if not all(_is_integer(v) for v in (lo, hi, default)):
            raise RangeViolation(f"parameter {name!r}: int bounds must be integers",
                                 name=name)
    else:
        if not all(_is_number(v) for v in (lo, hi, default)):
            raise RangeViolation(f"parameter {name!r}: bounds must be numbers",
                                 name=name)
    if not lo <= default <= hi:
        raise RangeViolation(
            f"parameter {name!r}: default {default} outside [{lo}, {hi}]", name=name)
    return ParamSpec(name=name, display_name=obj["display_name"], desc=obj["desc"],
                     type=ptype, min=lo, max=hi, default=default)


def parse_param_spec(json_text: str) -> list[ParamSpec]:
    """Parse one parameter object or a list of them from JSON text."""
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"invalid JSON: {exc}") from exc
    return parse_param_spec_list(doc)


def parse_param_spec_list(doc) -> list[ParamSpec]:
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list):
        raise MalformedJson("expected a parameter object or a list of them")
    specs = []
    seen = set()
    for obj in doc:
        spec = _parse_one_spec(obj)
        if spec.name in seen:
            raise DuplicateName(f"duplicate parameter name {spec.name!r}", name=spec.name)
        seen.add(spec.name)
        specs.append(spec)
    return specs


def validate_params(specs: list[ParamSpec], values: dict | None) -> dict:
    """Check names, types and ranges against the spec list; fill defaults.

    Raises before any plugin process is spawned; out-of-range errors rather
    than clamping so UI bugs stay visible.
    """
    values = dict(values or {})
    by_name = {spec.name: spec for spec in specs}
    unknown = set(values) - set(by_name)
    if unknown:
        raise ParamOutOfRange(f"unknown parameter {sorted(unknown)[0]!r}",
                              param=sorted(unknown)[0])
    validated = {}
    for spec in specs:
        if spec.name not in values:
            validated[spec.name] = spec.default
            continue
        value = values[spec.name]
        if spec.type == "int":
            if _is_integer(value) or (isinstance(value, float) and value.is_integer()):
                value = int(value)
            else:
                raise ParamOutOfRange(
                    f"parameter {spec.name!r} must be an integer", param=spec.name)
        else:
            if not _is_number(value):
                raise ParamOutOfRange(
                    f"parameter {spec.name!r} must be a number", param=spec.name)
            value = float(value)
        if not spec.min <= value <= spec.max:
            raise ParamOutOfRange(
                f"parameter {spec.name!r}={value} outside [{spec.min}, {spec.max}]",
                param=spec.name)
        validated[spec.name] = value
    return validated


# --- builtin manifest ---------------------------------------------------------

def builtin_model1_manifest() -> PluginManifest:
    defaults = GenParams()
    return PluginManifest(
        model_name=BUILTIN_MODEL_NAME,
        kind="builtin",
        entry=None,
        train_params=[
            ParamSpec(
                name="smoothing_alpha",
                display_name="Smoothing",
                desc="additive smoothing applied to every transition count",
                type="float", min=0, max=10, default=0.1),
        ],
        generate_params=[
            ParamSpec(
                name="melodic_typicality",
                display_name="Melodic Typicality",
                desc="mixture weight pulling pitch choices toward the trained"
                     " transitions (1) or uniform noise (0)",
                type="float", min=0, max=1, default=defaults.melodic_typicality),
            ParamSpec(
                name="harmonic_following",
                display_name="Harmonic Following",
                desc="mixture weight pulling each chord toward the trained"
                     " chord transitions (1) or a uniform draw (0)",
                type="float", min=0, max=1, default=defaults.harmonic_following),
            ParamSpec(
                name="num_measures",
                display_name="Number of Measures",
                desc="length of the generated phrase in measures",
                type="int", min=MEASURES_RANGE[0], max=MEASURES_RANGE[1],
                default=defaults.num_measures),
            ParamSpec(
                name="note_density",
                display_name="Note Density",
                desc="target notes per measure, mapped onto the corpus's"
                     " observed per-measure range",
                type="float", min=0, max=1, default=defaults.note_density),
        ],
    )


# --- discovery ------------------------------------------------------------------

def _load_external_manifest(plugin_dir: Path) -> PluginManifest:
    manifest_path = plugin_dir / "manifest.json"
    try:
        doc = json.loads(manifest_path.read_text())
    except OSError as exc:
        raise MalformedJson(f"cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"invalid manifest JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedJson("manifest must be a JSON object")
    missing = MANIFEST_KEYS - set(doc)
    if missing:
        raise MissingKey(f"manifest lacks key {sorted(missing)[0]!r}",
                         key=sorted(missing)[0])
    unknown = set(doc) - MANIFEST_KEYS
    if unknown:
        raise MalformedJson(f"manifest has unknown key {sorted(unknown)[0]!r}")
    model_name = doc["model_name"]
    if not isinstance(model_name, str) or not model_name:
        raise MalformedJson("model_name must be a non-empty string")
    entry_rel = doc["entry"]
    if not isinstance(entry_rel, str) or not entry_rel:
        raise MalformedJson("entry must be a non-empty relative path")
    entry = (plugin_dir / entry_rel).resolve()
    if plugin_dir.resolve() not in entry.parents:
        raise MalformedJson("entry must stay inside the plugin directory")
    if not entry.is_file():
        raise MalformedJson(f"entry point {entry_rel!r} does not exist")
    if entry.suffix != ".py" and not os.access(entry, os.X_OK):
        raise MalformedJson(f"entry point {entry_rel!r} is not executable")
    return PluginManifest(
        model_name=model_name,
        kind="external",
        entry=entry,
        train_params=parse_param_spec_list(doc["train_params"]),
        generate_params=parse_param_spec_list(doc["generate_params"]),
        plugin_dir=plugin_dir,
    )


def discover_models(model_storage: Path | str) -> DiscoveryResult:
    """Scan the storage folder; invalid plugin dirs are skipped with a
    diagnostic, never aborting discovery. The builtin model is always
    present and listed first."""
    manifests = [builtin_model1_manifest()]
    diagnostics: list[str] = []
    root = Path(model_storage)
    if not root.exists():
        return DiscoveryResult(manifests, diagnostics)
    try:
        subdirs = sorted(p for p in root.iterdir() if p.is_dir())
    except OSError as exc:
        raise StorageFailure(f"cannot read model storage: {exc}") from exc
    names = {BUILTIN_MODEL_NAME}
    for plugin_dir in subdirs:
        if not (plugin_dir / "manifest.json").is_file():
            continue
        try:
            manifest = _load_external_manifest(plugin_dir)
        except Exception as exc:  # any bad content: skip, record, continue
            diagnostics.append(f"{plugin_dir.name}: {exc}")
            logger.warning("skipping plugin %s: %s", plugin_dir.name, exc)
            continue
        if manifest.model_name in names:
            diagnostics.append(
                f"{plugin_dir.name}: duplicate model name {manifest.model_name!r}")
            continue
        names.add(manifest.model_name)
        manifests.append(manifest)
    return DiscoveryResult(manifests, diagnostics)


def ensure_builtin_plugins(model_storage: Path | str) -> None:
    """Materialize the shipped test plugin into the storage folder."""
    source = Path(__file__).parent / "builtin_plugins" / "musicvae"
    dest = Path(model_storage) / "musicvae"
    if dest.exists() or not source.is_dir():
        return
    shutil.copytree(source, dest)


# --- invocation -------------------------------------------------------------------

_inflight_guard = threading.Lock()
_inflight: dict[tuple[str, str], threading.Lock] = {}


def _invocation_lock(model_name: str, command: str) -> threading.Lock:
    with _inflight_guard:
        return _inflight.setdefault((model_name, command), threading.Lock())


def invoke_external(manifest: PluginManifest, command: str, input_path: Path | str,
                    params: dict | None, seed: int, output_dir: Path | str,
                    timeout: float | None = None) -> Path:
    """Run a plugin command; returns the result path (phrase.mid or state/).

    Spawns ``<entry> <command> <input_path> <request.json> <output_dir>``
    after validating params; enforces the timeout and captures a stderr
    tail for crash reports.
    """
    if command not in ("train", "generate"):
        raise ValueError(f"unknown plugin command {command!r}")
    if manifest.entry is None:
        raise ValueError("builtin models are not invoked through the plugin protocol")
    specs = manifest.train_params if command == "train" else manifest.generate_params
    validated = validate_params(specs, params)
    if timeout is None:
        timeout = DEFAULT_TRAIN_TIMEOUT if command == "train" else DEFAULT_GENERATE_TIMEOUT

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    request_path = output_dir / "request.json"
    request_path.write_text(json.dumps({"seed": seed, "params": validated},
                                       sort_keys=True))

    entry = manifest.entry
    argv = [sys.executable, str(entry)] if entry.suffix == ".py" else [str(entry)]
    argv += [command, str(input_path), str(request_path), str(output_dir)]

    with _invocation_lock(manifest.model_name, command):
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            raise PluginTimeout(
                f"{manifest.model_name} {command} exceeded {timeout:g}s",
                model=manifest.model_name, timeout=timeout) from None
        except OSError as exc:
            raise PluginCrashed(f"cannot spawn plugin: {exc}",
                                model=manifest.model_name) from exc

    if proc.returncode != 0:
        tail = proc.stderr[-_STDERR_TAIL_BYTES:].decode("utf-8", errors="replace")
        raise PluginCrashed(
            f"{manifest.model_name} {command} exited with {proc.returncode}",
            model=manifest.model_name, exit_code=proc.returncode, stderr_tail=tail)

    if command == "generate":
        phrase_path = output_dir / "phrase.mid"
        if not phrase_path.is_file():
            raise BadPluginOutput("plugin produced no phrase.mid",
                                  model=manifest.model_name)
        try:
            midi_io.parse_smf(phrase_path.read_bytes())
        except Exception as exc:
            raise BadPluginOutput(f"phrase.mid does not parse: {exc}",
                                  model=manifest.model_name) from exc
        return phrase_path
    state_path = output_dir / "state"
    if not state_path.is_dir():
        raise BadPluginOutput("plugin produced no state directory",
                              model=manifest.model_name)
    return state_path
