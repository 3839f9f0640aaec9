"""Corpus-based style imitation engine for symbolic music.

Workflow: build MIDI corpora, train a statistical style model on one, then
generate multi-part phrases steered by user-weighted constraints. External
generative models are hosted through a directory-plus-JSON plugin protocol,
and everything is reachable through an HTTP service and a CLI.
"""

__version__ = "0.1.0"

from .errors import EngineError
from .midi_io import NoteEvent, Part, Piece, parse_smf, write_smf

__all__ = [
    "EngineError",
    "NoteEvent",
    "Part",
    "Piece",
    "parse_smf",
    "write_smf",
    "__version__",
]
