"""Headless driver for the whole loop: corpora, training, generation, serve.

Every subcommand maps onto the same engine the HTTP service uses, so both
paths produce identical artifacts. Results print as JSON on stdout; errors
print as ``{code, message, detail}`` JSON on stderr with a nonzero exit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ServiceConfig, load_config
from .engine import Engine
from .errors import EngineError, ParamOutOfRange


def _parse_param_args(pairs: list[str] | None) -> dict:
    """--param k=v pairs; values parse as JSON scalars, else stay strings."""
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ParamOutOfRange(f"--param expects k=v, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


def _engine(args) -> Engine:
    return Engine(ServiceConfig(data_dir=Path(args.data_dir)))


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def cmd_corpus(args) -> None:
    engine = _engine(args)
    store = engine.corpora
    if args.corpus_cmd == "create":
        corpus = store.create_corpus(args.name)
        _emit({"id": corpus.id, "name": corpus.name})
    elif args.corpus_cmd == "add":
        results = []
        for path in args.files:
            data = Path(path).read_bytes()
            piece = store.add_piece(args.corpus_id, data, title=Path(path).stem)
            results.append({"id": piece.id, "title": piece.title,
                            "length_measures": piece.length_measures})
        _emit({"added": results})
    elif args.corpus_cmd == "remove":
        store.remove_piece(args.corpus_id, args.piece_id)
        _emit({"removed": args.piece_id})
    elif args.corpus_cmd == "list":
        _emit([vars(s) for s in store.list_corpora()])


def cmd_models(args) -> None:
    engine = _engine(args)
    result = engine.list_models()
    _emit({"models": [m.to_dict() for m in result.manifests],
           "diagnostics": result.diagnostics})


def cmd_train(args) -> None:
    engine = _engine(args)
    model_id = engine.train(args.model, args.corpus, _parse_param_args(args.param),
                            seed=args.seed)
    _emit({"model_id": model_id})


def cmd_trained(args) -> None:
    _emit(_engine(args).trained_summaries())


def cmd_generate(args) -> None:
    engine = _engine(args)
    parts = args.parts.split(",") if args.parts else None
    record = engine.generate(args.model_id, params=_parse_param_args(args.param),
                             parts=parts, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(record.midi_bytes)
    sidecar = out.with_suffix(".json")
    sidecar.write_text(json.dumps(record.meta, indent=1, sort_keys=True))
    _emit({"phrase_id": record.phrase_id, "seed": record.meta["seed"],
           "score": record.meta["score"], "chords": record.meta["chords"],
           "out": str(out), "meta": str(sidecar),
           "warnings": record.meta.get("warnings", [])})


def cmd_demo(args) -> None:
    from . import demo
    written = demo.export_demo_corpus(Path(args.out))
    _emit({"written": [str(p) for p in written]})


def cmd_serve(args) -> None:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    if args.data_dir != ".":
        config.data_dir = Path(args.data_dir)
        config.__post_init__()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phrasegen",
        description="corpus-based style imitation: build corpora, train "
                    "models, generate phrases")
    parser.add_argument("--data-dir", default="data",
                        help="engine data directory (default: ./data)")
    sub = parser.add_subparsers(dest="cmd", required=True)

    corpus = sub.add_parser("corpus", help="manage corpora")
    corpus_sub = corpus.add_subparsers(dest="corpus_cmd", required=True)
    create = corpus_sub.add_parser("create", help="create an empty corpus")
    create.add_argument("name")
    add = corpus_sub.add_parser("add", help="add MIDI files to a corpus")
    add.add_argument("corpus_id")
    add.add_argument("files", nargs="+")
    remove = corpus_sub.add_parser("remove", help="remove a piece")
    remove.add_argument("corpus_id")
    remove.add_argument("piece_id")
    corpus_sub.add_parser("list", help="list corpora")
    corpus.set_defaults(func=cmd_corpus)

    models = sub.add_parser("models", help="discovered models")
    models_sub = models.add_subparsers(dest="models_cmd", required=True)
    models_sub.add_parser("list", help="list model manifests")
    models.set_defaults(func=cmd_models)

    train = sub.add_parser("train", help="train a model on a corpus")
    train.add_argument("--model", required=True)
    train.add_argument("--corpus", required=True)
    train.add_argument("--param", action="append", metavar="K=V")
    train.add_argument("--seed", type=int, default=None)
    train.set_defaults(func=cmd_train)

    trained = sub.add_parser("trained", help="list trained models")
    trained.set_defaults(func=cmd_trained)

    generate = sub.add_parser("generate", help="generate a phrase")
    generate.add_argument("--model-id", required=True)
    generate.add_argument("--seed", type=int, default=None)
    generate.add_argument("--param", action="append", metavar="K=V")
    generate.add_argument("--parts", help="comma-separated subset of melody,bass,drums")
    generate.add_argument("--out", required=True, help="output .mid path")
    generate.set_defaults(func=cmd_generate)

    demo = sub.add_parser("demo", help="export the bundled demo corpus as files")
    demo.add_argument("--out", required=True)
    demo.set_defaults(func=cmd_demo)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", default=None, help="JSON config file")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except EngineError as exc:
        json.dump(exc.to_dict(), sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1
    except OSError as exc:
        json.dump({"code": "io_error", "message": str(exc), "detail": {}}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
