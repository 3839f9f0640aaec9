"""HTTP service exposing the browse / train / generate workflow.

JSON in and out except MIDI bytes (content type audio/midi). Every error
body is ``{code, message, detail}`` with a code from the closed
enumeration in errors.py. Training runs as background jobs polled through
/jobs/{id}; everything else is synchronous. The service keeps no state
besides the data directory: restarting it leaves all GETs identical.
"""

from __future__ import annotations

import logging
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import APIRouter, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .engine import Engine
from .plugins import validate_params
from .errors import EngineError, TrainingInProgress, UnknownJob

logger = logging.getLogger(__name__)


class CreateCorpusBody(BaseModel):
    name: str


class TrainBody(BaseModel):
    corpus_id: str
    params: dict = {}
    seed: Optional[int] = None


class GenerateBody(BaseModel):
    params: dict = {}
    parts: Optional[list[str]] = None
    seed: Optional[int] = None


@dataclass
class Job:
    job_id: str
    kind: str
    model_name: str
    state: str = "Queued"            # Queued | Running | Done | Failed
    progress: float = 0.0
    error: Optional[dict] = None
    result_model_id: Optional[str] = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def to_dict(self) -> dict:
        with self._lock:
            doc = {"job_id": self.job_id, "kind": self.kind,
                   "model_name": self.model_name, "state": self.state,
                   "progress": self.progress}
            if self.error is not None:
                doc["error"] = self.error
            if self.result_model_id is not None:
                doc["result_model_id"] = self.result_model_id
            return doc


class JobManager:
    """One background thread per job; at most one live train job per model."""

    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._guard = threading.Lock()

    def get(self, job_id: str) -> Job:
        job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no job {job_id!r}", job_id=job_id)
        return job

    def submit_train(self, model_name: str, runner) -> Job:
        with self._guard:
            for job in self._jobs.values():
                if job.model_name == model_name and job.state in ("Queued", "Running"):
                    raise TrainingInProgress(
                        f"training already running for {model_name!r}",
                        model_name=model_name, job_id=job.job_id)
            job = Job(job_id="j" + uuid.uuid4().hex[:12], kind="train",
                      model_name=model_name)
            self._jobs[job.job_id] = job

        def progress(fraction: float):
            with job._lock:
                job.progress = fraction

        def work():
            with job._lock:
                job.state = "Running"
            try:
                model_id = runner(progress)
            except EngineError as exc:
                logger.info("train job %s failed: %s", job.job_id, exc.message)
                with job._lock:
                    job.state = "Failed"
                    job.error = exc.to_dict()
            except Exception:
                logger.exception("train job %s crashed", job.job_id)
                with job._lock:
                    job.state = "Failed"
                    job.error = {"code": "internal_error",
                                 "message": "unexpected training failure", "detail": {}}
            else:
                with job._lock:
                    job.state = "Done"
                    job.progress = 1.0
                    job.result_model_id = model_id

        threading.Thread(target=work, name=f"train-{job.job_id}", daemon=True).start()
        return job


def create_app(config: ServiceConfig | None = None,
               engine: Engine | None = None) -> FastAPI:
    config = config or ServiceConfig()
    engine = engine or Engine(config)
    jobs = JobManager()
    app = FastAPI(title="phrasegen", version="0.1.0")
    base_path = config.base_path.strip("/")
    router = APIRouter(prefix=f"/{base_path}" if base_path else "")

    @app.exception_handler(EngineError)
    async def engine_error_handler(_request: Request, exc: EngineError):
        return JSONResponse(status_code=exc.http_status, content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "code": "validation_error", "message": "invalid request body",
            "detail": {"errors": exc.errors()}})

    # --- corpora -----------------------------------------------------------

    @router.get("/corpora")
    def list_corpora():
        return [vars(s) for s in engine.corpora.list_corpora()]

    @router.post("/corpora")
    def create_corpus(body: CreateCorpusBody):
        corpus = engine.corpora.create_corpus(body.name)
        return {"id": corpus.id, "name": corpus.name, "created_at": corpus.created_at,
                "modified_at": corpus.modified_at, "pieces": []}

    @router.get("/corpora/{corpus_id}")
    def corpus_detail(corpus_id: str):
        return engine.corpora.manifest(corpus_id)

    @router.post("/corpora/{corpus_id}/pieces")
    async def upload_piece(corpus_id: str, request: Request):
        data = await request.body()
        title = request.headers.get("x-filename", "").rsplit("/", 1)[-1]
        if title.lower().endswith(".mid") or title.lower().endswith(".midi"):
            title = title.rsplit(".", 1)[0]
        piece = engine.corpora.add_piece(corpus_id, data, title=title)
        return {"id": piece.id, "title": piece.title, "tempo_bpm": piece.tempo_bpm,
                "length_measures": piece.length_measures,
                "hash": piece.source_bytes_hash}

    @router.delete("/corpora/{corpus_id}/pieces/{piece_id}", status_code=204)
    def delete_piece(corpus_id: str, piece_id: str):
        engine.corpora.remove_piece(corpus_id, piece_id)
        return Response(status_code=204)

    @router.get("/corpora/{corpus_id}/pieces/{piece_id}.mid")
    def piece_midi(corpus_id: str, piece_id: str):
        return Response(content=engine.corpora.piece_bytes(corpus_id, piece_id),
                        media_type="audio/midi")

    # --- models / training ----------------------------------------------------

    @router.get("/models")
    def list_models():
        return [m.to_dict() for m in engine.list_models().manifests]

    @router.post("/models/{model_name}/train")
    def start_train(model_name: str, body: TrainBody):
        # validate before job creation: model, corpus, params
        manifest = engine.manifest_for(model_name)
        validate_params(manifest.train_params, body.params)
        engine.corpora.save_corpus(body.corpus_id)

        def runner(progress_cb):
            return engine.train(model_name, body.corpus_id, body.params,
                                seed=body.seed, progress_cb=progress_cb)

        job = jobs.submit_train(model_name, runner)
        return {"job_id": job.job_id}

    @router.get("/jobs/{job_id}")
    def job_status(job_id: str):
        return jobs.get(job_id).to_dict()

    @router.get("/trained")
    def trained():
        return engine.trained_summaries()

    # --- generation --------------------------------------------------------------

    @router.post("/trained/{model_id}/generate")
    def generate(model_id: str, body: GenerateBody):
        record = engine.generate(model_id, params=body.params, parts=body.parts,
                                 seed=body.seed)
        return record.meta

    @router.get("/phrases/{phrase_id}.mid")
    def phrase_midi(phrase_id: str):
        return Response(content=engine.phrase_bytes(phrase_id),
                        media_type="audio/midi")

    @router.get("/phrases/{phrase_id}.json")
    def phrase_meta(phrase_id: str):
        return engine.phrase_meta(phrase_id)

    app.include_router(router)

    if config.ui_dir and config.ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
