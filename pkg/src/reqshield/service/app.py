"""FastAPI service wrapping the pipeline.

Paths in requests are interpreted on the machine the service runs on; with
the CLI's default in-process transport that is the local filesystem. Errors
surface as a structured detail object carrying the pipeline stage, message,
and the process exit code the CLI should use.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import EXIT_DATA, NumericError, ReqShieldError, StageError
from ..pipeline import (
    eval_pipeline,
    load_artifact,
    score_pipeline,
    synth_pipeline,
    train_pipeline,
)
from .schemas import (
    EvalRequest,
    EvalResponse,
    HealthResponse,
    InlineScoreItem,
    InlineScoreRequest,
    InlineScoreResponse,
    ScoreRequest,
    ScoreResponse,
    SynthRequest,
    SynthResponse,
    TrainRequest,
    TrainResponse,
)


def _error_detail(exc: BaseException) -> dict:
    stage = exc.stage if isinstance(exc, StageError) else None
    cause = exc.cause if isinstance(exc, StageError) else exc
    exit_code = exc.exit_code if isinstance(exc, ReqShieldError) else EXIT_DATA
    return {
        "stage": stage,
        "kind": type(cause).__name__,
        "message": str(cause),
        "exit_code": exit_code,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="reqshield", version=__version__)

    @app.exception_handler(ReqShieldError)
    async def handle_reqshield_error(request: Request, exc: ReqShieldError):
        unwrapped = exc.cause if isinstance(exc, StageError) else exc
        status = 500 if isinstance(unwrapped, NumericError) else 400
        return JSONResponse(status_code=status, content={"detail": _error_detail(exc)})

    @app.exception_handler(OSError)
    async def handle_os_error(request: Request, exc: OSError):
        return JSONResponse(status_code=400, content={"detail": _error_detail(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/synth", response_model=SynthResponse)
    async def synth(req: SynthRequest) -> SynthResponse:
        counts = synth_pipeline(req.n_normal, req.n_attack, req.seed, req.out_dir)
        return SynthResponse(
            out_dir=req.out_dir,
            n_normal=counts["normal"],
            n_anomalous=counts["anomalous"],
        )

    @app.post("/train", response_model=TrainResponse)
    async def train(req: TrainRequest) -> TrainResponse:
        result = train_pipeline(req.dataset, req.out_dir, req.options.to_run_config())
        last = result.history.epochs[-1]
        val = None if math.isnan(last.val_mae) else last.val_mae
        return TrainResponse(
            artifact_dir=str(result.artifact_dir),
            epochs=len(result.history.epochs),
            final_train_mae=last.train_mae,
            final_val_mae=val,
            threshold=result.threshold,
            threshold_policy=result.policy.describe(),
            threshold_fallback_used=result.policy.fallback_used,
            n_train=result.n_train,
            n_held_out=result.n_held_out,
        )

    @app.post("/score", response_model=ScoreResponse)
    async def score(req: ScoreRequest) -> ScoreResponse:
        summary = score_pipeline(req.artifact_dir, req.dataset, req.out_path,
                                 req.dataset_format)
        return ScoreResponse(
            out_path=str(summary.out_path),
            n_scored=summary.n_scored,
            n_flagged=summary.n_flagged,
        )

    @app.post("/score/inline", response_model=InlineScoreResponse)
    async def score_inline(req: InlineScoreRequest) -> InlineScoreResponse:
        artifact = load_artifact(req.artifact_dir)
        results = [
            InlineScoreItem(mae=mae, verdict=verdict.value)
            for mae, verdict in artifact.score_texts(req.requests)
        ]
        return InlineScoreResponse(threshold=artifact.threshold, results=results)

    @app.post("/eval", response_model=EvalResponse)
    async def evaluate(req: EvalRequest) -> EvalResponse:
        result = eval_pipeline(
            req.artifact_dir,
            req.dataset,
            req.out_dir,
            dataset_format=req.dataset_format,
            bins=req.bins,
            apply_filter=req.filter_ambiguous,
        )
        cm = result.confusion
        return EvalResponse(
            confusion={"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn,
                       "total": cm.total},
            metrics=dict(result.report.values),
            metrics_display=result.report.display(),
            undefined=dict(result.report.undefined),
            outputs={k: str(v) for k, v in result.outputs.items()},
        )

    return app


app = create_app()
