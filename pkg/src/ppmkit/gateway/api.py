"""HTTP surface: a thin, stateless layer over the service facade.

Handlers parse wire documents, call the facade, and serialize the result.
No handler blocks on job completion; clients poll job status.  Every
non-success response is an ApiError document: {code, message, detail}.
"""
from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from ..errors import NotFoundError, ParseError, ValidationError, WorkbenchError
from ..orchestration import Service
from .requests import TrainingRequest, expand_training_request, trace_from_document

API_PREFIX = "/v1"


def _error_payload(code: str, exc: Exception, detail=None) -> dict:
    return {"code": code, "message": str(exc), "detail": detail}


def _status_and_code(exc: WorkbenchError) -> tuple[int, str]:
    if isinstance(exc, NotFoundError):
        return 404, "not_found"
    if isinstance(exc, ParseError):
        return 400, "parse_error"
    if isinstance(exc, ValidationError):
        return 400, "validation_error"
    return 500, "internal_error"


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="ppmkit", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(WorkbenchError)
    async def workbench_error(request: Request, exc: WorkbenchError):
        status, code = _status_and_code(exc)
        return JSONResponse(status_code=status, content=_error_payload(code, exc))

    @app.get(f"{API_PREFIX}/health")
    async def health():
        return {"status": "ok", "workers": len(service.pool.alive_workers())}

    # -- logs -------------------------------------------------------------------

    @app.post(f"{API_PREFIX}/logs", status_code=201)
    async def upload_log(request: Request, name: str = Query("log")):
        body = await request.body()
        if not body:
            raise ValidationError("request body must carry an XES document")
        return service.upload_log(body, default_name=name)

    @app.get(f"{API_PREFIX}/logs")
    async def list_logs():
        return service.list_logs()

    @app.get(f"{API_PREFIX}/logs/{{log_id}}/stats")
    async def log_stats(log_id: str):
        return service.log_stats(log_id)

    # -- splits -----------------------------------------------------------------

    @app.post(f"{API_PREFIX}/splits", status_code=201)
    async def create_split(request: Request):
        payload = await _json_body(request)
        filters = payload.pop("filters", None)
        return service.create_split(payload, filters)

    @app.get(f"{API_PREFIX}/splits")
    async def list_splits():
        return service.list_splits()

    # -- jobs -------------------------------------------------------------------

    @app.post(f"{API_PREFIX}/jobs", status_code=201)
    async def submit_jobs(request: Request):
        payload = await _json_body(request)
        training = TrainingRequest.from_dict(payload)
        configs = expand_training_request(training)
        records = service.submit(configs)
        return {
            "jobs": [
                {"id": r.id, "task_identity": r.config.task_identity, "status": r.status}
                for r in records
            ]
        }

    @app.get(f"{API_PREFIX}/jobs")
    async def list_jobs(status: str | None = None, split_key: str | None = None):
        return [r.to_dict() for r in service.jobs(status=status, split_key=split_key)]

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    async def get_job(job_id: str):
        return service.job(job_id).to_dict()

    # -- results ----------------------------------------------------------------

    @app.get(f"{API_PREFIX}/results")
    async def list_results():
        return service.results()

    @app.get(f"{API_PREFIX}/results/comparison")
    async def comparison(ids: str = Query(...)):
        wanted = [part for part in ids.split(",") if part]
        if not wanted:
            raise ValidationError("ids must name at least one report")
        return service.comparison(wanted).to_dict()

    @app.get(f"{API_PREFIX}/results/export.csv")
    async def export_csv(ids: str | None = None):
        wanted = [part for part in ids.split(",") if part] if ids else None
        return PlainTextResponse(
            service.export_csv(wanted), media_type="text/csv"
        )

    # -- predictions and explanations ---------------------------------------------

    @app.post(f"{API_PREFIX}/models/{{fingerprint}}/predict")
    async def predict(fingerprint: str, request: Request):
        payload = await _json_body(request)
        if "trace" not in payload:
            raise ValidationError("body must carry a trace document")
        trace = trace_from_document(payload["trace"])
        return service.predict(
            fingerprint,
            trace,
            prefix_length=payload.get("prefix_length"),
            with_explanation=bool(payload.get("with_explanation", False)),
            permutations=payload.get("permutations"),
            seed=int(payload.get("seed", 0)),
        )

    @app.post(f"{API_PREFIX}/explanations")
    async def explanations(request: Request):
        payload = await _json_body(request)
        level = payload.get("level")
        fingerprint = payload.get("model")
        if not fingerprint:
            raise ValidationError("body must name a model fingerprint")
        trace = payload.get("trace")
        trace = trace_from_document(trace) if trace is not None else None
        trace_id = payload.get("trace_id")
        if level == "event":
            view = service.explain_event_for(
                fingerprint,
                trace=trace,
                trace_id=trace_id,
                prefix_length=payload.get("prefix_length"),
                permutations=payload.get("permutations"),
                seed=int(payload.get("seed", 0)),
            )
        elif level == "trace":
            view = service.explain_trace_for(
                fingerprint,
                trace=trace,
                trace_id=trace_id,
                lengths=payload.get("lengths"),
                permutations=payload.get("permutations"),
                seed=int(payload.get("seed", 0)),
            )
        elif level == "log":
            feature = payload.get("feature")
            if not feature:
                raise ValidationError("log-level explanations need a feature name")
            view = service.explain_log_for(
                fingerprint, feature, part=payload.get("part", "test")
            )
        else:
            raise ValidationError(f"unknown explanation level {level!r}")
        return view.to_dict()

    return app


async def _json_body(request: Request) -> dict:
    try:
        payload = await request.json()
    except Exception:
        raise ValidationError("request body must be a JSON object") from None
    if not isinstance(payload, dict):
        raise ValidationError("request body must be a JSON object")
    return payload


def create_app_from_env() -> FastAPI:
    """App wired from environment settings; used by `uvicorn` deployment."""
    from ..orchestration import ServiceConfig

    return create_app(Service(ServiceConfig.from_env()))
