"""Batch CLI mirroring the HTTP endpoints, plus a one-shot experiment verb.

Every verb routes through the same service facade as the API, so a request
document given to `submit` produces byte-identical job configs to a POST of
the same document.  Jobs execute inside the invoking process; `submit` and
`run-experiment` therefore wait for completion, while `serve` keeps a
long-lived process around for asynchronous submission over HTTP.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import WorkbenchError
from .gateway import TrainingRequest, expand_training_request, trace_from_document
from .orchestration import Service, ServiceConfig
from .reporting import render_report
from .synthetic import generate_log


def _service(ctx: click.Context, start_workers: bool) -> Service:
    params = ctx.obj
    config = ServiceConfig(
        storage_dir=Path(params["storage_dir"]),
        cache_dir=Path(params["cache_dir"] or Path(params["storage_dir"]) / "cache"),
        workers=params["workers"],
        port=params["port"],
    )
    return Service(config, start_workers=start_workers)


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _read_json_file(path: str) -> dict:
    return json.loads(Path(path).read_text())


@click.group()
@click.option("--storage-dir", envvar="PPMKIT_STORAGE_DIR", default="./ppmkit-data",
              show_default=True, help="Durable store location.")
@click.option("--cache-dir", envvar="PPMKIT_CACHE_DIR", default=None,
              help="Artifact cache location (default: <storage-dir>/cache).")
@click.option("--workers", envvar="PPMKIT_WORKERS", default=2, show_default=True,
              type=int, help="Worker thread count.")
@click.option("--port", envvar="PPMKIT_PORT", default=8077, show_default=True,
              type=int, help="HTTP listen port (serve only).")
@click.pass_context
def main(ctx, storage_dir, cache_dir, workers, port):
    """Predictive process monitoring workbench."""
    ctx.obj = {
        "storage_dir": storage_dir,
        "cache_dir": cache_dir,
        "workers": workers,
        "port": port,
    }


def _guard(fn):
    """Turn domain errors into clean CLI failures instead of tracebacks."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except WorkbenchError as exc:
            raise click.ClickException(str(exc)) from None
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_context
@_guard
def serve(ctx, host):
    """Run the HTTP API with this process's worker pool."""
    import uvicorn

    from .gateway import create_app

    service = _service(ctx, start_workers=True)
    app = create_app(service)
    try:
        uvicorn.run(app, host=host, port=service.config.port, log_level="warning")
    finally:
        service.shutdown()


@main.command("generate-log")
@click.option("--traces", default=400, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--noise", default=0.05, show_default=True, type=float)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_guard
def generate_log_cmd(traces, seed, noise, out):
    """Write a synthetic demo log with a planted outcome signal."""
    from .eventlog import serialize_xes

    log = generate_log(n_traces=traces, seed=seed, noise=noise)
    Path(out).write_bytes(serialize_xes(log))
    click.echo(f"wrote {traces} traces to {out}")


@main.command("upload-log")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@_guard
def upload_log(ctx, path):
    """Store an XES log; prints its id and stats."""
    service = _service(ctx, start_workers=False)
    try:
        record = service.upload_log(Path(path).read_bytes(), default_name=Path(path).stem)
        _echo_json(record)
    finally:
        service.shutdown()


@main.command()
@click.pass_context
@_guard
def logs(ctx):
    """List stored logs."""
    service = _service(ctx, start_workers=False)
    try:
        _echo_json(service.list_logs())
    finally:
        service.shutdown()


@main.command("log-stats")
@click.argument("log_id")
@click.pass_context
@_guard
def log_stats(ctx, log_id):
    """Print the stored stats of one log."""
    service = _service(ctx, start_workers=False)
    try:
        _echo_json(service.log_stats(log_id))
    finally:
        service.shutdown()


@main.command("create-split")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file: split spec fields plus optional filters.")
@click.pass_context
@_guard
def create_split(ctx, spec_path):
    """Cut a stored log into train/test parts."""
    payload = _read_json_file(spec_path)
    filters = payload.pop("filters", None)
    service = _service(ctx, start_workers=False)
    try:
        _echo_json(service.create_split(payload, filters))
    finally:
        service.shutdown()


@main.command()
@click.pass_context
@_guard
def splits(ctx):
    """List stored splits."""
    service = _service(ctx, start_workers=False)
    try:
        _echo_json(service.list_splits())
    finally:
        service.shutdown()


@main.command()
@click.option("--request", "request_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file with a training request document.")
@click.option("--timeout", default=3600.0, show_default=True, type=float)
@click.pass_context
@_guard
def submit(ctx, request_path, timeout):
    """Expand a training request, run every job, and wait for the results."""
    document = _read_json_file(request_path)
    request = TrainingRequest.from_dict(document)
    configs = expand_training_request(request)
    service = _service(ctx, start_workers=True)
    try:
        records = service.submit(configs)
        click.echo(f"queued {len(records)} jobs")
        done = service.wait([r.id for r in records], timeout=timeout)
        for record in done:
            line = f"{record.id}  {record.config.task_identity:40s}  {record.status}"
            if record.status == "error":
                line += f"  {record.error_detail}"
            click.echo(line)
        if any(r.status == "error" for r in done):
            sys.exit(1)
    finally:
        service.shutdown()


@main.command()
@click.option("--status", default=None, type=click.Choice(
    ["created", "queued", "running", "completed", "error"]))
@click.option("--split-key", default=None)
@click.pass_context
@_guard
def jobs(ctx, status, split_key):
    """List jobs, optionally filtered."""
    service = _service(ctx, start_workers=False)
    try:
        _echo_json([r.to_dict() for r in service.jobs(status=status, split_key=split_key)])
    finally:
        service.shutdown()


@main.command()
@click.argument("job_id")
@click.pass_context
@_guard
def job(ctx, job_id):
    """Show one job record."""
    service = _service(ctx, start_workers=False)
    try:
        _echo_json(service.job(job_id).to_dict())
    finally:
        service.shutdown()


@main.command()
@click.pass_context
@_guard
def results(ctx):
    """List stored evaluation reports."""
    service = _service(ctx, start_workers=False)
    try:
        rows = service.results()
        for row in rows:
            metrics = row["report"]["metrics"]
            shown = ", ".join(
                f"{k}={v:.4f}" for k, v in sorted(metrics.items()) if v is not None
            )
            click.echo(f"{row['id']}  {row['task_identity']:40s}  {shown}")
        if not rows:
            click.echo("no results yet")
    finally:
        service.shutdown()


@main.command()
@click.option("--ids", default=None,
              help="Comma-separated report ids (default: every report).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.pass_context
@_guard
def report(ctx, ids, out_dir):
    """Render the comparison table and charts into a directory."""
    wanted = [part for part in ids.split(",") if part] if ids else None
    service = _service(ctx, start_workers=False)
    try:
        view = service.comparison(wanted)
        written = render_report(view, out_dir)
        for name in sorted(written):
            click.echo(f"wrote {written[name]}")
    finally:
        service.shutdown()


@main.command()
@click.option("--model", "fingerprint", required=True)
@click.option("--trace-file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON trace document.")
@click.option("--explain", "with_explanation", is_flag=True, default=False)
@click.pass_context
@_guard
def predict(ctx, fingerprint, trace_file, with_explanation):
    """Predict one partial trace with a stored model."""
    trace = trace_from_document(_read_json_file(trace_file))
    service = _service(ctx, start_workers=False)
    try:
        _echo_json(service.predict(fingerprint, trace, with_explanation=with_explanation))
    finally:
        service.shutdown()


@main.command()
@click.option("--model", "fingerprint", required=True)
@click.option("--level", required=True, type=click.Choice(["event", "trace", "log"]))
@click.option("--trace-file", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--trace-id", default=None)
@click.option("--feature", default=None, help="Feature name (log level).")
@click.option("--part", default="test", show_default=True,
              type=click.Choice(["train", "test"]), help="Split part (log level).")
@click.option("--lengths", default=None, help="Comma-separated prefix lengths (trace level).")
@click.pass_context
@_guard
def explain(ctx, fingerprint, level, trace_file, trace_id, feature, part, lengths):
    """Explain a prediction at event, trace, or log level."""
    trace = trace_from_document(_read_json_file(trace_file)) if trace_file else None
    service = _service(ctx, start_workers=False)
    try:
        if level == "event":
            view = service.explain_event_for(fingerprint, trace=trace, trace_id=trace_id)
        elif level == "trace":
            parsed = [int(part_) for part_ in lengths.split(",")] if lengths else None
            view = service.explain_trace_for(
                fingerprint, trace=trace, trace_id=trace_id, lengths=parsed
            )
        else:
            if not feature:
                raise click.ClickException("log-level explanations need --feature")
            view = service.explain_log_for(fingerprint, feature, part=part)
        _echo_json(view.to_dict())
    finally:
        service.shutdown()


@main.command("run-experiment")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file: log source, split spec, training request, report dir.")
@click.option("--timeout", default=3600.0, show_default=True, type=float)
@click.pass_context
@_guard
def run_experiment(ctx, config_path, timeout):
    """Upload, split, train, and report in one shot."""
    from .eventlog import serialize_xes

    document = _read_json_file(config_path)
    service = _service(ctx, start_workers=True)
    try:
        log_source = document.get("log") or {}
        if "path" in log_source:
            data = Path(log_source["path"]).read_bytes()
        elif "synthetic" in log_source:
            opts = log_source["synthetic"] or {}
            data = serialize_xes(generate_log(
                n_traces=int(opts.get("traces", 400)),
                seed=int(opts.get("seed", 0)),
                noise=float(opts.get("noise", 0.05)),
            ))
        else:
            raise click.ClickException("config needs log.path or log.synthetic")
        log_record = service.upload_log(data)
        click.echo(f"log {log_record['id']} ({log_record['trace_count']} traces)")

        split_payload = dict(document.get("split") or {})
        split_payload.setdefault("name", "experiment")
        split_payload.setdefault("train_fraction", 0.75)
        split_payload["log_ref"] = log_record["id"]
        filters = split_payload.pop("filters", None)
        split = service.create_split(split_payload, filters)
        click.echo(f"split {split['split_key'][:12]} "
                   f"({split['train_traces']}/{split['test_traces']} traces)")

        request_doc = dict(document.get("request") or {})
        request_doc["split_key"] = split["split_key"]
        request = TrainingRequest.from_dict(request_doc)
        configs = expand_training_request(request)
        records = service.submit(configs)
        click.echo(f"queued {len(records)} jobs")
        done = service.wait([r.id for r in records], timeout=timeout)
        failed = [r for r in done if r.status == "error"]
        for record in done:
            line = f"  {record.config.task_identity:40s} {record.status}"
            if record.status == "error":
                line += f"  {record.error_detail}"
            click.echo(line)
        if failed:
            raise click.ClickException(f"{len(failed)} of {len(done)} jobs failed")

        report_ids = [
            entry["report"] for record in done for entry in record.result
        ]
        view = service.comparison(report_ids)
        out_dir = document.get("report_dir") or "ppmkit-report"
        written = render_report(view, out_dir)
        for name in sorted(written):
            click.echo(f"wrote {written[name]}")
    finally:
        service.shutdown()


if __name__ == "__main__":
    main()
