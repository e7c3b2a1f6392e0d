"""Service facade: one object owning the store, the cache, and the workers.

The HTTP gateway and the CLI both route through this class, so a config
submitted over either surface lands in the exact same code path and carries
identical semantics.  Nothing here knows about transport concerns.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path

from ..encoding import encode_with_spec
from ..errors import NotFoundError, ValidationError
from ..evaluation import (
    ComparisonEntry,
    ComparisonView,
    EvaluationReport,
    build_comparison,
    comparison_to_csv,
    metrics_for_family,
)
from ..eventlog import EventLog, Trace, compute_stats, parse_xes
from ..explain import (
    ExplanationView,
    explain_event,
    explain_log,
    explain_trace,
    prefix_of,
    sample_background,
)
from ..hpo import DEFAULT_METRICS
from ..labeling import LabeledInstance
from ..learners.base import predict
from ..splitting import (
    SplitSpec,
    extract_prefixes,
    filter_from_dict,
    filter_traces,
    split_log,
)
from .cache import ArtifactCache
from .jobs import JobConfig, JobRecord
from .pipeline import (
    LabeledArtifact,
    build_labeled_artifact,
    labeled_matrix_key,
    load_split_part,
)
from .store import Store
from .worker import WorkerPool

DEFAULT_PORT = 8077
DEFAULT_WORKERS = 2


@dataclass(frozen=True)
class ServiceConfig:
    storage_dir: Path
    cache_dir: Path
    workers: int = DEFAULT_WORKERS
    port: int = DEFAULT_PORT

    @staticmethod
    def from_env(environ=None) -> "ServiceConfig":
        env = os.environ if environ is None else environ
        storage = Path(env.get("PPMKIT_STORAGE_DIR", "./ppmkit-data"))
        cache = Path(env.get("PPMKIT_CACHE_DIR", str(storage / "cache")))
        return ServiceConfig(
            storage_dir=storage,
            cache_dir=cache,
            workers=int(env.get("PPMKIT_WORKERS", DEFAULT_WORKERS)),
            port=int(env.get("PPMKIT_PORT", DEFAULT_PORT)),
        )


def validate_job_config(store: Store, config: JobConfig) -> None:
    """Reject a config before anything about it is persisted.

    Structural validity is enforced by the spec dataclasses themselves;
    what remains is referential integrity and the metric/family pairing.
    """
    store.get_split_record(config.split_key)
    family = config.model.family
    metric = config.optim.metric or DEFAULT_METRICS[family]
    if metric not in metrics_for_family(family):
        raise ValidationError(f"metric {metric!r} is not valid for {family}")


class Service:
    def __init__(self, config: ServiceConfig, start_workers: bool = True):
        self.config = config
        self.store = Store(config.storage_dir)
        self.cache = ArtifactCache(self.store, config.cache_dir)
        self.pool = WorkerPool(
            self.store, self.cache, config.workers, autostart=start_workers
        )
        if start_workers:
            # the queue is in-memory: jobs a previous process queued but never
            # started would otherwise wait forever (running ones stay as they
            # are; interrupted work needs manual resubmission)
            for record in self.store.query_jobs(status="queued"):
                self.pool.submit(record.id)

    # -- logs -----------------------------------------------------------------

    def upload_log(self, data: bytes, default_name: str = "log") -> dict:
        """Parse, profile, and persist an event log; idempotent by content."""
        log = parse_xes(data, default_name=default_name)
        stats = compute_stats(log)
        self.store.put_log(log, stats.to_dict())
        return self.store.get_log_record(log.id)

    def list_logs(self) -> list[dict]:
        return self.store.list_logs()

    def log_record(self, log_id: str) -> dict:
        return self.store.get_log_record(log_id)

    def log_stats(self, log_id: str) -> dict:
        return self.store.get_log_record(log_id)["stats"]

    # -- splits ---------------------------------------------------------------

    def create_split(self, spec, filters: list | None = None) -> dict:
        """Filter (optionally), order, and cut one stored log into two parts.

        The split key covers the spec only, so two different filter sets over
        the same log must use different split names.
        """
        if isinstance(spec, dict):
            spec = SplitSpec.from_dict(spec)
        log = self.store.get_log(spec.log_ref)
        rules = [
            filter_from_dict(f) if isinstance(f, dict) else f for f in filters or []
        ]
        if rules:
            log = filter_traces(log, rules)
        if not log.traces:
            raise ValidationError("filters removed every trace; nothing to split")
        result = split_log(log, spec)
        self.store.put_split(spec, result.train, result.test)
        return self.store.get_split_record(spec.split_key)

    def list_splits(self) -> list[dict]:
        return self.store.list_splits()

    def split_record(self, split_key: str) -> dict:
        return self.store.get_split_record(split_key)

    # -- jobs -----------------------------------------------------------------

    def submit(self, configs: list[JobConfig]) -> list[JobRecord]:
        """Validate every config, then queue them all.

        Validation runs over the whole batch before the first job is
        persisted, so a bad entry anywhere leaves the store untouched.
        """
        if not configs:
            raise ValidationError("no job configs to submit")
        for config in configs:
            validate_job_config(self.store, config)
        records = []
        for config in configs:
            record = self.store.create_job(config)
            self.store.mark_queued(record.id)
            self.pool.submit(record.id)
            records.append(self.store.get_job(record.id))
        return records

    def jobs(self, status: str | None = None, split_key: str | None = None) -> list[JobRecord]:
        return self.store.query_jobs(status=status, split_key=split_key)

    def job(self, job_id: str) -> JobRecord:
        return self.store.get_job(job_id)

    def wait(self, job_ids: list[str], timeout: float | None = None,
             poll: float = 0.05) -> list[JobRecord]:
        """Block until every listed job is completed or errored."""
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            records = [self.store.get_job(j) for j in job_ids]
            if all(r.status in ("completed", "error") for r in records):
                return records
            if deadline is not None and time.monotonic() > deadline:
                pending = [r.id for r in records if r.status not in ("completed", "error")]
                raise TimeoutError(f"jobs still pending after {timeout}s: {pending}")
            time.sleep(poll)

    # -- results --------------------------------------------------------------

    def results(self, ids: list[str] | None = None) -> list[dict]:
        return self.store.list_reports(ids)

    def comparison(self, ids: list[str] | None = None) -> ComparisonView:
        rows = self.store.list_reports(ids)
        entries = [
            ComparisonEntry(
                task_identity=r["task_identity"],
                algorithm=r["algorithm"],
                encoding=r["encoding"],
                prefix=r["prefix"],
                report=EvaluationReport.from_dict(r["report"]),
                config={
                    "model_fingerprint": r["model_fingerprint"],
                    "job_id": r["job_id"],
                },
            )
            for r in rows
        ]
        return build_comparison(entries)

    def export_csv(self, ids: list[str] | None = None) -> str:
        return comparison_to_csv(self.comparison(ids))

    # -- prediction and explanation --------------------------------------------

    def _model_context(self, fingerprint: str):
        record = self.store.get_model_record(fingerprint)
        model = self.store.get_model(fingerprint)
        encoder = self.store.get_encoder(record["encoder_ref"])
        config = JobConfig.from_dict(record["config"])
        return model, encoder, config

    def _labeled(self, config: JobConfig) -> LabeledArtifact:
        """Rebuild (or fetch) the exact dataset a stored model trained on.

        Model records keep the slice-effective config, so the cache key here
        matches the one the training pipeline used and a warm cache serves
        the artifact without re-encoding anything.
        """
        train_log = load_split_part(self.store, self.cache, config.split_key, "train")
        test_log = load_split_part(self.store, self.cache, config.split_key, "test")
        key = labeled_matrix_key(
            config.split_key, config.prefix, config.label.to_dict(), config.encoding
        )
        return self.cache.get_or_build(
            "labeled_matrix",
            key,
            lambda: build_labeled_artifact(
                train_log, test_log, config.prefix, config.label, config.encoding
            ),
        )

    def _resolve_trace(self, config: JobConfig, trace: Trace | None,
                       trace_id: str | None) -> tuple[Trace, EventLog]:
        """One trace plus the log that provides its workload context.

        A trace given by id keeps the split part it lives in as context; an
        ad-hoc trace document stands alone, so its intercase features are
        genuine zeros (both workload columns exclude the instance's own
        case).
        """
        if (trace is None) == (trace_id is None):
            raise ValidationError("give exactly one of trace or trace_id")
        if trace is not None:
            return trace, EventLog(name="adhoc", traces=(trace,))
        for part in ("test", "train"):
            log = load_split_part(self.store, self.cache, config.split_key, part)
            found = log.trace(trace_id)
            if found is not None:
                return found, log
        raise NotFoundError(f"no trace {trace_id!r} in either part of the split")

    def _instance_for(self, config: JobConfig, trace: Trace,
                      prefix_length: int | None):
        pad = config.prefix.short_traces == "zero_pad"
        if prefix_length is not None:
            return prefix_of(trace, prefix_length, pad)
        k = config.prefix.length
        if config.prefix.mode == "up_to":
            # the model saw every prefix up to k, so use all available events
            k = min(k, len(trace.events))
            return prefix_of(trace, k, False)
        return prefix_of(trace, k, pad)

    def predict(self, fingerprint: str, trace: Trace, *,
                prefix_length: int | None = None,
                with_explanation: bool = False,
                permutations: int | None = None,
                seed: int = 0) -> dict:
        model, encoder, config = self._model_context(fingerprint)
        instance = self._instance_for(config, trace, prefix_length)
        context = EventLog(name="adhoc", traces=(trace,))
        matrix = encode_with_spec(
            encoder, [LabeledInstance(instance, "")],
            log=context if config.encoding.intercase else None,
        )
        prediction = predict(model, matrix)
        result = {
            "fingerprint": fingerprint,
            "trace_id": trace.id,
            "prefix_length": instance.prefix_length,
            "used_events": instance.real_length,
            "prediction": prediction.to_dict(),
        }
        if with_explanation:
            background = sample_background(self._labeled(config).train_matrix)
            view = explain_event(
                model, encoder, instance, background,
                log=context if config.encoding.intercase else None,
                permutations=permutations, seed=seed,
            )
            result["explanation"] = view.to_dict()
        return result

    def explain_event_for(self, fingerprint: str, *, trace: Trace | None = None,
                          trace_id: str | None = None,
                          prefix_length: int | None = None,
                          permutations: int | None = None,
                          seed: int = 0) -> ExplanationView:
        model, encoder, config = self._model_context(fingerprint)
        resolved, context = self._resolve_trace(config, trace, trace_id)
        instance = self._instance_for(config, resolved, prefix_length)
        background = sample_background(self._labeled(config).train_matrix)
        return explain_event(
            model, encoder, instance, background,
            log=context if config.encoding.intercase else None,
            permutations=permutations, seed=seed,
        )

    def explain_trace_for(self, fingerprint: str, *, trace: Trace | None = None,
                          trace_id: str | None = None,
                          lengths: list[int] | None = None,
                          permutations: int | None = None,
                          seed: int = 0) -> ExplanationView:
        model, encoder, config = self._model_context(fingerprint)
        resolved, context = self._resolve_trace(config, trace, trace_id)
        if lengths is None:
            lengths = list(range(1, min(len(resolved.events), config.prefix.length) + 1))
        background = sample_background(self._labeled(config).train_matrix)
        return explain_trace(
            model, encoder, resolved, lengths, background,
            pad_short=config.prefix.short_traces == "zero_pad",
            log=context if config.encoding.intercase else None,
            permutations=permutations, seed=seed,
        )

    def explain_log_for(self, fingerprint: str, feature: str,
                        part: str = "test") -> ExplanationView:
        model, encoder, config = self._model_context(fingerprint)
        log = load_split_part(self.store, self.cache, config.split_key, part)
        instances = extract_prefixes(log, config.prefix)
        if not instances:
            raise ValidationError(f"the {part} part has no instances at this prefix")
        return explain_log(
            model, encoder, instances, feature,
            log=log if config.encoding.intercase else None,
        )

    # -- housekeeping -----------------------------------------------------------

    def execution_counts(self) -> dict:
        return dict(self.pool.execution_counts)

    def cache_counters(self) -> dict:
        return {
            "hits": dict(self.cache.hit_counts),
            "builds": dict(self.cache.build_counts),
        }

    def shutdown(self) -> None:
        self.pool.stop()
        self.store.close()
