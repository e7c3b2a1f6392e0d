"""Cache-aware execution of one job: load -> prefix -> label -> encode ->
train/optimize -> evaluate.

Three stages are content-addressed: the parsed split parts (loaded_log), the
encoded train/test matrices with their fitted encoder (labeled_matrix), and
the optimized model (trained_model).  Stage keys chain the upstream digests,
so any config change reaches exactly the stages it invalidates.

A per_length_up_to prefix spec trains one model per prefix length; each
length gets its own matrix, model, and report, all listed on the job result.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

from ..encoding import EncodingSpec, fit_encoder, encode_with_spec
from ..errors import ValidationError
from ..evaluation import evaluate_model
from ..eventlog import EventLog
from ..hpo import optimize
from ..labeling import apply_labels, resolve_threshold
from ..splitting import PrefixSpec, extract_prefixes
from ..util import digest_of
from .cache import ArtifactCache
from .jobs import JobConfig
from .store import Store


@dataclass(frozen=True)
class LabeledArtifact:
    """One encoded dataset pair plus the schema that produced it."""

    encoder: object
    train_matrix: object
    test_matrix: object
    threshold: float | None
    prefix: PrefixSpec
    encoding: EncodingSpec


def loaded_log_key(split_key: str, part: str) -> str:
    return digest_of(["loaded_log", split_key, part])


def labeled_matrix_key(
    split_key: str, prefix: PrefixSpec, label_dict: dict, encoding: EncodingSpec
) -> str:
    return digest_of(
        ["labeled_matrix", split_key, prefix.to_dict(), label_dict, encoding.to_dict()]
    )


def trained_model_key(matrix_key: str, model_dict: dict, optim_dict: dict) -> str:
    return digest_of(["trained_model", matrix_key, model_dict, optim_dict])


def config_fingerprint(
    split_key: str, prefix: PrefixSpec, label_dict: dict, encoding: EncodingSpec,
    model_dict: dict, optim_dict: dict,
) -> str:
    return digest_of(
        {
            "split_key": split_key,
            "prefix": prefix.to_dict(),
            "label": label_dict,
            "encoding": encoding.to_dict(),
            "model": model_dict,
            "optim": optim_dict,
        }
    )


def load_split_part(store: Store, cache: ArtifactCache, split_key: str, part: str) -> EventLog:
    return cache.get_or_build(
        "loaded_log",
        loaded_log_key(split_key, part),
        lambda: store.get_split_part(split_key, part),
    )


def _effective_slices(config: JobConfig) -> list[tuple[PrefixSpec, EncodingSpec, str]]:
    """(prefix spec, encoding spec, prefix descriptor) per model to train.

    The encoder window always matches the prefix window, so the configured
    encoding contributes method and intercase flag only.
    """
    method = config.encoding.method
    intercase = config.encoding.intercase
    p = config.prefix
    if p.mode == "per_length_up_to":
        return [
            (
                PrefixSpec(mode="fixed", length=k, short_traces=p.short_traces),
                EncodingSpec(method=method, padded_length=k, intercase=intercase),
                f"per_length:{k}",
            )
            for k in range(1, p.length + 1)
        ]
    encoding = EncodingSpec(method=method, padded_length=p.length, intercase=intercase)
    return [(p, encoding, f"{p.mode}:{p.length}")]


def _has_instances(log: EventLog, prefix: PrefixSpec) -> bool:
    if prefix.short_traces == "zero_pad":
        return len(log.traces) > 0
    return any(len(t.events) >= prefix.length for t in log.traces)


def build_labeled_artifact(
    train_log: EventLog,
    test_log: EventLog,
    prefix: PrefixSpec,
    label,
    encoding: EncodingSpec,
) -> LabeledArtifact:
    threshold = None
    if label.threshold == "log_mean":
        threshold = resolve_threshold(train_log, label)

    train_instances = extract_prefixes(train_log, prefix)
    test_instances = extract_prefixes(test_log, prefix)
    if not train_instances:
        raise ValidationError(
            f"no training instances at prefix {prefix.mode}:{prefix.length}"
            f" (short traces are {prefix.short_traces}ed)"
        )
    if not test_instances:
        raise ValidationError(
            f"no test instances at prefix {prefix.mode}:{prefix.length}"
            f" (short traces are {prefix.short_traces}ed)"
        )

    train_labeled = apply_labels(train_instances, train_log, label, threshold)
    test_labeled = apply_labels(test_instances, test_log, label, threshold)

    encoder = fit_encoder(encoding, train_labeled)
    train_matrix = encode_with_spec(encoder, train_labeled, log=train_log)
    test_matrix = encode_with_spec(encoder, test_labeled, log=test_log)
    return LabeledArtifact(
        encoder=encoder,
        train_matrix=train_matrix,
        test_matrix=test_matrix,
        threshold=threshold,
        prefix=prefix,
        encoding=encoding,
    )


def execute_job(store: Store, cache: ArtifactCache, job_id: str, config: JobConfig) -> list[dict]:
    """Run the pipeline for every slice of the job; returns result entries.

    Each entry carries the model fingerprint and report id persisted for the
    slice.  elapsed_total on a report is the cumulative job wall time when
    that slice's evaluation finished.
    """
    started = time.perf_counter()
    train_log = load_split_part(store, cache, config.split_key, "train")
    test_log = load_split_part(store, cache, config.split_key, "test")

    label_dict = config.label.to_dict()
    model_dict = config.model.to_dict()
    optim_dict = config.optim.to_dict()

    slices = _effective_slices(config)
    if config.prefix.mode == "per_length_up_to":
        # lengths no trace reaches train nothing; drop them rather than fail
        slices = [
            s for s in slices if _has_instances(train_log, s[0]) and _has_instances(test_log, s[0])
        ]
        if not slices:
            raise ValidationError(
                f"no prefix length up to {config.prefix.length} has instances in both parts"
            )

    entries: list[dict] = []
    for prefix, encoding, descriptor in slices:
        matrix_key = labeled_matrix_key(config.split_key, prefix, label_dict, encoding)
        artifact: LabeledArtifact = cache.get_or_build(
            "labeled_matrix",
            matrix_key,
            lambda p=prefix, e=encoding: build_labeled_artifact(
                train_log, test_log, p, config.label, e
            ),
        )

        fingerprint = config_fingerprint(
            config.split_key, prefix, label_dict, encoding, model_dict, optim_dict
        )
        model_key = trained_model_key(matrix_key, model_dict, optim_dict)
        outcome = cache.get_or_build(
            "trained_model",
            model_key,
            lambda a=artifact, fp=fingerprint: optimize(
                a.train_matrix,
                config.model,
                config.optim,
                encoder_ref=a.encoder.digest,
                config_fingerprint=fp,
            ),
        )
        model = outcome.model

        report = evaluate_model(
            model,
            artifact.test_matrix,
            elapsed_total=time.perf_counter() - started,
        )

        identity = config.task_identity or fingerprint[:12]
        if config.prefix.mode == "per_length_up_to":
            identity = f"{identity}@{prefix.length}"
        # persist the slice-effective config so explanations can rebuild
        # exactly this model's dataset later
        effective = JobConfig(
            split_key=config.split_key,
            prefix=prefix,
            label=config.label,
            encoding=encoding,
            model=config.model,
            optim=config.optim,
            task_identity=identity,
        )
        store.put_encoder(artifact.encoder)
        store.put_model(model, effective)
        report_id = digest_of({"report_of": fingerprint, "job": job_id})
        store.put_report(
            report_id,
            job_id,
            fingerprint,
            identity,
            config.model.algorithm,
            config.encoding.method,
            descriptor,
            config.model.family,
            report.to_dict(),
        )
        entries.append(
            {
                "prefix": descriptor,
                "prefix_length": prefix.length,
                "task_identity": identity,
                "model": fingerprint,
                "report": report_id,
                "trials": [t.to_dict() for t in outcome.trials],
                "best_trial": outcome.best.to_dict(),
            }
        )
    return entries
