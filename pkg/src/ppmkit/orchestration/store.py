"""Durable single-node object store over sqlite plus a digest-addressed
file area for bulky artifacts (XES documents, encoders, models).

sqlite runs in WAL mode with per-thread connections; writes are short
transactions, so worker threads interleave safely.
"""
from __future__ import annotations

import json
import os
import pickle
import sqlite3
import threading
import time
from pathlib import Path

from ..errors import NotFoundError, ValidationError, WorkbenchError
from ..eventlog import EventLog, parse_xes, serialize_xes
from ..learners import TrainedModel, load_model, save_model
from ..splitting import SplitSpec
from .jobs import TRANSITIONS, JobConfig, JobRecord, new_job_id

_SCHEMA = """
CREATE TABLE IF NOT EXISTS logs (
  id TEXT PRIMARY KEY,
  name TEXT NOT NULL,
  location TEXT NOT NULL,
  stats_json TEXT NOT NULL,
  trace_count INTEGER NOT NULL,
  event_count INTEGER NOT NULL,
  created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS splits (
  split_key TEXT PRIMARY KEY,
  log_ref TEXT NOT NULL REFERENCES logs(id),
  name TEXT NOT NULL,
  spec_json TEXT NOT NULL,
  train_location TEXT NOT NULL,
  test_location TEXT NOT NULL,
  train_traces INTEGER NOT NULL,
  test_traces INTEGER NOT NULL,
  created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS jobs (
  id TEXT PRIMARY KEY,
  status TEXT NOT NULL,
  split_key TEXT NOT NULL REFERENCES splits(split_key),
  config_json TEXT NOT NULL,
  task_identity TEXT NOT NULL,
  result_json TEXT,
  error_detail TEXT,
  created_at REAL NOT NULL,
  queued_at REAL,
  started_at REAL,
  finished_at REAL
);
CREATE TABLE IF NOT EXISTS encoders (
  digest TEXT PRIMARY KEY,
  location TEXT NOT NULL,
  created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS models (
  fingerprint TEXT PRIMARY KEY,
  location TEXT NOT NULL,
  encoder_ref TEXT NOT NULL REFERENCES encoders(digest),
  config_json TEXT NOT NULL,
  family TEXT NOT NULL,
  algorithm TEXT NOT NULL,
  created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS reports (
  id TEXT PRIMARY KEY,
  job_id TEXT NOT NULL REFERENCES jobs(id),
  model_fingerprint TEXT NOT NULL REFERENCES models(fingerprint),
  task_identity TEXT NOT NULL,
  algorithm TEXT NOT NULL,
  encoding TEXT NOT NULL,
  prefix TEXT NOT NULL,
  family TEXT NOT NULL,
  report_json TEXT NOT NULL,
  created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS cache (
  key TEXT PRIMARY KEY,
  kind TEXT NOT NULL,
  state TEXT NOT NULL,
  location TEXT,
  created_at REAL NOT NULL
);
"""


class Store:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.artifacts = self.directory / "artifacts"
        self.artifacts.mkdir(exist_ok=True)
        self._db_path = self.directory / "store.db"
        self._local = threading.local()
        with self._connection() as conn:
            conn.executescript(_SCHEMA)

    # -- connection management -------------------------------------------

    def _connection(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(self._db_path, timeout=30.0)
            conn.row_factory = sqlite3.Row
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA foreign_keys=ON")
            conn.execute("PRAGMA busy_timeout=30000")
            self._local.conn = conn
        return conn

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None

    def _write_artifact(self, name: str, data: bytes) -> str:
        """Atomic write; the digest-derived name makes rewrites idempotent."""
        path = self.artifacts / name
        if path.exists():
            return str(path)
        tmp = path.parent / f"{path.name}.tmp{os.getpid()}.{threading.get_ident()}"
        tmp.write_bytes(data)
        tmp.replace(path)
        return str(path)

    # -- logs ---------------------------------------------------------------

    def put_log(self, log: EventLog, stats: dict) -> str:
        data = serialize_xes(log)
        location = self._write_artifact(f"{log.id}.xes", data)
        with self._connection() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO logs"
                " (id, name, location, stats_json, trace_count, event_count, created_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    log.id,
                    log.name,
                    location,
                    json.dumps(stats),
                    len(log.traces),
                    log.event_count,
                    time.time(),
                ),
            )
        return log.id

    def get_log(self, log_id: str) -> EventLog:
        row = self._one("SELECT * FROM logs WHERE id = ?", (log_id,))
        if row is None:
            raise NotFoundError(f"no log {log_id!r}")
        return parse_xes(Path(row["location"]).read_bytes())

    def get_log_record(self, log_id: str) -> dict:
        row = self._one("SELECT * FROM logs WHERE id = ?", (log_id,))
        if row is None:
            raise NotFoundError(f"no log {log_id!r}")
        return {
            "id": row["id"],
            "name": row["name"],
            "trace_count": row["trace_count"],
            "event_count": row["event_count"],
            "stats": json.loads(row["stats_json"]),
        }

    def list_logs(self) -> list[dict]:
        rows = self._all("SELECT * FROM logs ORDER BY created_at DESC, id")
        return [
            {
                "id": r["id"],
                "name": r["name"],
                "trace_count": r["trace_count"],
                "event_count": r["event_count"],
            }
            for r in rows
        ]

    # -- splits ---------------------------------------------------------------

    def put_split(self, spec: SplitSpec, train: EventLog, test: EventLog) -> str:
        if self._one("SELECT id FROM logs WHERE id = ?", (spec.log_ref,)) is None:
            raise NotFoundError(f"no log {spec.log_ref!r}")
        key = spec.split_key
        train_loc = self._write_artifact(f"{key}.train.xes", serialize_xes(train))
        test_loc = self._write_artifact(f"{key}.test.xes", serialize_xes(test))
        with self._connection() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO splits"
                " (split_key, log_ref, name, spec_json, train_location, test_location,"
                "  train_traces, test_traces, created_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    key,
                    spec.log_ref,
                    spec.name,
                    json.dumps(spec.to_dict()),
                    train_loc,
                    test_loc,
                    len(train.traces),
                    len(test.traces),
                    time.time(),
                ),
            )
        return key

    def get_split_record(self, split_key: str) -> dict:
        row = self._one("SELECT * FROM splits WHERE split_key = ?", (split_key,))
        if row is None:
            raise NotFoundError(f"unknown split_key {split_key!r}")
        return {
            "split_key": row["split_key"],
            "log_ref": row["log_ref"],
            "name": row["name"],
            "spec": json.loads(row["spec_json"]),
            "train_location": row["train_location"],
            "test_location": row["test_location"],
            "train_traces": row["train_traces"],
            "test_traces": row["test_traces"],
        }

    def get_split_part(self, split_key: str, part: str) -> EventLog:
        record = self.get_split_record(split_key)
        if part not in ("train", "test"):
            raise ValidationError(f"unknown split part {part!r}")
        return parse_xes(Path(record[f"{part}_location"]).read_bytes())

    def list_splits(self) -> list[dict]:
        rows = self._all("SELECT * FROM splits ORDER BY created_at DESC, split_key")
        return [
            {
                "split_key": r["split_key"],
                "log_ref": r["log_ref"],
                "name": r["name"],
                "spec": json.loads(r["spec_json"]),
                "train_traces": r["train_traces"],
                "test_traces": r["test_traces"],
            }
            for r in rows
        ]

    # -- jobs ---------------------------------------------------------------

    def create_job(self, config: JobConfig) -> JobRecord:
        job_id = new_job_id()
        now = time.time()
        with self._connection() as conn:
            conn.execute(
                "INSERT INTO jobs (id, status, split_key, config_json, task_identity, created_at)"
                " VALUES (?, 'created', ?, ?, ?, ?)",
                (job_id, config.split_key, json.dumps(config.to_dict()), config.task_identity, now),
            )
        return JobRecord(
            id=job_id, status="created", config=config, timestamps={"created_at": now}
        )

    def _transition(self, job_id: str, new_status: str, stamp_column: str, extra: dict) -> None:
        with self._connection() as conn:
            row = conn.execute("SELECT status FROM jobs WHERE id = ?", (job_id,)).fetchone()
            if row is None:
                raise NotFoundError(f"no job {job_id!r}")
            current = row["status"]
            if new_status not in TRANSITIONS[current]:
                raise WorkbenchError(
                    f"illegal job transition {current} -> {new_status} for {job_id}"
                )
            sets = [f"status = ?", f"{stamp_column} = ?"]
            params: list = [new_status, time.time()]
            for column, value in extra.items():
                sets.append(f"{column} = ?")
                params.append(value)
            params.append(job_id)
            conn.execute(f"UPDATE jobs SET {', '.join(sets)} WHERE id = ?", params)

    def mark_queued(self, job_id: str) -> None:
        self._transition(job_id, "queued", "queued_at", {})

    def mark_running(self, job_id: str) -> None:
        self._transition(job_id, "running", "started_at", {})

    def mark_completed(self, job_id: str, result: list) -> None:
        self._transition(job_id, "completed", "finished_at", {"result_json": json.dumps(result)})

    def mark_error(self, job_id: str, detail: str) -> None:
        self._transition(job_id, "error", "finished_at", {"error_detail": detail})

    def delete_job(self, job_id: str) -> None:
        with self._connection() as conn:
            conn.execute("DELETE FROM jobs WHERE id = ?", (job_id,))

    def _job_from_row(self, row) -> JobRecord:
        timestamps = {
            name: row[name]
            for name in ("created_at", "queued_at", "started_at", "finished_at")
            if row[name] is not None
        }
        return JobRecord(
            id=row["id"],
            status=row["status"],
            config=JobConfig.from_dict(json.loads(row["config_json"])),
            result=json.loads(row["result_json"]) if row["result_json"] else None,
            error_detail=row["error_detail"],
            timestamps=timestamps,
        )

    def get_job(self, job_id: str) -> JobRecord:
        row = self._one("SELECT * FROM jobs WHERE id = ?", (job_id,))
        if row is None:
            raise NotFoundError(f"no job {job_id!r}")
        return self._job_from_row(row)

    def query_jobs(self, status: str | None = None, split_key: str | None = None) -> list[JobRecord]:
        clauses, params = [], []
        if status is not None:
            clauses.append("status = ?")
            params.append(status)
        if split_key is not None:
            clauses.append("split_key = ?")
            params.append(split_key)
        where = f" WHERE {' AND '.join(clauses)}" if clauses else ""
        rows = self._all(f"SELECT * FROM jobs{where} ORDER BY created_at DESC, rowid DESC", params)
        return [self._job_from_row(r) for r in rows]

    # -- encoders and models --------------------------------------------------

    def put_encoder(self, encoder) -> str:
        digest = encoder.digest
        location = self._write_artifact(f"{digest}.encoder", pickle.dumps(encoder))
        with self._connection() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO encoders (digest, location, created_at) VALUES (?, ?, ?)",
                (digest, location, time.time()),
            )
        return digest

    def get_encoder(self, digest: str):
        row = self._one("SELECT * FROM encoders WHERE digest = ?", (digest,))
        if row is None:
            raise NotFoundError(f"no encoder {digest!r}")
        return pickle.loads(Path(row["location"]).read_bytes())

    def put_model(self, model: TrainedModel, config: JobConfig) -> str:
        fingerprint = model.config_fingerprint
        path = self.artifacts / f"{fingerprint}.model"
        if not path.exists():
            save_model(model, path)
        with self._connection() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO models"
                " (fingerprint, location, encoder_ref, config_json, family, algorithm, created_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    fingerprint,
                    str(path),
                    model.encoder_ref,
                    json.dumps(config.to_dict()),
                    model.spec.family,
                    model.spec.algorithm,
                    time.time(),
                ),
            )
        return fingerprint

    def get_model(self, fingerprint: str) -> TrainedModel:
        row = self._one("SELECT * FROM models WHERE fingerprint = ?", (fingerprint,))
        if row is None:
            raise NotFoundError(f"no model {fingerprint!r}")
        model, _ = load_model(row["location"])
        return model

    def get_model_record(self, fingerprint: str) -> dict:
        row = self._one("SELECT * FROM models WHERE fingerprint = ?", (fingerprint,))
        if row is None:
            raise NotFoundError(f"no model {fingerprint!r}")
        return {
            "fingerprint": row["fingerprint"],
            "encoder_ref": row["encoder_ref"],
            "config": json.loads(row["config_json"]),
            "family": row["family"],
            "algorithm": row["algorithm"],
        }

    # -- reports ----------------------------------------------------------------

    def put_report(
        self,
        report_id: str,
        job_id: str,
        model_fingerprint: str,
        task_identity: str,
        algorithm: str,
        encoding: str,
        prefix: str,
        family: str,
        report: dict,
    ) -> str:
        with self._connection() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO reports"
                " (id, job_id, model_fingerprint, task_identity, algorithm, encoding, prefix,"
                "  family, report_json, created_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    report_id,
                    job_id,
                    model_fingerprint,
                    task_identity,
                    algorithm,
                    encoding,
                    prefix,
                    family,
                    json.dumps(report),
                    time.time(),
                ),
            )
        return report_id

    def _report_from_row(self, row) -> dict:
        return {
            "id": row["id"],
            "job_id": row["job_id"],
            "model_fingerprint": row["model_fingerprint"],
            "task_identity": row["task_identity"],
            "algorithm": row["algorithm"],
            "encoding": row["encoding"],
            "prefix": row["prefix"],
            "family": row["family"],
            "report": json.loads(row["report_json"]),
        }

    def get_report(self, report_id: str) -> dict:
        row = self._one("SELECT * FROM reports WHERE id = ?", (report_id,))
        if row is None:
            raise NotFoundError(f"no report {report_id!r}")
        return self._report_from_row(row)

    def list_reports(self, ids: list[str] | None = None) -> list[dict]:
        if ids is None:
            rows = self._all("SELECT * FROM reports ORDER BY created_at DESC, id")
            return [self._report_from_row(r) for r in rows]
        found = {}
        for report_id in ids:
            found[report_id] = self.get_report(report_id)
        return [found[i] for i in ids]

    # -- cache index --------------------------------------------------------------

    def cache_lookup(self, key: str) -> dict | None:
        row = self._one("SELECT * FROM cache WHERE key = ?", (key,))
        if row is None:
            return None
        return {
            "key": row["key"],
            "kind": row["kind"],
            "state": row["state"],
            "location": row["location"],
        }

    def cache_claim(self, key: str, kind: str) -> bool:
        """True when this call inserted the building row (claim won)."""
        with self._connection() as conn:
            cursor = conn.execute(
                "INSERT OR IGNORE INTO cache (key, kind, state, created_at)"
                " VALUES (?, ?, 'building', ?)",
                (key, kind, time.time()),
            )
            return cursor.rowcount == 1

    def cache_ready(self, key: str, location: str) -> None:
        with self._connection() as conn:
            conn.execute(
                "UPDATE cache SET state = 'ready', location = ? WHERE key = ?", (location, key)
            )

    def cache_release(self, key: str) -> None:
        with self._connection() as conn:
            conn.execute("DELETE FROM cache WHERE key = ?", (key,))

    def cache_sweep_building(self) -> int:
        with self._connection() as conn:
            cursor = conn.execute("DELETE FROM cache WHERE state = 'building'")
            return cursor.rowcount

    # -- helpers ---------------------------------------------------------------

    def _one(self, sql: str, params=()):
        return self._connection().execute(sql, params).fetchone()

    def _all(self, sql: str, params=()):
        return self._connection().execute(sql, params).fetchall()
