"""Pulling worker pool.

Workers block on the shared FIFO queue, execute pipelines, and persist
outcomes.  A pipeline exception is captured into the job record (status
error) and the worker keeps pulling; only process-fatal conditions
(BaseException outside Exception) take a worker down, and even then the
queue and store stay consistent for the survivors.
"""
from __future__ import annotations

import logging
import queue as queue_module
import threading
from collections import Counter

from ..errors import NotFoundError
from .cache import ArtifactCache
from .pipeline import execute_job
from .store import Store

log = logging.getLogger("ppmkit.orchestration")

_POLL_SECONDS = 0.1


class WorkerPool:
    def __init__(self, store: Store, cache: ArtifactCache, count: int,
                 autostart: bool = True):
        if count < 1:
            raise ValueError("worker count must be at least 1")
        self.store = store
        self.cache = cache
        self.count = count
        self.queue: queue_module.Queue = queue_module.Queue()
        self.execution_counts: Counter = Counter()
        self._counts_lock = threading.Lock()
        self._stopping = threading.Event()
        self._threads: list[threading.Thread] = []
        if autostart:
            self.start()

    def start(self) -> None:
        """Spawn the configured number of workers (idempotent once alive)."""
        if any(t.is_alive() for t in self._threads):
            return
        for i in range(self.count):
            self.spawn(f"worker-{i}")

    def spawn(self, name: str) -> threading.Thread:
        thread = threading.Thread(target=self._run, name=name, daemon=True)
        self._threads.append(thread)
        thread.start()
        return thread

    def submit(self, job_id: str) -> None:
        self.queue.put(job_id)

    def alive_workers(self) -> list[str]:
        return [t.name for t in self._threads if t.is_alive()]

    def stop(self, timeout: float = 5.0) -> None:
        self._stopping.set()
        for thread in self._threads:
            thread.join(timeout=timeout)

    def _run(self) -> None:
        while not self._stopping.is_set():
            try:
                job_id = self.queue.get(timeout=_POLL_SECONDS)
            except queue_module.Empty:
                continue
            try:
                self._execute(job_id)
            finally:
                self.queue.task_done()

    def _execute(self, job_id: str) -> None:
        try:
            record = self.store.get_job(job_id)
        except NotFoundError:
            # queue/store divergence: tolerated, the id is dropped
            log.warning("job %s no longer in store; skipping", job_id)
            return
        with self._counts_lock:
            self.execution_counts[job_id] += 1
        self.store.mark_running(job_id)
        try:
            result = execute_job(self.store, self.cache, job_id, record.config)
        except Exception as exc:
            detail = f"{type(exc).__name__}: {exc}"
            log.info("job %s failed: %s", job_id, detail)
            self.store.mark_error(job_id, detail)
            return
        self.store.mark_completed(job_id, result)
