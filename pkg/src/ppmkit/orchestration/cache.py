"""Content-addressed artifact cache with claim-or-wait build coordination.

Keys are digests of the upstream configuration, so identical pipeline stages
resolve to identical keys.  The first caller for an absent key claims it and
runs the builder; concurrent callers for the same key block until the winner
finishes, guaranteeing at most one build per key.  A failed build releases
the claim so a later caller can retry.

Artifacts are pickled to one file per key; the sqlite index row flips to
ready only after the file is fully written.
"""
from __future__ import annotations

import os
import pickle
import threading
import time
from collections import Counter
from pathlib import Path

from .store import Store

KINDS = ("loaded_log", "labeled_matrix", "trained_model")

_STALE_POLL_SECONDS = 0.05


class ArtifactCache:
    def __init__(self, store: Store, directory):
        self.store = store
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._building: dict[str, threading.Event] = {}
        self.hit_counts: Counter = Counter()
        self.build_counts: Counter = Counter()
        self._kind_of: dict[str, str] = {}
        # claims are coordinated in-process; a building row surviving into a
        # new cache instance belongs to a crashed run and would never resolve
        self.store.cache_sweep_building()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.pkl"

    def _load(self, location: str):
        return pickle.loads(Path(location).read_bytes())

    def get_or_build(self, kind: str, key: str, builder):
        """Return the artifact for ``key``, building it at most once.

        The builder runs outside the coordination lock; its failure removes
        the claim and propagates, leaving no poisoned entry behind.
        """
        if kind not in KINDS:
            raise ValueError(f"unknown cache kind {kind!r}")
        while True:
            with self._lock:
                row = self.store.cache_lookup(key)
                if row is not None and row["state"] == "ready":
                    self.hit_counts[key] += 1
                    self._kind_of.setdefault(key, kind)
                    location = row["location"]
                elif row is not None:
                    # someone is building; wait on their event (or, if the
                    # claim predates this process, poll the index until the
                    # row resolves)
                    event = self._building.get(key)
                    location = None
                else:
                    claimed = self.store.cache_claim(key, kind)
                    if claimed:
                        event = threading.Event()
                        self._building[key] = event
                        self._kind_of[key] = kind
                        location = None
                        break  # this thread builds
                    # lost the insert race; loop to observe the winner's row
                    continue
            if location is not None:
                return self._load(location)
            if event is not None:
                event.wait()
            else:
                time.sleep(_STALE_POLL_SECONDS)
            # re-check the index after the builder resolved either way

        try:
            self.build_counts[key] += 1
            artifact = builder()
            path = self._path(key)
            tmp = path.parent / f"{path.name}.tmp{os.getpid()}.{threading.get_ident()}"
            tmp.write_bytes(pickle.dumps(artifact))
            tmp.replace(path)
            self.store.cache_ready(key, str(path))
        except BaseException:
            self.store.cache_release(key)
            raise
        finally:
            with self._lock:
                done = self._building.pop(key, None)
            if done is not None:
                done.set()
        return artifact

    # -- instrumentation -------------------------------------------------------

    def builds_for_kind(self, kind: str) -> int:
        return sum(n for key, n in self.build_counts.items() if self._kind_of.get(key) == kind)

    def hits_for_kind(self, kind: str) -> int:
        return sum(n for key, n in self.hit_counts.items() if self._kind_of.get(key) == kind)

    def reset_counters(self) -> None:
        self.hit_counts.clear()
        self.build_counts.clear()
