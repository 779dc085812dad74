"""Scan-and-count slide processors plus the meta-window aggregator.

One processor class covers three of the algorithm variants, differing in
two orthogonal knobs:

* ``index``: ``"linear"`` scans the whole partition window per arrival,
  ``"mtree"`` answers the same range queries from a metric tree.
* ``replicated``: full replication (every partition sees every arrival,
  replicas are evicted after their slide, results need the meta-window
  merge) versus value routing (replicas live out their natural lifetime,
  each partition reports its owned outliers directly).

The single-partition value-routed linear configuration is the baseline;
replicated + linear is the naive parallel solution; the mtree flavors are
the advanced ones.
"""

from __future__ import annotations

from collections import deque

from ..core import (WindowConfig, WindowInterval, is_outlier,
                    is_safe_inlier, prune_nn_before, trim_nn_before)
from ..indexes import LinearScanIndex, MTree
from .common import LocalMeta, PartitionOutput, SlideBatch, apply_arrival


class WindowScanProcessor:
    """Per-partition sliding window with per-arrival neighbor accounting."""

    def __init__(self, cfg: WindowConfig, partition: int,
                 index: str = "linear", replicated: bool = False):
        if index not in ("linear", "mtree"):
            raise ValueError(f"unknown index kind {index!r}")
        self.cfg = cfg
        self.partition = partition
        self.replicated = replicated
        self.index_kind = index
        self.objs: dict = {}
        self.index = (LinearScanIndex(cfg.dims, cfg.metric) if index == "linear"
                      else MTree(metric=cfg.metric))
        self._expiry_queue: deque = deque()   # (t, id) in arrival order
        self._pending_replicas: list = []     # flag-1 ids to drop next slide
        self._po: set = set()                 # flag-0 ids not yet safe

    # -- helpers -------------------------------------------------------------

    def _neighbors(self, value) -> list:
        if self.index_kind == "linear":
            return self.index.query_payloads(value, self.cfg.R)
        return [self.objs[i] for i in self.index.query_ids(value, self.cfg.R)]

    def _drop(self, oid) -> None:
        del self.objs[oid]
        self.index.remove(oid)
        self._po.discard(oid)

    # -- slide step ----------------------------------------------------------

    def process_slide(self, batch: SlideBatch) -> PartitionOutput:
        cfg = self.cfg
        if self.replicated:
            for oid in self._pending_replicas:
                self._drop(oid)
            self._pending_replicas = []
        while self._expiry_queue and self._expiry_queue[0][0] < batch.expiry:
            _, oid = self._expiry_queue.popleft()
            if oid in self.objs:
                self._drop(oid)

        for o in batch.arrivals:
            neighbors = self._neighbors(o.value)
            apply_arrival(o, neighbors, batch.slide_start, cfg.k, self.replicated)
            self.objs[o.id] = o
            if self.index_kind == "linear":
                self.index.add(o.id, o.value, payload=o)
            else:
                self.index.add(o.id, o.value)
            self._expiry_queue.append((o.t, o.id))
            if o.flag == 0:
                self._po.add(o.id)
            elif self.replicated:
                self._pending_replicas.append(o.id)

        alive = sum(1 for o in self.objs.values() if o.flag == 0)
        if self.replicated:
            forwards = [LocalMeta(o.id, o.partition, o.t, o.flag,
                                  o.count_after, tuple(o.nn_before))
                        for _, oid in self._expiry_queue
                        if (o := self.objs.get(oid)) is not None
                        and o.count_after < cfg.k]
            return PartitionOutput(forwards=forwards, alive=alive)

        outliers = set()
        for oid in list(self._po):
            o = self.objs[oid]
            if is_safe_inlier(o, cfg.k):
                self._po.discard(oid)
            elif is_outlier(o, batch.expiry, cfg.k):
                outliers.add(oid)
        return PartitionOutput(outliers=outliers, alive=alive)


class MetaWindow:
    """Tumbling aggregator that merges per-partition metadata each slide.

    Holds the merged global metadata of every non-safe owned object: the
    preceding-neighbor list is fused from all partitions at arrival time
    (replicas only ever see an object during its arrival slide), while the
    succeeding-neighbor count is refreshed every slide from the owner copy,
    which observes every later arrival under full replication.  An object
    whose owner stops forwarding it has become a safe inlier and is
    dropped.
    """

    def __init__(self, cfg: WindowConfig):
        self.cfg = cfg
        self._entries: dict = {}   # id -> [t, count_after, nn_before tuple]

    def merge_slide(self, interval: WindowInterval,
                    forwards_by_partition: list) -> set:
        if len(forwards_by_partition) != self.cfg.partitions:
            raise RuntimeError(
                f"meta-window barrier violated at slide {interval.slide_index}: "
                f"{len(forwards_by_partition)} of {self.cfg.partitions} partitions reported")
        cfg = self.cfg
        w_start = interval.start
        groups: dict = {}
        for part in forwards_by_partition:
            for rec in part:
                groups.setdefault(rec.id, []).append(rec)

        expired = [oid for oid, e in self._entries.items() if e[0] < w_start]
        for oid in expired:
            del self._entries[oid]

        refreshed = set()
        for oid, recs in groups.items():
            owner_rec = next((r for r in recs if r.flag == 0), None)
            if owner_rec is None:
                continue   # already safe at its owner, never becomes an outlier
            refreshed.add(oid)
            entry = self._entries.get(oid)
            if entry is None:
                merged = []
                total = 0
                for r in recs:
                    merged.extend(r.nn_before)
                    total += r.count_after
                self._entries[oid] = [owner_rec.t, total,
                                      tuple(trim_nn_before(merged, cfg.k))]
            else:
                entry[1] = owner_rec.count_after

        stale = [oid for oid in self._entries if oid not in refreshed]
        for oid in stale:
            del self._entries[oid]

        outliers = set()
        for oid, (t, count_after, nn_before) in self._entries.items():
            if count_after + len(prune_nn_before(nn_before, w_start)) < cfg.k:
                outliers.add(oid)
        return outliers
