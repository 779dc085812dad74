"""Time-sliced slide processor: one metric tree per alive slide.

Arrivals probe their own slide's tree first and then walk preceding
slides newest-first, stopping as soon as k neighbors are known (minimal
probing).  Neighbor counts per preceding slide live in the object's
``evil`` map; counts from the object's own and succeeding slides live in
``count_after``.  Succeeding-slide knowledge can be partial: newcomers
probing backwards report themselves to the residents they find, and a
resident that later drops below k extends forward one slide at a time,
replacing the partial tally of each newly searched slide with the exact
one.  Preceding slides that were never probed are always older than every
alive slide by the time they could matter, so backward knowledge is
complete for alive data.
"""

from __future__ import annotations

from ..core import StreamObject, WindowConfig
from ..indexes import MTree
from .common import PartitionOutput, SlideBatch


class _SliceRec:
    __slots__ = ("obj", "succ", "frontier")

    def __init__(self, obj: StreamObject, frontier: int):
        self.obj = obj
        self.succ = {}          # succeeding slide -> tally folded into count_after
        self.frontier = frontier  # newest slide whose tally is exact


class SlicedWindowProcessor:
    """Per-partition sliding window split into per-slide metric trees."""

    def __init__(self, cfg: WindowConfig, partition: int):
        self.cfg = cfg
        self.partition = partition
        self.trees: dict = {}       # slide index -> MTree
        self.slide_ids: dict = {}   # slide index -> ids in arrival order
        self.objs: dict = {}
        self.recs: dict = {}
        self.triggers: dict = {}    # slide index -> ids that counted neighbors there
        self.unresolved: set = set()
        self.counters = {"backward_probes": 0, "forward_probes": 0}

    def _status(self, o: StreamObject, oldest_alive: int) -> int:
        extra = 0
        for j, cnt in o.evil.items():
            if j >= oldest_alive:
                extra += cnt
        return o.count_after + extra

    def process_slide(self, batch: SlideBatch) -> PartitionOutput:
        cfg = self.cfg
        u = batch.interval.slide_index
        oldest_alive = u - cfg.slides_per_window + 1
        expiring = u - cfg.slides_per_window

        candidates = set(self.unresolved)
        if expiring in self.trees:
            del self.trees[expiring]
            for oid in self.slide_ids.pop(expiring):
                del self.objs[oid]
                del self.recs[oid]
                self.unresolved.discard(oid)
                candidates.discard(oid)
            for oid in self.triggers.pop(expiring, ()):
                o = self.objs.get(oid)
                if o is not None:
                    o.evil.pop(expiring, None)
                    if o.flag == 0:
                        candidates.add(oid)

        tree = MTree(metric=cfg.metric)
        self.trees[u] = tree
        ids_u: list = []
        self.slide_ids[u] = ids_u
        for o in batch.arrivals:
            o.evil = {}
            found = tree.query_ids(o.value, cfg.R)
            for nid in found:
                n = self.objs[nid]
                n.count_after += 1          # same-slide neighbors count both ways
            o.count_after += len(found)
            rec = _SliceRec(o, frontier=u)
            if o.flag == 0:
                st = o.count_after
                j = u - 1
                while st < cfg.k and j in self.trees:
                    hits = self.trees[j].query_ids(o.value, cfg.R)
                    self.counters["backward_probes"] += 1
                    if hits:
                        o.evil[j] = len(hits)
                        self.triggers.setdefault(j, []).append(o.id)
                        for nid in hits:
                            n = self.objs[nid]
                            n.count_after += 1
                            nrec = self.recs[nid]
                            nrec.succ[u] = nrec.succ.get(u, 0) + 1
                        st += len(hits)
                    j -= 1
            self.objs[o.id] = o
            self.recs[o.id] = rec
            tree.add(o.id, o.value)
            ids_u.append(o.id)

        for oid in candidates:
            o = self.objs.get(oid)
            if o is None or o.flag != 0 or o.count_after >= cfg.k:
                continue
            rec = self.recs[oid]
            st = self._status(o, oldest_alive)
            while st < cfg.k and rec.frontier < u:
                f = rec.frontier + 1
                full = len(self.trees[f].query_ids(o.value, cfg.R))
                self.counters["forward_probes"] += 1
                gain = full - rec.succ.get(f, 0)
                o.count_after += gain
                st += gain
                rec.succ[f] = full
                rec.frontier = f

        outliers = set()
        unresolved = set()
        alive = 0
        for oid, o in self.objs.items():
            if o.flag != 0:
                continue
            alive += 1
            if o.count_after >= cfg.k:
                continue
            if self._status(o, oldest_alive) < cfg.k:
                outliers.add(oid)
                unresolved.add(oid)
        self.unresolved = unresolved
        return PartitionOutput(outliers=outliers, alive=alive,
                               counters=dict(self.counters))
