"""Shared slide-processing machinery for the per-partition processors."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import StreamObject, WindowConfig, WindowInterval, trim_nn_before


@dataclass(frozen=True)
class SlideBatch:
    """One slide's arrivals for one partition, plus the new window bounds.

    ``expiry`` equals the new window start: anything older leaves the
    window now.  ``slide_start`` is the first tick of this slide, so an
    active object belongs to the current slide iff ``t >= slide_start``.
    Arrivals are sorted by (t, id) and all fall inside the slide's range.
    """

    interval: WindowInterval
    arrivals: tuple
    expiry: int
    slide_start: int


def make_batch(interval: WindowInterval, arrivals, cfg: WindowConfig) -> SlideBatch:
    return SlideBatch(interval=interval, arrivals=tuple(arrivals),
                      expiry=interval.start, slide_start=interval.end - cfg.S)


@dataclass
class PartitionOutput:
    """What one partition contributes to one slide."""

    outliers: set | None = None          # value-routed processors report directly
    forwards: list | None = None         # replicated processors forward local metadata
    alive: int = 0                       # flag-0 objects active after the slide
    counters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LocalMeta:
    """Per-partition metadata snapshot forwarded to the meta-window."""

    id: int
    owner: int
    t: int
    flag: int
    count_after: int
    nn_before: tuple


def apply_arrival(o: StreamObject, neighbors, slide_start: int, k: int,
                  replicated: bool) -> None:
    """Update metadata for a new arrival and its already-present neighbors.

    Neighbors from the same slide feed ``count_after`` on both sides;
    earlier neighbors contribute their timestamps to the arrival's
    ``nn_before`` (trimmed to the k most recent).  Under full replication
    (``replicated``) only owned copies accumulate ``count_after``: each
    pair must be counted in exactly one partition, and the owner partition
    sees every global arrival.  Under value routing each object reaches a
    partition at most once, so no flag filtering is needed.
    """
    same = 0
    before = []
    for c in neighbors:
        if c.t >= slide_start:
            same += 1
        else:
            before.append(c.t)
        if not replicated or c.flag == 0:
            c.count_after += 1
    if not replicated or o.flag == 0:
        o.count_after += same
    o.nn_before = trim_nn_before(before, k)
