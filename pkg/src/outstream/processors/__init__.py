"""Per-partition slide processors for every algorithm variant."""

from .common import LocalMeta, PartitionOutput, SlideBatch, apply_arrival, make_batch
from .microcluster import (BACKENDS, QUEUE_FLAVORS, EventQueue,
                           MicroClusterProcessor, select_neighbor_backend)
from .sliced import SlicedWindowProcessor
from .window_scan import MetaWindow, WindowScanProcessor

__all__ = [
    "BACKENDS", "QUEUE_FLAVORS", "EventQueue", "LocalMeta", "MetaWindow",
    "MicroClusterProcessor", "PartitionOutput", "SlicedWindowProcessor",
    "SlideBatch", "WindowScanProcessor", "apply_arrival", "make_batch",
    "select_neighbor_backend",
]
