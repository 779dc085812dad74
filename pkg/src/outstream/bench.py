"""Benchmark result records: one summary row plus per-slide lines, CSV."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .runtime import RunMetrics, RunResult


@dataclass(frozen=True)
class SlideStat:
    slide_index: int
    start: int
    end: int
    arrivals: int
    delivered: int
    alive: int
    outliers: int
    wall_ms: float

    FIELDS = ("slide_index", "start", "end", "arrivals", "delivered",
              "alive", "outliers", "wall_ms")


@dataclass(frozen=True)
class RunRecord:
    """Config echo, aggregate metrics, and per-slide counters for one run."""

    config: tuple          # ordered (key, value-string) pairs
    metrics: RunMetrics
    slides: tuple

    @classmethod
    def from_result(cls, result: RunResult, config: dict) -> "RunRecord":
        slides = tuple(
            SlideStat(slide_index=r.interval.slide_index, start=r.interval.start,
                      end=r.interval.end, arrivals=r.arrivals, delivered=r.delivered,
                      alive=r.alive, outliers=len(r.outliers),
                      wall_ms=r.slide_wall_time * 1e3)
            for r in result.reports)
        return cls(config=tuple((str(k), str(v)) for k, v in config.items()),
                   metrics=result.metrics, slides=slides)

    def summary_line(self) -> str:
        m = self.metrics
        return (f"slides={m.n_slides} mean_slide_ms={m.mean_slide_ms:.3f} "
                f"median_slide_ms={m.median_slide_ms:.3f} "
                f"throughput_obj_s={m.throughput_obj_s:.1f} "
                f"replication_factor={m.replication_factor:.3f} "
                f"outlier_pct={100 * m.outlier_fraction:.3f}")


def write_run_record(record: RunRecord, prefix: str) -> tuple:
    """Write ``<prefix>.summary.csv`` and ``<prefix>.slides.csv``."""
    summary_path = f"{prefix}.summary.csv"
    slides_path = f"{prefix}.slides.csv"
    keys = [k for k, _ in record.config]
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(keys) + list(RunMetrics.FIELDS))
        row = [v for _, v in record.config]
        row += [repr(getattr(record.metrics, f)) for f in RunMetrics.FIELDS]
        w.writerow(row)
    with open(slides_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SlideStat.FIELDS)
        for s in record.slides:
            w.writerow([s.slide_index, s.start, s.end, s.arrivals, s.delivered,
                        s.alive, s.outliers, repr(s.wall_ms)])
    return summary_path, slides_path


def load_run_record(prefix: str) -> RunRecord:
    """Parse files written by `write_run_record` back into an equal record."""
    with open(f"{prefix}.summary.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    header, values = rows[0], rows[1]
    n_cfg = len(header) - len(RunMetrics.FIELDS)
    config = tuple(zip(header[:n_cfg], values[:n_cfg]))
    raw = dict(zip(header[n_cfg:], values[n_cfg:]))
    metrics = RunMetrics(
        n_slides=int(raw["n_slides"]), warmup=int(raw["warmup"]),
        mean_slide_ms=float(raw["mean_slide_ms"]),
        median_slide_ms=float(raw["median_slide_ms"]),
        throughput_obj_s=float(raw["throughput_obj_s"]),
        replication_factor=float(raw["replication_factor"]),
        outlier_fraction=float(raw["outlier_fraction"]))
    slides = []
    with open(f"{prefix}.slides.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            slides.append(SlideStat(
                slide_index=int(row["slide_index"]), start=int(row["start"]),
                end=int(row["end"]), arrivals=int(row["arrivals"]),
                delivered=int(row["delivered"]), alive=int(row["alive"]),
                outliers=int(row["outliers"]), wall_ms=float(row["wall_ms"])))
    return RunRecord(config=config, metrics=metrics, slides=tuple(slides))
