"""Counters, batch-size histograms and latency samples for a run.

One sink per node; the harness aggregates them at the end of a run.
Increment paths rely on single-writer discipline (each counter is only
bumped from one thread) so no locks are taken on the hot path.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

STAGES = ("send", "receive", "delivery")


@dataclass
class MetricsSink:
    node: int
    counters: Dict[str, int] = field(default_factory=dict)
    histograms: Dict[str, Counter] = field(default_factory=lambda: {s: Counter() for s in STAGES})
    latency_ns: List[int] = field(default_factory=list)

    def inc(self, name: str, amount: int = 1) -> None:
        self.counters[name] = self.counters.get(name, 0) + amount

    def get(self, name: str) -> int:
        return self.counters.get(name, 0)

    def observe_batch(self, stage: str, size: int) -> None:
        if size > 0:
            self.histograms[stage][size] += 1

    def observe_latency(self, ns: int) -> None:
        self.latency_ns.append(ns)

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "counters": dict(sorted(self.counters.items())),
            "histograms": {s: dict(sorted(h.items())) for s, h in self.histograms.items()},
            "latency_samples": len(self.latency_ns),
        }


class CommitTimes:
    """Commit timestamps shared across all nodes of an in-process run.

    Keyed by (sg_id, sender_rank, index); written once by the sender,
    read by every node when the message is delivered.
    """

    def __init__(self):
        self._times: Dict[tuple, int] = {}

    def note(self, sg_id: int, rank: int, index: int, ts_ns: int) -> None:
        self._times[(sg_id, rank, index)] = ts_ns

    def get(self, sg_id: int, rank: int, index: int) -> int:
        return self._times.get((sg_id, rank, index), 0)


def merge_histograms(sinks: Iterable[MetricsSink]) -> Dict[str, Counter]:
    merged: Dict[str, Counter] = {s: Counter() for s in STAGES}
    for sink in sinks:
        for stage, hist in sink.histograms.items():
            merged[stage].update(hist)
    return merged


def total_counter(sinks: Iterable[MetricsSink], name: str) -> int:
    return sum(s.get(name) for s in sinks)


def percentile(sorted_values: List[float], q: float) -> float:
    """Nearest-rank percentile; q in [0, 100]."""
    if not sorted_values:
        return 0.0
    if q <= 0:
        return sorted_values[0]
    if q >= 100:
        return sorted_values[-1]
    rank = max(1, int(round(q / 100.0 * len(sorted_values) + 0.5)))
    return sorted_values[min(rank, len(sorted_values)) - 1]


def latency_percentiles(sinks: Iterable[MetricsSink]) -> Dict[str, float]:
    merged: List[int] = []
    for sink in sinks:
        merged.extend(sink.latency_ns)
    merged.sort()
    out = {}
    for q in (50, 90, 99, 100):
        key = "max" if q == 100 else f"p{q}"
        out[key] = percentile(merged, q) / 1000.0  # microseconds
    out["count"] = len(merged)
    return out
