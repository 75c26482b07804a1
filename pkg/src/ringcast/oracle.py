"""Brute-force reference for the round-robin delivery order.

Deliberately naive and structurally independent of the protocol path:
it re-derives the delivery order by walking sequence numbers one at a
time over the raw per-sender commit logs.  Used to check every run at
desk scale and to cross-validate the received_num arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

REAL = "real"
NULL = "null"


class LogError(ValueError):
    """Commit log is malformed (gaps, bad kinds, duplicate indices)."""


@dataclass
class SendLog:
    """Ordered commit history of one sender: (index, kind, digest)."""

    entries: List[Tuple[int, str, str]] = field(default_factory=list)

    def validate(self) -> None:
        for pos, (index, kind, _) in enumerate(self.entries):
            if index != pos:
                raise LogError(f"send log index {index} at position {pos}: gap or reorder")
            if kind not in (REAL, NULL):
                raise LogError(f"unknown commit kind {kind!r}")

    def __len__(self) -> int:
        return len(self.entries)


def reference_delivery_order(logs: Sequence[SendLog]) -> List[Tuple[int, int, str]]:
    """Application-visible delivery order: (rank, index, digest) triples.

    Walks sequence numbers 0, 1, 2, ... until the first one whose message
    was never committed; anything past that point sits in an incomplete
    round and is not deliverable.  Nulls are dropped from the result.
    """
    num_senders = len(logs)
    for log in logs:
        log.validate()
    order = []
    seq = 0
    while True:
        rank = seq % num_senders
        index = seq // num_senders
        if index >= len(logs[rank]):
            break
        entry_index, kind, digest = logs[rank].entries[index]
        if kind == REAL:
            order.append((rank, entry_index, digest))
        seq += 1
    return order


def reference_received_num(counts: Sequence[int], num_senders: int) -> int:
    """Last sequence number fully covered by the given per-rank counts.

    Linear scan from zero, one sequence number at a time; the protocol's
    closed-form computation must agree with this on every input.
    """
    seq = 0
    while True:
        rank = seq % num_senders
        index = seq // num_senders
        if index >= counts[rank]:
            return seq - 1
        seq += 1


# -- on-disk commit/delivery records ------------------------------------------
#
# commits.log   one line per commit:    node sg rank index kind digest
# deliveries.log one line per delivery: node sg seq rank index digest


def write_commit_log(path: Path, records: Sequence[tuple]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for node, sg, rank, index, kind, digest in records:
            fh.write(f"{node} {sg} {rank} {index} {kind} {digest}\n")


def write_delivery_log(path: Path, records: Sequence[tuple]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for node, sg, seq, rank, index, digest in records:
            fh.write(f"{node} {sg} {seq} {rank} {index} {digest}\n")


def read_commit_logs(path: Path) -> Dict[int, Dict[int, SendLog]]:
    """Parse commits.log into {sg_id: {rank: SendLog}}."""
    by_sg: Dict[int, Dict[int, SendLog]] = {}
    with open(path, encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise LogError(f"bad commit record: {line.rstrip()}")
            _, sg, rank, index, kind, digest = parts
            log = by_sg.setdefault(int(sg), {}).setdefault(int(rank), SendLog())
            log.entries.append((int(index), kind, digest))
    for ranks in by_sg.values():
        for log in ranks.values():
            log.entries.sort(key=lambda e: e[0])
            log.validate()
    return by_sg


def read_delivery_logs(path: Path) -> Dict[tuple, List[tuple]]:
    """Parse deliveries.log into {(node, sg): [(seq, rank, index, digest)]}."""
    by_node_sg: Dict[tuple, List[tuple]] = {}
    with open(path, encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise LogError(f"bad delivery record: {line.rstrip()}")
            node, sg, seq, rank, index, digest = parts
            by_node_sg.setdefault((int(node), int(sg)), []).append(
                (int(seq), int(rank), int(index), digest)
            )
    return by_node_sg
