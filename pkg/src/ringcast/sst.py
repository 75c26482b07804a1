"""Replicated shared state table.

Every node holds a full copy of an n-row table.  A node mutates only its
own row and pushes byte ranges of it to peers over the fabric; rows of
other nodes change only when their writes are applied locally.  All
protocol scalars are monotonic 64-bit counters starting at -1, each on
its own 64-byte line, so remote readers always observe a non-decreasing
sequence of values and an 8-byte read is never torn.

Row layout, per subgroup the node participates in:

    received_num | delivered_num | nulls_announced     (one line each)
    ... then, after all subgroups' scalars ...
    slot ring: w slots of (8B use counter + 8B message index + m bytes)

The slot region size per row is exactly w * (m + header), which keeps
the table footprint at n * sum(w * (m + header)) slot bytes per node.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .transport import CACHE_LINE, Fabric, MemoryRegion

CELL_BYTES = 8
CELL_INIT = -1

# scalar cell kinds, in row order
RECEIVED_NUM = 0
DELIVERED_NUM = 1
NULLS_ANNOUNCED = 2
_SCALARS_PER_SG = 3

_I64 = struct.Struct("<q")

DEFAULT_HEADER_BYTES = 16  # 8B use counter + 8B message index


class LayoutError(ValueError):
    """Invalid subgroup plan passed to build_layout."""


class MonotonicityError(RuntimeError):
    """A local cell update tried to go backwards; callers must not retry."""


@dataclass(frozen=True)
class CellRef:
    """One scalar cell inside a row, addressed relative to the row base."""

    name: str
    offset: int  # row-relative


@dataclass(frozen=True)
class SubgroupLayout:
    sg_id: int
    scalars_offset: int  # row-relative, 3 cells at CACHE_LINE stride
    slots_offset: int  # row-relative
    window: int
    max_msg_bytes: int
    header_bytes: int

    @property
    def slot_stride(self) -> int:
        return self.header_bytes + self.max_msg_bytes

    @property
    def slots_bytes(self) -> int:
        return self.window * self.slot_stride

    def scalar_offset(self, which: int) -> int:
        return self.scalars_offset + which * CACHE_LINE

    def slot_offset(self, idx: int) -> int:
        return self.slots_offset + idx * self.slot_stride

    def use_counter_offset(self, idx: int) -> int:
        return self.slot_offset(idx)

    def msg_index_offset(self, idx: int) -> int:
        return self.slot_offset(idx) + CELL_BYTES

    def body_offset(self, idx: int) -> int:
        return self.slot_offset(idx) + self.header_bytes


@dataclass(frozen=True)
class SstLayout:
    n: int
    row_size: int
    subgroups: tuple
    header_bytes: int

    @property
    def table_size(self) -> int:
        return self.n * self.row_size

    @property
    def total_slot_bytes(self) -> int:
        """Slot footprint of the whole table: n * sum(w * (m + header))."""
        return self.n * sum(sgl.slots_bytes for sgl in self.subgroups)

    def row_offset(self, node: int) -> int:
        if not 0 <= node < self.n:
            raise LayoutError(f"node {node} outside [0, {self.n})")
        return node * self.row_size

    def to_json(self) -> str:
        doc = {
            "nodes": self.n,
            "row_size": self.row_size,
            "table_size": self.table_size,
            "total_slot_bytes": self.total_slot_bytes,
            "header_bytes": self.header_bytes,
            "subgroups": [
                {
                    "sg_id": sgl.sg_id,
                    "scalars_offset": sgl.scalars_offset,
                    "slots_offset": sgl.slots_offset,
                    "window": sgl.window,
                    "max_msg_bytes": sgl.max_msg_bytes,
                    "slot_stride": sgl.slot_stride,
                    "slots_bytes": sgl.slots_bytes,
                }
                for sgl in self.subgroups
            ],
        }
        return json.dumps(doc, indent=2)


def _pad(n: int, align: int) -> int:
    return (n + align - 1) // align * align


def build_layout(
    subgroups: Sequence,
    header_bytes: int = DEFAULT_HEADER_BYTES,
    n: Optional[int] = None,
) -> SstLayout:
    """Compute the byte layout of a table row for the given subgroup plan.

    ``subgroups`` is any sequence of objects with sg_id, members, window
    and max_msg_bytes attributes.  Scalars come first (one cache line per
    cell), then each subgroup's slot ring, in subgroup order, at exactly
    window * (max_msg_bytes + header_bytes) bytes so the footprint
    formula stays exact.
    """
    if header_bytes < CELL_BYTES:
        raise LayoutError(f"header must hold at least a use counter, got {header_bytes}")
    if not subgroups:
        raise LayoutError("at least one subgroup required")
    max_member = -1
    for cfg in subgroups:
        if not cfg.members:
            raise LayoutError(f"subgroup {cfg.sg_id} has no members")
        if cfg.window < 1:
            raise LayoutError(f"subgroup {cfg.sg_id} has zero window")
        if cfg.max_msg_bytes < 1:
            raise LayoutError(f"subgroup {cfg.sg_id} has max message size < 1")
        max_member = max(max_member, max(cfg.members))
    if n is None:
        n = max_member + 1
    elif max_member >= n:
        raise LayoutError(f"member {max_member} outside [0, {n})")

    offset = 0
    scalar_offsets = []
    for _ in subgroups:
        scalar_offsets.append(offset)
        offset += _SCALARS_PER_SG * CACHE_LINE
    sgls = []
    for cfg, scalars_off in zip(subgroups, scalar_offsets):
        sgls.append(
            SubgroupLayout(
                sg_id=cfg.sg_id,
                scalars_offset=scalars_off,
                slots_offset=offset,
                window=cfg.window,
                max_msg_bytes=cfg.max_msg_bytes,
                header_bytes=header_bytes,
            )
        )
        offset += sgls[-1].slots_bytes
    return SstLayout(
        n=n,
        row_size=_pad(offset, CACHE_LINE),
        subgroups=tuple(sgls),
        header_bytes=header_bytes,
    )


class SstTable:
    """One node's copy of the table, bound to its registered region."""

    def __init__(self, layout: SstLayout, node: int, fabric: Fabric):
        self.layout = layout
        self.node = node
        self.fabric = fabric
        self.region: MemoryRegion = fabric.register_region(node, layout.table_size)
        self._buf = self.region.buf
        self._own_base = layout.row_offset(node)
        for row in range(layout.n):
            base = layout.row_offset(row)
            for sgl in layout.subgroups:
                for which in range(_SCALARS_PER_SG):
                    _I64.pack_into(self._buf, base + sgl.scalar_offset(which), CELL_INIT)
                for idx in range(sgl.window):
                    _I64.pack_into(self._buf, base + sgl.use_counter_offset(idx), CELL_INIT)

    # -- reads (any row, any thread, no locks) ---------------------------

    def read_cell(self, row: int, sgl: SubgroupLayout, which: int) -> int:
        off = self.layout.row_offset(row) + sgl.scalar_offset(which)
        return _I64.unpack_from(self._buf, off)[0]

    def read_use_counter(self, row: int, sgl: SubgroupLayout, idx: int) -> int:
        off = self.layout.row_offset(row) + sgl.use_counter_offset(idx)
        return _I64.unpack_from(self._buf, off)[0]

    def read_msg_index(self, row: int, sgl: SubgroupLayout, idx: int) -> int:
        off = self.layout.row_offset(row) + sgl.msg_index_offset(idx)
        return _I64.unpack_from(self._buf, off)[0]

    def body_view(self, row: int, sgl: SubgroupLayout, idx: int) -> memoryview:
        off = self.layout.row_offset(row) + sgl.body_offset(idx)
        return memoryview(self._buf)[off:off + sgl.max_msg_bytes]

    # -- own-row mutation --------------------------------------------------

    def own_cell(self, sgl: SubgroupLayout, which: int) -> CellRef:
        names = ("received_num", "delivered_num", "nulls_announced")
        return CellRef(name=f"sg{sgl.sg_id}.{names[which]}", offset=sgl.scalar_offset(which))

    def update_local_cell(self, cell: CellRef, value: int) -> None:
        off = self._own_base + cell.offset
        current = _I64.unpack_from(self._buf, off)[0]
        if value < current:
            raise MonotonicityError(
                f"{cell.name}: {current} -> {value} would move a monotonic cell backwards"
            )
        _I64.pack_into(self._buf, off, value)

    def read_own_cell(self, cell: CellRef) -> int:
        return _I64.unpack_from(self._buf, self._own_base + cell.offset)[0]

    def write_own_slot(
        self,
        sgl: SubgroupLayout,
        idx: int,
        use_counter: int,
        msg_index: int,
    ) -> None:
        """Publish a built slot locally: index first, counter last.

        The counter is the guard local readers poll, so it must be the
        final store.
        """
        base = self._own_base
        _I64.pack_into(self._buf, base + sgl.msg_index_offset(idx), msg_index)
        _I64.pack_into(self._buf, base + sgl.use_counter_offset(idx), use_counter)

    def own_body_view(self, sgl: SubgroupLayout, idx: int) -> memoryview:
        return self.body_view(self.node, sgl, idx)

    # -- pushes -----------------------------------------------------------

    def push_range(self, offset: int, length: int, targets: Iterable[int]) -> int:
        """Push [offset, offset+length) of the own row to each target.

        The payload is snapshotted at call time; because every variable
        in the row is monotonic, a snapshot taken after later local
        updates only ever carries newer values, which is safe.
        """
        if offset < 0 or offset + length > self.layout.row_size:
            raise LayoutError(f"range [{offset}, {offset + length}) outside row")
        abs_off = self._own_base + offset
        payload = bytes(self._buf[abs_off:abs_off + length])
        writes = 0
        for target in targets:
            if target == self.node:
                continue
            self.fabric.post(self.node, target, abs_off, payload)
            writes += 1
        return writes

    def push_cells(self, ranges: Iterable, targets: Iterable[int]) -> int:
        targets = tuple(targets)
        writes = 0
        for offset, length in ranges:
            writes += self.push_range(offset, length, targets)
        return writes

    def push_cell(self, cell: CellRef, targets: Iterable[int]) -> int:
        return self.push_range(cell.offset, CELL_BYTES, targets)

    def push_data_then_guard(
        self,
        data_offset: int,
        data_length: int,
        guard: CellRef,
        targets: Iterable[int],
    ) -> int:
        """Push a data range, then its guard cell, on the same channels.

        Per-channel FIFO application turns the second write into a fence:
        any reader that observes the new guard value observes the data.
        """
        targets = tuple(targets)
        writes = self.push_range(data_offset, data_length, targets)
        writes += self.push_cell(guard, targets)
        return writes
