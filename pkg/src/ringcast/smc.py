"""Ring-buffer small-message multicast over table slot regions.

A sender's r-th real message (r counted from 0) goes into slot r mod w
with an expected use counter of r div w; receivers scan a sender's slots
in that order and stop at the first slot whose counter has not advanced.
Slots are reused only once the message previously stored there has been
delivered by every member, which acquire_slot checks against the
delivered_num column.

Nulls never occupy slots, so the slot header carries the message index
(which counts reals and nulls) alongside the use counter; receivers need
it to place each real in the round-robin order.  The first 8 bytes of
the body area hold the payload length, which makes max_msg_bytes - 8 the
effective payload capacity of a slot.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .sst import SstTable, SubgroupLayout

_I64 = struct.Struct("<q")
BODY_LEN_BYTES = 8


class DeliveryMode(Enum):
    IN_PLACE = "in_place"
    COPY_OUT = "copy_out"
    BATCHED = "batched"


class MessageId(NamedTuple):
    sender_rank: int
    index: int


@dataclass(frozen=True)
class SubgroupConfig:
    sg_id: int
    members: tuple
    senders: tuple
    window: int
    max_msg_bytes: int
    delivery_mode: DeliveryMode = DeliveryMode.IN_PLACE

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"subgroup {self.sg_id}: empty membership")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"subgroup {self.sg_id}: duplicate members")
        if not set(self.senders) <= set(self.members):
            raise ValueError(f"subgroup {self.sg_id}: senders must be members")
        if self.window < 1:
            raise ValueError(f"subgroup {self.sg_id}: window must be >= 1")
        if self.max_msg_bytes < 1:
            raise ValueError(f"subgroup {self.sg_id}: max_msg_bytes must be >= 1")

    @property
    def num_senders(self) -> int:
        return len(self.senders)

    @property
    def max_payload_bytes(self) -> int:
        return max(self.max_msg_bytes - BODY_LEN_BYTES, 0)

    def sender_rank(self, node: int) -> Optional[int]:
        try:
            return self.senders.index(node)
        except ValueError:
            return None


class SlotClaim(NamedTuple):
    """A reserved ring position with its message index already assigned."""

    ordinal: int  # r-th real message of this sender
    position: int  # ordinal mod window
    index: int  # message index in the round-robin order (reals + nulls)


class SenderRing:
    """Sender-side slot bookkeeping for one subgroup.

    All methods are called with the subgroup lock held.  Claims may be
    committed out of order by concurrent application threads, but the
    pending range handed to the send path is always the contiguous
    committed prefix, so slots travel in ring order.
    """

    def __init__(self, window: int):
        self.window = window
        self.next_ordinal = 0
        self.committed_upto = 0  # ordinals below this are committed
        self.pushed_upto = 0  # ordinals below this have been handed to the send path
        self._out_of_order: set = set()
        self.slot_seq = [-1] * window  # seq_num of each slot's current occupant

    def acquire(self, min_delivered: int, index: int, seq: int) -> Optional[SlotClaim]:
        position = self.next_ordinal % self.window
        if self.slot_seq[position] > min_delivered:
            return None
        claim = SlotClaim(self.next_ordinal, position, index)
        self.next_ordinal += 1
        self.slot_seq[position] = seq
        return claim

    def commit(self, claim: SlotClaim) -> None:
        if claim.ordinal == self.committed_upto:
            self.committed_upto += 1
            while self.committed_upto in self._out_of_order:
                self._out_of_order.remove(self.committed_upto)
                self.committed_upto += 1
        else:
            self._out_of_order.add(claim.ordinal)

    def pending(self) -> tuple:
        """Half-open ordinal range of committed slots not yet pushed."""
        return (self.pushed_upto, self.committed_upto)

    def mark_pushed(self, upto: int) -> None:
        self.pushed_upto = upto


def write_slot_payload(
    table: SstTable,
    sgl: SubgroupLayout,
    claim: SlotClaim,
    body_len: int,
    use_counter: int,
) -> None:
    """Finish a slot: store the length prefix and publish the header."""
    body = table.own_body_view(sgl, claim.position)
    _I64.pack_into(body, 0, body_len)
    table.write_own_slot(sgl, claim.position, use_counter, claim.index)


class ScannedMessage(NamedTuple):
    index: int
    position: int
    body_len: int


def scan_new_messages(
    table: SstTable,
    sgl: SubgroupLayout,
    sender_node: int,
    next_ordinal: int,
    limit: Optional[int] = None,
) -> list:
    """Collect consecutively available new messages from one sender.

    Returns them in send order, stopping at the first slot whose use
    counter has not reached the expected reuse generation.  A counter
    beyond the expected generation means the sender overwrote a slot the
    scanner never consumed, which the window rule is supposed to make
    impossible.
    """
    out = []
    window = sgl.window
    stride = sgl.slot_stride
    header = sgl.header_bytes
    buf = table.region.buf
    slots_base = table.layout.row_offset(sender_node) + sgl.slots_offset
    unpack = _I64.unpack_from
    r = next_ordinal
    while limit is None or len(out) < limit:
        position = r % window
        expected = r // window
        base = slots_base + position * stride
        counter = unpack(buf, base)[0]
        if counter < expected:
            break
        if counter > expected:
            raise OverwriteError(
                f"sender {sender_node} sg {sgl.sg_id} slot {position}: use counter "
                f"{counter} surpassed expected {expected}; a live slot was overwritten"
            )
        index = unpack(buf, base + 8)[0]
        body_len = unpack(buf, base + header)[0]
        out.append(ScannedMessage(index, position, body_len))
        r += 1
    return out


class OverwriteError(RuntimeError):
    """A slot changed under a receiver that had not consumed it."""
