"""Atomic multicast over the shared state table.

Messages from the configured senders of a subgroup are delivered at
every member in one global round-robin order: message k of sender rank
i has sequence number k * S + i, and sequence numbers are delivered in
increasing order with no gaps.  A single polling thread per node runs
three predicate steps per subgroup:

  send      pushes every committed-but-unsent slot to the other members
            (one contiguous write per member, two when the ring wraps),
            then the null announcement counter if it changed;
  receive   scans each sender's slots for everything that has arrived,
            folds in announced nulls, advances received_num, and decides
            how many nulls this node must commit to avoid blocking the
            round-robin order;
  delivery  takes the minimum received_num over the members and hands
            every newly stable message to the application in sequence
            order, skipping nulls, then advances delivered_num.

Application threads synchronize with the polling thread through one
lock per subgroup, held only where message indices are assigned (slot
claims and null commits) plus a few words of queue bookkeeping; all
transport posts happen with the lock released.  That is safe because
everything pushed is monotonic, so a payload snapshot taken after the
lock drops only ever carries newer values, and a slot extent cannot be
reused until the very writes carrying it have been applied and
acknowledged everywhere.  The received_num and delivered_num cells are
written by the polling thread alone and read lock-free.  Disabling
lock_release_before_push instead runs each whole step, posts included,
inside the lock, which is the baseline the optimization is measured
against.

Nulls travel as a single monotonic per-sender counter rather than
occupying slots.  Receivers rebuild the real/null interleaving from the
explicit message index stored in each slot header plus that counter;
the counter is published (locally and remotely) only behind every real
message with a smaller index, so a receiver that has seen n announced
nulls has already seen every real that precedes them.
"""

from __future__ import annotations

import hashlib
import struct
import threading
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

from . import smc
from .metrics import CommitTimes, MetricsSink
from .smc import DeliveryMode, MessageId, SubgroupConfig
from .sst import (
    CELL_BYTES,
    DELIVERED_NUM,
    NULLS_ANNOUNCED,
    RECEIVED_NUM,
    SstLayout,
    SstTable,
)
from .transport import Fabric

_I64 = struct.Struct("<q")


class ProtocolViolation(RuntimeError):
    """An internal protocol invariant broke; the run is not trustworthy."""


class NullCatchupViolation(ProtocolViolation):
    """A null commit left the sender still behind the message it answered."""


class NotASender(ValueError):
    """send() called on a node that is not a configured sender."""


# -- sequence number algebra -------------------------------------------------


def seq_num(sender_rank: int, index: int, num_senders: int) -> int:
    """Global delivery-order position of a sender's index-th message."""
    return index * num_senders + sender_rank


def seq_decode(seq: int, num_senders: int) -> tuple:
    return seq % num_senders, seq // num_senders


def compute_received_num(accounted_counts: Sequence[int], num_senders: int) -> int:
    """Highest sequence number s with every message <= s accounted.

    The first missing message of rank i is its accounted_counts[i]-th,
    so the first missing sequence number is the minimum over ranks of
    counts[i] * S + i and everything below it is present.
    """
    return min(c * num_senders + i for i, c in enumerate(accounted_counts)) - 1


def null_count_decision(own_rank: int, own_next_index: int, recv_rank: int, recv_index: int) -> int:
    """How many nulls a sender owes after accounting message (recv_rank, recv_index).

    Counts the sender's own future indices that precede the received
    message in the round-robin order; committing exactly that many nulls
    guarantees nothing of ours blocks its delivery.
    """
    bump = 1 if own_rank < recv_rank else 0
    return max(0, recv_index + bump - own_next_index)


# -- delivery events ----------------------------------------------------------


@dataclass(frozen=True)
class DeliveryEvent:
    sg_id: int
    sender_rank: int
    index: int
    seq: int
    body: Union[memoryview, bytes]

    @property
    def body_len(self) -> int:
        return len(self.body)


Upcall = Callable[[Union[DeliveryEvent, List[DeliveryEvent]]], None]


class CommitRecord(NamedTuple):
    index: int
    kind: str  # "real" | "null"
    digest: str
    ts_ns: int


@dataclass
class EngineOptions:
    batching: bool = True
    nulls: bool = True
    lock_release_before_push: bool = True
    copy_in: bool = False
    idle_park_sweeps: int = 10_000
    digest_payloads: bool = False


# -- per-subgroup state --------------------------------------------------------


class _PeerState:
    """Receiver-side view of one sender: scan cursor plus index accounting."""

    __slots__ = ("next_ordinal", "accounted", "nulls_classified", "pending")

    def __init__(self):
        self.next_ordinal = 0  # reals scanned so far
        self.accounted = 0  # indices 0..accounted-1 classified real or null
        self.nulls_classified = 0
        self.pending = deque()  # scanned reals not yet delivered (FIFO)


class _SubgroupRuntime:
    def __init__(self, cfg: SubgroupConfig, sgl, node: int, layout):
        self.cfg = cfg
        self.sgl = sgl
        self.lock = threading.Lock()
        self.others = tuple(m for m in cfg.members if m != node)
        self.peers = [_PeerState() for _ in cfg.senders]
        self.own_rank = cfg.sender_rank(node)
        self.slot_freed = threading.Condition()  # signaled when delivery frees slots
        # precomputed absolute offsets for the hot read paths
        self.received_offs = tuple(
            layout.row_offset(m) + sgl.scalar_offset(RECEIVED_NUM) for m in cfg.members
        )
        self.delivered_offs = tuple(
            layout.row_offset(m) + sgl.scalar_offset(DELIVERED_NUM) for m in cfg.members
        )
        self.announce_offs = tuple(
            layout.row_offset(s) + sgl.scalar_offset(NULLS_ANNOUNCED) for s in cfg.senders
        )
        self.ring = smc.SenderRing(cfg.window) if self.own_rank is not None else None
        self.own_next_index = 0  # reals (incl. claimed) + nulls committed
        self.nulls_local = 0
        self.announced_local = 0  # null count published in the own-row cell
        # Each null batch waits behind the reals acquired before it: the
        # cell may only publish a count once every smaller-index real is
        # committed (locally visible) and, for the remote push, flushed.
        self.null_barriers = deque()  # (ring ordinal barrier, cumulative nulls)
        self.announce_dirty = False
        self.received_num = -1
        self.delivered_num = -1
        self.commit_log: List[CommitRecord] = []
        self.upcall: Optional[Upcall] = None
        self.delivered_reals = 0
        self.delivered_bytes = 0
        self.rr_cursor = 0  # receive fairness cursor in unbatched mode


# -- lock-scope instrumentation ------------------------------------------------

_tls = threading.local()


def locks_held() -> int:
    """Subgroup locks currently held by this thread (any engine)."""
    return getattr(_tls, "depth", 0)


@contextmanager
def _held(lock: threading.Lock):
    lock.acquire()
    _tls.depth = locks_held() + 1
    try:
        yield
    finally:
        _tls.depth -= 1
        lock.release()


# -- the engine -----------------------------------------------------------------


class MulticastEngine:
    """One node's protocol instance: table, polling thread and send API."""

    def __init__(
        self,
        node: int,
        fabric: Fabric,
        layout: SstLayout,
        subgroups: Sequence[SubgroupConfig],
        options: Optional[EngineOptions] = None,
        metrics: Optional[MetricsSink] = None,
        commit_times: Optional[CommitTimes] = None,
    ):
        self.node = node
        self.fabric = fabric
        self.options = options or EngineOptions()
        self.metrics = metrics or MetricsSink(node)
        self.commit_times = commit_times
        self.table = SstTable(layout, node, fabric)
        self._runtimes: List[_SubgroupRuntime] = []
        self._by_sg: dict = {}
        for cfg, sgl in zip(subgroups, layout.subgroups):
            if cfg.sg_id != sgl.sg_id:
                raise ValueError("subgroup configs and layout out of order")
            if node in cfg.members:
                rt = _SubgroupRuntime(cfg, sgl, node, layout)
                self._runtimes.append(rt)
                self._by_sg[cfg.sg_id] = rt
        self._stop = False
        self._fatal: Optional[BaseException] = None
        self._wake_cond = threading.Condition()
        self._wake_pending = False
        self._parked = False
        self._thread: Optional[threading.Thread] = None
        fabric.set_wake_callback(node, self.wake)
        fabric.set_post_hook(node, self._post_hook)

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            raise RuntimeError("engine already started")
        self._thread = threading.Thread(
            target=self._poll_loop, name=f"poll-{self.node}", daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self._stop = True
        self.wake()
        if self._thread is not None:
            self._thread.join(timeout=10.0)

    @property
    def fatal_error(self) -> Optional[BaseException]:
        return self._fatal

    @property
    def parked(self) -> bool:
        return self._parked

    def set_upcall(self, sg_id: int, fn: Upcall) -> None:
        self._by_sg[sg_id].upcall = fn

    # -- introspection -----------------------------------------------------------

    def delivered_reals(self, sg_id: int) -> int:
        return self._by_sg[sg_id].delivered_reals

    def delivered_bytes(self, sg_id: int) -> int:
        return self._by_sg[sg_id].delivered_bytes

    def nulls_committed(self, sg_id: int) -> int:
        return self._by_sg[sg_id].nulls_local

    def commit_log(self, sg_id: int) -> List[CommitRecord]:
        return list(self._by_sg[sg_id].commit_log)

    def state_dump(self) -> dict:
        out = {"node": self.node, "parked": self._parked}
        for rt in self._runtimes:
            out[f"sg{rt.cfg.sg_id}"] = {
                "received_num": rt.received_num,
                "delivered_num": rt.delivered_num,
                "own_next_index": rt.own_next_index,
                "nulls_local": rt.nulls_local,
                "accounted": [p.accounted for p in rt.peers],
                "pending_reals": [len(p.pending) for p in rt.peers],
                "delivered_reals": rt.delivered_reals,
            }
        return out

    # -- wake / park ----------------------------------------------------------------

    def wake(self) -> None:
        self._wake_pending = True
        if self._parked:
            with self._wake_cond:
                self._wake_cond.notify()

    def _park(self) -> None:
        with self._wake_cond:
            self._parked = True
            if not self._wake_pending and not self._stop:
                self._wake_cond.wait()
            self._parked = False
            self._wake_pending = False
        self.metrics.inc("parks")

    def _post_hook(self, req) -> None:
        if locks_held() > 0:
            self.metrics.inc("posts_in_lock")

    # -- application send path ----------------------------------------------------

    def send(
        self,
        sg_id: int,
        size: int = 0,
        builder: Optional[Callable[[memoryview], None]] = None,
        payload: Optional[bytes] = None,
    ) -> MessageId:
        """Multicast one message; blocks while the slot ring is full.

        ``builder`` receives a writable view of the slot body and fills
        it in place.  Passing ``payload`` (or enabling copy_in) copies
        through an intermediate buffer instead.
        """
        rt = self._by_sg[sg_id]
        cfg = rt.cfg
        if rt.own_rank is None:
            raise NotASender(f"node {self.node} is not a sender in subgroup {sg_id}")
        if payload is not None:
            size = len(payload)
        if not 0 <= size <= cfg.max_payload_bytes:
            raise ValueError(
                f"payload of {size} bytes outside [0, {cfg.max_payload_bytes}]"
            )
        rank = rt.own_rank
        num_senders = cfg.num_senders
        claim = None
        while claim is None:
            if self._stop or self._fatal is not None:
                raise RuntimeError("engine stopped while waiting for a free slot")
            with _held(rt.lock):
                claim = rt.ring.acquire(
                    self._min_delivered(rt),
                    rt.own_next_index,
                    seq_num(rank, rt.own_next_index, num_senders),
                )
                if claim is not None:
                    rt.own_next_index += 1
            if claim is None:
                # ring full: sleep until a delivery push frees slots (the
                # timeout covers a wakeup racing past the failed acquire)
                with rt.slot_freed:
                    rt.slot_freed.wait(timeout=0.001)
        body = self.table.own_body_view(rt.sgl, claim.position)
        target = body[smc.BODY_LEN_BYTES:smc.BODY_LEN_BYTES + size]
        if payload is not None:
            target[:] = payload
            self.metrics.inc("send_copies")
        elif self.options.copy_in:
            scratch = bytearray(size)
            if builder is not None:
                builder(memoryview(scratch))
            target[:] = scratch
            self.metrics.inc("send_copies")
        elif builder is not None:
            builder(target)
        digest = "-"
        if self.options.digest_payloads:
            digest = hashlib.blake2b(bytes(target), digest_size=8).hexdigest()
        ts = time.perf_counter_ns()
        with _held(rt.lock):
            smc.write_slot_payload(self.table, rt.sgl, claim, size, claim.ordinal // cfg.window)
            rt.ring.commit(claim)
            rt.commit_log.append(CommitRecord(claim.index, "real", digest, ts))
        if self.commit_times is not None:
            self.commit_times.note(sg_id, rank, claim.index, ts)
        self.metrics.inc("reals_committed")
        self.wake()
        return MessageId(rank, claim.index)

    def _min_delivered(self, rt: _SubgroupRuntime) -> int:
        table = self.table
        return min(table.read_cell(m, rt.sgl, DELIVERED_NUM) for m in rt.cfg.members)

    # -- polling loop -----------------------------------------------------------------

    def _poll_loop(self) -> None:
        idle = 0
        try:
            while not self._stop:
                active = False
                for rt in self._runtimes:
                    active |= self._send_step(rt)
                    active |= self._receive_step(rt)
                    active |= self._delivery_step(rt)
                if active:
                    idle = 0
                else:
                    idle += 1
                    if idle >= self.options.idle_park_sweeps:
                        self._park()
                        idle = 0
                    else:
                        # yield, never wait: an idle sweep found nothing
                        # pending, so handing the interpreter to sender
                        # threads delays no batch
                        time.sleep(0)
        except BaseException as exc:  # surfaced to the harness, never swallowed
            self._fatal = exc

    def run_steps(self, sweeps: int = 1) -> bool:
        """Drive the predicates inline (tests only; engine must not be started)."""
        if self._thread is not None:
            raise RuntimeError("cannot step an engine with a live polling thread")
        active = False
        for _ in range(sweeps):
            for rt in self._runtimes:
                active |= self._send_step(rt)
                active |= self._receive_step(rt)
                active |= self._delivery_step(rt)
        return active

    # -- predicate steps -----------------------------------------------------------------

    def _post_outbox(self, rt: _SubgroupRuntime, outbox: list, stage: str) -> None:
        if not outbox or not rt.others:
            return
        fabric = self.fabric
        t0 = time.perf_counter_ns()
        for dst in rt.others:
            for abs_off, payload in outbox:
                fabric.post(self.node, dst, abs_off, payload)
        self.metrics.inc("post_ns", time.perf_counter_ns() - t0)
        self.metrics.inc(f"writes_{stage}", len(rt.others) * len(outbox))

    def _snapshot(self, row_off: int, length: int) -> tuple:
        abs_off = self.table.layout.row_offset(self.node) + row_off
        return abs_off, bytes(self.table.region.buf[abs_off:abs_off + length])

    def _send_step(self, rt: _SubgroupRuntime) -> bool:
        if rt.ring is None:
            return False
        if self.options.lock_release_before_push:
            with _held(rt.lock):
                plan = self._send_plan(rt)
            if plan is None:
                return False
            self._post_send(rt, plan)
            return True
        with _held(rt.lock):
            plan = self._send_plan(rt)
            if plan is None:
                return False
            self._post_send(rt, plan)
            return True

    def _send_plan(self, rt: _SubgroupRuntime):
        """Decide what to push, under the subgroup lock; cheap bookkeeping only."""
        self._advance_announce(rt)
        lo, hi = rt.ring.pending()
        if hi > lo and not self.options.batching:
            hi = lo + 1
        extents = []
        if hi > lo:
            window = rt.cfg.window
            start = lo % window
            count = hi - lo
            first = min(count, window - start)
            extents.append((start, first))
            if count > first:
                extents.append((0, count - first))
            rt.ring.mark_pushed(hi)
        announce = rt.announce_dirty and rt.ring.pushed_upto == rt.ring.committed_upto
        if announce:
            rt.announce_dirty = False
        if not extents and not announce:
            return None
        return extents, announce, hi - lo

    def _post_send(self, rt: _SubgroupRuntime, plan) -> None:
        # Payloads are snapshotted here, possibly after the lock was
        # dropped: slot extents cannot be reused until these very writes
        # are applied and acknowledged everywhere, and the scalar cells
        # are only ever written by this thread.
        extents, announce, count = plan
        outbox = []
        stride = rt.sgl.slot_stride
        for pos, num in extents:
            outbox.append(self._snapshot(rt.sgl.slot_offset(pos), num * stride))
        if announce:
            # The announcement rides behind every slot committed before it
            # on each channel, so a receiver that sees the counter has
            # already seen every real with a smaller index.
            outbox.append(self._snapshot(rt.sgl.scalar_offset(NULLS_ANNOUNCED), CELL_BYTES))
        if count > 0:
            self.metrics.observe_batch("send", count)
        self._post_outbox(rt, outbox, "send")

    def _receive_step(self, rt: _SubgroupRuntime) -> bool:
        if self.options.lock_release_before_push:
            return self._receive_core(rt, locked=False)
        with _held(rt.lock):
            return self._receive_core(rt, locked=True)

    def _receive_core(self, rt: _SubgroupRuntime, locked: bool) -> bool:
        cfg = rt.cfg
        num_senders = cfg.num_senders
        if num_senders == 0:
            return False
        table = self.table
        buf = table.region.buf
        total_new = 0
        best_seq = -1
        best = (0, 0)
        if self.options.batching:
            rank_order = range(num_senders)
            scan_limit = None
        else:
            rank_order = [(rt.rr_cursor + i) % num_senders for i in range(num_senders)]
            scan_limit = 1
        for rank in rank_order:
            peer = rt.peers[rank]
            # Read the announcement before scanning: slots committed
            # before the announced nulls are fenced behind it, so the
            # scan below cannot miss a real the announcement implies.
            announced_pre = _I64.unpack_from(buf, rt.announce_offs[rank])[0]
            batch = smc.scan_new_messages(
                table, rt.sgl, cfg.senders[rank], peer.next_ordinal, limit=scan_limit
            )
            new_here = 0
            for m in batch:
                if m.index < peer.accounted:
                    raise ProtocolViolation(
                        f"sg {cfg.sg_id} sender rank {rank}: slot message index "
                        f"{m.index} was already accounted (frontier {peer.accounted})"
                    )
                gap = m.index - peer.accounted
                peer.nulls_classified += gap
                peer.pending.append(m)
                peer.accounted = m.index + 1
                peer.next_ordinal += 1
                new_here += gap + 1
            # Announced nulls may only extend the frontier when the scan
            # drained every visible slot; otherwise an unscanned real
            # could be sitting below the announced nulls' indices.
            if scan_limit is None or len(batch) < scan_limit:
                trailing = announced_pre - peer.nulls_classified
                if trailing > 0:
                    peer.nulls_classified += trailing
                    peer.accounted += trailing
                    new_here += trailing
            if new_here:
                total_new += new_here
                s = seq_num(rank, peer.accounted - 1, num_senders)
                if s > best_seq:
                    best_seq = s
                    best = (rank, peer.accounted - 1)
                if not self.options.batching and batch:
                    rt.rr_cursor = (rank + 1) % num_senders
                    break
        if not total_new:
            return False
        self.metrics.observe_batch("receive", total_new)
        push_received = False
        new_received = compute_received_num([p.accounted for p in rt.peers], num_senders)
        if new_received > rt.received_num:
            rt.received_num = new_received
            table.update_local_cell(table.own_cell(rt.sgl, RECEIVED_NUM), new_received)
            push_received = True
        if self.options.nulls and rt.own_rank is not None and best_seq >= 0:
            # index assignment is shared with application send threads
            if locked:
                self._maybe_commit_nulls(rt, best)
            else:
                with _held(rt.lock):
                    self._maybe_commit_nulls(rt, best)
        if push_received:
            outbox = [self._snapshot(rt.sgl.scalar_offset(RECEIVED_NUM), CELL_BYTES)]
            self._post_outbox(rt, outbox, "receive")
        return True

    def _maybe_commit_nulls(self, rt: _SubgroupRuntime, best: tuple) -> None:
        owed = null_count_decision(rt.own_rank, rt.own_next_index, best[0], best[1])
        if owed > 0:
            self._commit_nulls(rt, owed, best[0], best[1])

    def _commit_nulls(self, rt: _SubgroupRuntime, count: int, recv_rank: int, recv_index: int) -> None:
        ts = time.perf_counter_ns()
        for idx in range(rt.own_next_index, rt.own_next_index + count):
            rt.commit_log.append(CommitRecord(idx, "null", "-", ts))
        rt.own_next_index += count
        rt.nulls_local += count
        rt.null_barriers.append((rt.ring.next_ordinal, rt.nulls_local))
        self._advance_announce(rt)
        self.metrics.inc("nulls_committed", count)
        # One-round property: after the commit, none of this sender's
        # future indices may precede the message that triggered it.
        num_senders = rt.cfg.num_senders
        if seq_num(rt.own_rank, rt.own_next_index, num_senders) < seq_num(
            recv_rank, recv_index, num_senders
        ):
            raise NullCatchupViolation(
                f"sg {rt.cfg.sg_id} rank {rt.own_rank}: committed {count} nulls but "
                f"index {rt.own_next_index} still precedes ({recv_rank}, {recv_index})"
            )

    def _advance_announce(self, rt: _SubgroupRuntime) -> None:
        """Publish null counts whose preceding reals are all committed.

        An announced count covering a null must never become readable
        (locally or remotely) before the reals with smaller indices, or a
        receiver would misclassify a still-in-flight real as a null.
        """
        ready = None
        while rt.null_barriers and rt.null_barriers[0][0] <= rt.ring.committed_upto:
            ready = rt.null_barriers.popleft()[1]
        if ready is not None and ready > rt.announced_local:
            rt.announced_local = ready
            table = self.table
            table.update_local_cell(table.own_cell(rt.sgl, NULLS_ANNOUNCED), ready)
            rt.announce_dirty = True

    def _delivery_step(self, rt: _SubgroupRuntime) -> bool:
        if self.options.lock_release_before_push:
            return self._delivery_core(rt)
        with _held(rt.lock):
            return self._delivery_core(rt)

    def _delivery_core(self, rt: _SubgroupRuntime) -> bool:
        cfg = rt.cfg
        num_senders = cfg.num_senders
        if num_senders == 0:
            return False
        table = self.table
        buf = table.region.buf
        frontier = min(_I64.unpack_from(buf, off)[0] for off in rt.received_offs)
        if not self.options.batching:
            frontier = min(frontier, rt.delivered_num + 1)
        if frontier <= rt.delivered_num:
            return False
        prev = rt.delivered_num
        copy_out = cfg.delivery_mode is DeliveryMode.COPY_OUT
        events: List[DeliveryEvent] = []
        for seq in range(prev + 1, frontier + 1):
            rank, k = seq_decode(seq, num_senders)
            peer = rt.peers[rank]
            if peer.pending and peer.pending[0].index < k:
                raise ProtocolViolation(
                    f"sg {cfg.sg_id}: real (rank {rank}, index "
                    f"{peer.pending[0].index}) was skipped by the delivery order"
                )
            if peer.pending and peer.pending[0].index == k:
                m = peer.pending.popleft()
                view = table.body_view(cfg.senders[rank], rt.sgl, m.position)
                body = view[smc.BODY_LEN_BYTES:smc.BODY_LEN_BYTES + m.body_len]
                if copy_out:
                    body = bytes(body)
                    self.metrics.inc("delivery_copies")
                events.append(DeliveryEvent(cfg.sg_id, rank, k, seq, body))
            # otherwise the sequence number belongs to a null: skip it
        # The upcall happens before delivered_num moves: nobody may reuse a
        # slot this batch still references until the pushes below go out.
        if events:
            self._upcall(rt, events)
            now = time.perf_counter_ns()
            if self.commit_times is not None:
                for ev in events:
                    ts0 = self.commit_times.get(cfg.sg_id, ev.sender_rank, ev.index)
                    if ts0:
                        self.metrics.observe_latency(now - ts0)
            rt.delivered_reals += len(events)
            rt.delivered_bytes += sum(ev.body_len for ev in events)
        rt.delivered_num = frontier
        table.update_local_cell(table.own_cell(rt.sgl, DELIVERED_NUM), frontier)
        self.metrics.observe_batch("delivery", frontier - prev)
        outbox = [self._snapshot(rt.sgl.scalar_offset(DELIVERED_NUM), CELL_BYTES)]
        self._post_outbox(rt, outbox, "delivery")
        with rt.slot_freed:
            rt.slot_freed.notify_all()
        return True

    def _upcall(self, rt: _SubgroupRuntime, events: List[DeliveryEvent]) -> None:
        fn = rt.upcall
        if fn is None:
            return
        if rt.cfg.delivery_mode is DeliveryMode.BATCHED:
            fn(events)
        else:
            for ev in events:
                fn(ev)
