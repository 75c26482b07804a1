"""Simulated one-sided-write fabric.

Each node registers a memory region that peers write into directly.  The
simulator reproduces the properties protocol code relies on:

  * per-channel FIFO: for a fixed (src, dst) pair, writes become visible
    in post order, so a write posted after another acts as a fence;
  * atomic visibility: a write is applied as a single buffer splice, so
    readers never observe a torn 64-byte unit;
  * post cost: the posting thread is charged a configurable busy-wait,
    which is what makes write batching measurable;
  * wire latency: payloads become visible after a size-dependent delay;
  * wake-on-arrival: applied writes and explicit doorbells wake a parked
    destination through a registered callback.

Loss and reordering are out of scope (reliable-connected semantics).
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

CACHE_LINE = 64


class TransportError(Exception):
    """Misuse of the fabric: bad registration, bounds, or destination."""


def _spin_ns(duration_ns: int) -> None:
    if duration_ns <= 0:
        return
    end = time.perf_counter_ns() + duration_ns
    while time.perf_counter_ns() < end:
        pass


def _wait_until_ns(deadline_ns: int) -> None:
    # Sleep for the bulk of long waits, spin the tail. Precision below
    # ~50us is not guaranteed by the OS timer, so short waits spin.
    while True:
        remaining = deadline_ns - time.perf_counter_ns()
        if remaining <= 0:
            return
        if remaining > 200_000:
            time.sleep((remaining - 100_000) / 1e9)
        elif remaining > 20_000:
            time.sleep(0)
        else:
            _spin_ns(remaining)
            return


@dataclass
class ChannelParams:
    """Tunable costs of the simulated fabric.

    The default latency curve is nearly flat for small payloads: 1.73us
    for 1 byte rising to 2.46us at 4KiB, then linear at the same
    per-byte slope.  post_cost_ns is the time the posting thread is
    blocked per request, independent of payload size.
    """

    post_cost_ns: int = 1_000
    lat_1b_ns: int = 1_730
    lat_4k_ns: int = 2_460
    lat_knee_bytes: int = 4_096
    jitter_ns: int = 0
    synchronous: bool = False

    def latency_ns(self, size: int) -> int:
        if size < 1:
            raise TransportError(f"payload size must be >= 1, got {size}")
        knee = self.lat_knee_bytes
        slope = (self.lat_4k_ns - self.lat_1b_ns) / max(knee - 1, 1)
        if size <= knee:
            return int(self.lat_1b_ns + slope * (size - 1))
        return int(self.lat_4k_ns + slope * (size - knee))

    @classmethod
    def zero_cost(cls) -> "ChannelParams":
        """No post cost and no wire delay, for pure correctness tests."""
        return cls(post_cost_ns=0, lat_1b_ns=0, lat_4k_ns=0, jitter_ns=0)

    @classmethod
    def from_mapping(cls, kv: dict) -> "ChannelParams":
        from .config import parse_bool, parse_duration_ns

        p = cls()
        if "post_cost" in kv:
            p.post_cost_ns = parse_duration_ns(kv["post_cost"])
        if "lat_1b" in kv:
            p.lat_1b_ns = parse_duration_ns(kv["lat_1b"])
        if "lat_4k" in kv:
            p.lat_4k_ns = parse_duration_ns(kv["lat_4k"])
        if "jitter" in kv:
            p.jitter_ns = parse_duration_ns(kv["jitter"])
        if "synchronous" in kv:
            p.synchronous = parse_bool(kv["synchronous"])
        return p


@dataclass(frozen=True)
class WriteRequest:
    src: int
    dst: int
    offset: int
    payload: bytes
    post_cost_ns: Optional[int] = None
    wire_latency_ns: Optional[int] = None


class MemoryRegion:
    """Registered memory owned by one node, writable by peers."""

    def __init__(self, owner: int, size: int):
        if size <= 0:
            raise TransportError(f"region size must be positive, got {size}")
        self.owner = owner
        self.size = size
        self.buf = bytearray(size)

    def view(self, offset: int = 0, length: Optional[int] = None) -> memoryview:
        length = self.size - offset if length is None else length
        return memoryview(self.buf)[offset:offset + length]


class _Channel:
    __slots__ = ("posted", "applied", "lock")

    def __init__(self):
        self.posted = 0
        self.applied = 0
        self.lock = threading.Lock()


class _Applier(threading.Thread):
    """Applies inbound writes to one destination region in arrival order.

    One applier per destination keeps every (src, dst) channel FIFO; the
    interleaving between channels is whatever the queue order happens to
    be, matching one-sided writes where cross-channel order is undefined.
    """

    def __init__(self, fabric: "Fabric", dst: int):
        super().__init__(name=f"applier-{dst}", daemon=True)
        self.fabric = fabric
        self.dst = dst
        self.queue: deque = deque()
        self.cond = threading.Condition()
        self.closed = False

    def submit(self, src: int, offset: int, payload: bytes, deadline_ns: int) -> None:
        with self.cond:
            self.queue.append((src, offset, payload, deadline_ns))
            self.cond.notify()

    def shutdown(self) -> None:
        with self.cond:
            self.closed = True
            self.cond.notify()

    def run(self) -> None:
        fabric = self.fabric
        region = fabric._regions[self.dst]
        while True:
            with self.cond:
                while not self.queue and not self.closed:
                    self.cond.wait()
                if not self.queue and self.closed:
                    return
                src, offset, payload, deadline_ns = self.queue.popleft()
            _wait_until_ns(deadline_ns)
            fabric._apply(region, self.dst, src, offset, payload)


class Fabric:
    """Registry of regions plus the write path between them."""

    def __init__(self, params: Optional[ChannelParams] = None, seed: int = 0):
        self.params = params or ChannelParams()
        self._regions: dict[int, MemoryRegion] = {}
        self._appliers: dict[int, _Applier] = {}
        self._channels: dict[tuple, _Channel] = {}
        self._wake_cbs: dict[int, Callable[[], None]] = {}
        self._reg_lock = threading.Lock()
        self._post_hooks: dict[int, Callable[[WriteRequest], None]] = {}
        self.doorbells_rung = 0
        self._rng_state = seed & 0xFFFFFFFF

    # -- registration ---------------------------------------------------

    def register_region(self, node: int, size: int) -> MemoryRegion:
        with self._reg_lock:
            if node in self._regions:
                raise TransportError(f"node {node} already registered a region")
            region = MemoryRegion(node, size)
            self._regions[node] = region
            if not self.params.synchronous:
                applier = _Applier(self, node)
                self._appliers[node] = applier
                applier.start()
            return region

    def set_wake_callback(self, node: int, cb: Callable[[], None]) -> None:
        self._wake_cbs[node] = cb

    def set_post_hook(self, src: int, hook: Callable[[WriteRequest], None]) -> None:
        """Install a per-source observer called on every post by that node."""
        self._post_hooks[src] = hook

    def region(self, node: int) -> MemoryRegion:
        try:
            return self._regions[node]
        except KeyError:
            raise TransportError(f"node {node} has no registered region") from None

    # -- write path -------------------------------------------------------

    def post_write(self, req: WriteRequest) -> None:
        region = self.region(req.dst)
        payload = req.payload
        if len(payload) < 1:
            raise TransportError("empty payload")
        if req.offset < 0 or req.offset + len(payload) > region.size:
            raise TransportError(
                f"write [{req.offset}, {req.offset + len(payload)}) outside "
                f"region of {region.size} bytes at node {req.dst}"
            )
        hook = self._post_hooks.get(req.src)
        if hook is not None:
            hook(req)
        channel = self._channel(req.src, req.dst)
        post_cost = self.params.post_cost_ns if req.post_cost_ns is None else req.post_cost_ns
        latency = (
            self.params.latency_ns(len(payload))
            if req.wire_latency_ns is None
            else req.wire_latency_ns
        )
        latency += self._jitter()
        with channel.lock:
            channel.posted += 1
        _spin_ns(post_cost)
        if self.params.synchronous:
            self._apply(region, req.dst, req.src, req.offset, bytes(payload))
        else:
            deadline = time.perf_counter_ns() + latency
            self._appliers[req.dst].submit(req.src, req.offset, bytes(payload), deadline)

    def post(self, src: int, dst: int, offset: int, payload: bytes) -> None:
        self.post_write(WriteRequest(src, dst, offset, payload))

    def ring_doorbell(self, src: int, dst: int) -> None:
        self.region(dst)
        self.doorbells_rung += 1
        cb = self._wake_cbs.get(dst)
        if cb is not None:
            cb()

    def _apply(self, region: MemoryRegion, dst: int, src: int, offset: int, payload: bytes) -> None:
        # Single splice under the GIL: readers see the old bytes or the
        # new bytes, never a mix, which is the atomicity contract.
        region.buf[offset:offset + len(payload)] = payload
        channel = self._channel(src, dst)
        with channel.lock:
            channel.applied += 1
        cb = self._wake_cbs.get(dst)
        if cb is not None:
            cb()

    def _channel(self, src: int, dst: int) -> _Channel:
        key = (src, dst)
        ch = self._channels.get(key)
        if ch is None:
            ch = self._channels.setdefault(key, _Channel())
        return ch

    def _jitter(self) -> int:
        if self.params.jitter_ns <= 0:
            return 0
        # xorshift32: cheap, racy-but-harmless shared PRNG state
        x = self._rng_state or 1
        x ^= (x << 13) & 0xFFFFFFFF
        x ^= x >> 17
        x ^= (x << 5) & 0xFFFFFFFF
        self._rng_state = x
        return x % (self.params.jitter_ns + 1)

    # -- accounting -------------------------------------------------------

    def writes_posted(self, src: Optional[int] = None, dst: Optional[int] = None) -> int:
        return sum(
            ch.posted
            for (s, d), ch in self._channels.items()
            if (src is None or s == src) and (dst is None or d == dst)
        )

    def writes_applied(self, src: Optional[int] = None, dst: Optional[int] = None) -> int:
        return sum(
            ch.applied
            for (s, d), ch in self._channels.items()
            if (src is None or s == src) and (dst is None or d == dst)
        )

    def writes_in_flight(self) -> int:
        return self.writes_posted() - self.writes_applied()

    def channel_counters(self) -> dict:
        return {
            f"{s}->{d}": {"posted": ch.posted, "applied": ch.applied}
            for (s, d), ch in sorted(self._channels.items())
        }

    def quiesce(self, timeout_s: float = 10.0) -> None:
        """Block until every posted write has been applied."""
        deadline = time.perf_counter() + timeout_s
        while self.writes_in_flight() > 0:
            if time.perf_counter() > deadline:
                raise TransportError(
                    f"quiesce timed out with {self.writes_in_flight()} writes in flight"
                )
            time.sleep(0.0002)

    def close(self) -> None:
        for applier in self._appliers.values():
            applier.shutdown()
        for applier in self._appliers.values():
            applier.join(timeout=5.0)
        self._appliers.clear()
