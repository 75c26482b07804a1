"""Fabric contracts: registration, FIFO visibility, atomicity, counters."""

import random
import struct
import threading
import time

import pytest

from ringcast.transport import CACHE_LINE, ChannelParams, Fabric, TransportError, WriteRequest


def make_fabric(**kw):
    params = ChannelParams.zero_cost()
    for key, value in kw.items():
        setattr(params, key, value)
    return Fabric(params)


def test_register_region_basic():
    fabric = make_fabric(synchronous=True)
    region = fabric.register_region(0, 16 * 1024 * 1024)
    assert region.owner == 0
    assert region.size == 16 * 1024 * 1024


def test_register_region_rejects_empty():
    fabric = make_fabric(synchronous=True)
    with pytest.raises(TransportError):
        fabric.register_region(0, 0)


def test_register_region_rejects_duplicate():
    fabric = make_fabric(synchronous=True)
    fabric.register_region(0, 64)
    with pytest.raises(TransportError):
        fabric.register_region(0, 64)


def test_post_write_bounds_and_unknown_destination():
    fabric = make_fabric(synchronous=True)
    fabric.register_region(0, 64)
    fabric.register_region(1, 64)
    with pytest.raises(TransportError):
        fabric.post(0, 1, 60, b"123456")  # runs past the region end
    with pytest.raises(TransportError):
        fabric.post(0, 9, 0, b"x")  # no such region
    with pytest.raises(TransportError):
        fabric.post(0, 1, 0, b"")  # empty payload


def test_write_counter_counts_every_post():
    fabric = make_fabric(synchronous=True)
    fabric.register_region(0, 64)
    fabric.register_region(1, 64)
    for _ in range(1000):
        fabric.post(0, 1, 0, b"abcd")
    assert fabric.writes_posted(src=0, dst=1) == 1000
    assert fabric.writes_applied(src=0, dst=1) == 1000


def test_fifo_fence_under_concurrent_reader():
    """A reader observing write k observes every earlier write on the channel.

    The writer posts (data, guard) pairs where the guard carries the pair
    number; the reader polls the guard and checks the data is at least as
    new.  Any reordering or torn application would show up as a guard
    ahead of its data.
    """
    fabric = Fabric(ChannelParams(post_cost_ns=0, lat_1b_ns=500, lat_4k_ns=800, jitter_ns=400))
    fabric.register_region(0, 256)
    dst = fabric.register_region(1, 256)
    iterations = 4000
    errors = []
    done = threading.Event()

    def reader():
        last = 0
        while not done.is_set() or last < iterations:
            guard = struct.unpack_from("<q", dst.buf, 64)[0]
            data = struct.unpack_from("<q", dst.buf, 0)[0]
            if data < guard:
                errors.append((guard, data))
                return
            if guard < last:
                errors.append(("guard went backwards", last, guard))
                return
            last = guard
            if last >= iterations:
                return

    t = threading.Thread(target=reader)
    t.start()
    for k in range(1, iterations + 1):
        fabric.post(0, 1, 0, struct.pack("<q", k))
        fabric.post(0, 1, 64, struct.pack("<q", k))
    done.set()
    t.join(timeout=30)
    fabric.quiesce()
    fabric.close()
    assert not errors, f"fence violations: {errors[:5]}"


def test_aligned_unit_never_torn():
    """Concurrent readers of one 64-byte unit see whole values only."""
    fabric = Fabric(ChannelParams(post_cost_ns=0, lat_1b_ns=200, lat_4k_ns=200))
    fabric.register_region(0, 128)
    dst = fabric.register_region(1, 128)
    stop = threading.Event()
    torn = []

    def reader():
        while not stop.is_set():
            chunk = bytes(dst.buf[0:CACHE_LINE])
            if len(set(chunk)) > 1:
                torn.append(chunk)
                return

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for value in range(1, 2000):
        fabric.post(0, 1, 0, bytes([value % 251]) * CACHE_LINE)
    fabric.quiesce()
    stop.set()
    for t in threads:
        t.join(timeout=10)
    fabric.close()
    assert not torn, f"saw a torn cache line: {torn[0]!r}"


def test_conservation_after_quiesce():
    fabric = Fabric(ChannelParams(post_cost_ns=0, lat_1b_ns=2000, lat_4k_ns=3000))
    fabric.register_region(0, 64)
    fabric.register_region(1, 64)
    fabric.register_region(2, 64)
    rng = random.Random(7)
    for _ in range(500):
        fabric.post(0, rng.choice((1, 2)), 0, b"payload")
    fabric.quiesce()
    assert fabric.writes_in_flight() == 0
    assert fabric.writes_posted() == fabric.writes_applied() == 500
    fabric.close()


def test_wake_callback_fires_on_arrival_and_doorbell():
    fabric = make_fabric()
    fabric.register_region(0, 64)
    fabric.register_region(1, 64)
    wakes = []
    fabric.set_wake_callback(1, lambda: wakes.append(1))
    fabric.ring_doorbell(0, 1)
    assert wakes == [1]
    assert fabric.doorbells_rung == 1
    fabric.post(0, 1, 0, b"data")
    fabric.quiesce()
    assert len(wakes) == 2  # implicit doorbell on the applied write
    with pytest.raises(TransportError):
        fabric.ring_doorbell(0, 7)
    fabric.close()


def test_parked_receiver_wakes_on_incoming_write():
    """A sleeping consumer thread resumes when a write lands."""
    fabric = make_fabric()
    fabric.register_region(0, 64)
    dst = fabric.register_region(1, 64)
    arrived = threading.Event()
    fabric.set_wake_callback(1, arrived.set)

    seen = []

    def consumer():
        if not arrived.wait(timeout=5):
            return
        seen.append(bytes(dst.buf[0:4]))

    t = threading.Thread(target=consumer)
    t.start()
    time.sleep(0.05)  # consumer is parked now
    fabric.post(0, 1, 0, b"ping")
    t.join(timeout=10)
    fabric.close()
    assert seen == [b"ping"]


def test_latency_curve_shape():
    params = ChannelParams()
    assert params.latency_ns(1) == 1_730
    assert params.latency_ns(4_096) == 2_460
    values = [params.latency_ns(s) for s in (1, 64, 512, 4_096, 16_384, 65_536)]
    assert values == sorted(values), "latency must be monotone in payload size"
    assert params.latency_ns(8_192) > params.latency_ns(4_096)


def test_per_request_overrides():
    fabric = make_fabric(synchronous=True)
    fabric.register_region(0, 64)
    fabric.register_region(1, 64)
    req = WriteRequest(src=0, dst=1, offset=0, payload=b"zz", post_cost_ns=0, wire_latency_ns=0)
    fabric.post_write(req)
    assert bytes(fabric.region(1).buf[0:2]) == b"zz"
    fabric.close()
