"""Shared rig: inline-stepped engines over a synchronous fabric."""

import pytest

from ringcast.metrics import CommitTimes, MetricsSink
from ringcast.multicast import EngineOptions, MulticastEngine
from ringcast.smc import SubgroupConfig
from ringcast.sst import build_layout
from ringcast.transport import ChannelParams, Fabric


class InlineCluster:
    """Engines for every node, stepped by the test instead of threads."""

    def __init__(self, subgroups, n=None, options=None, digest=False):
        self.fabric = Fabric(
            ChannelParams(post_cost_ns=0, lat_1b_ns=0, lat_4k_ns=0, synchronous=True)
        )
        self.layout = build_layout(subgroups, n=n)
        self.options = options or EngineOptions(digest_payloads=digest)
        self.commit_times = CommitTimes()
        self.sinks = [MetricsSink(node) for node in range(self.layout.n)]
        self.engines = [
            MulticastEngine(
                node,
                self.fabric,
                self.layout,
                subgroups,
                self.options,
                self.sinks[node],
                self.commit_times,
            )
            for node in range(self.layout.n)
        ]
        self.delivered = {
            (node, cfg.sg_id): []
            for node in range(self.layout.n)
            for cfg in subgroups
            if node in cfg.members
        }
        from ringcast.smc import DeliveryMode

        for cfg in subgroups:
            for node in cfg.members:
                record = self.delivered[(node, cfg.sg_id)].append
                if cfg.delivery_mode is DeliveryMode.BATCHED:

                    def upcall(events, rec=record):
                        for ev in events:
                            rec((ev.sender_rank, ev.index))

                else:

                    def upcall(ev, rec=record):
                        rec((ev.sender_rank, ev.index))

                self.engines[node].set_upcall(cfg.sg_id, upcall)

    def step(self, sweeps=1):
        for _ in range(sweeps):
            for engine in self.engines:
                engine.run_steps(1)

    def settle(self, max_sweeps=200):
        for _ in range(max_sweeps):
            active = False
            for engine in self.engines:
                active |= engine.run_steps(1)
            if not active:
                return
        raise AssertionError("cluster never settled")

    def close(self):
        self.fabric.close()


@pytest.fixture
def cluster_factory():
    clusters = []

    def make(subgroups, **kw):
        c = InlineCluster(subgroups, **kw)
        clusters.append(c)
        return c

    yield make
    for c in clusters:
        c.close()


def one_subgroup(members=(0, 1, 2), senders=None, window=4, m=64, **kw):
    return SubgroupConfig(
        sg_id=0,
        members=tuple(members),
        senders=tuple(senders if senders is not None else members),
        window=window,
        max_msg_bytes=m,
        **kw,
    )
