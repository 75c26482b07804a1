"""Atomic multicast over a simulated one-sided-write fabric."""

from .harness import RunResult, ScenarioConfig, run_scenario, run_sweep, verify_logs
from .multicast import (
    DeliveryEvent,
    EngineOptions,
    MulticastEngine,
    NotASender,
    ProtocolViolation,
    compute_received_num,
    null_count_decision,
    seq_num,
)
from .oracle import SendLog, reference_delivery_order, reference_received_num
from .smc import DeliveryMode, MessageId, SubgroupConfig
from .sst import SstLayout, SstTable, build_layout
from .transport import ChannelParams, Fabric, MemoryRegion, TransportError, WriteRequest

__all__ = [
    "ChannelParams",
    "DeliveryEvent",
    "DeliveryMode",
    "EngineOptions",
    "Fabric",
    "MemoryRegion",
    "MessageId",
    "MulticastEngine",
    "NotASender",
    "ProtocolViolation",
    "RunResult",
    "ScenarioConfig",
    "SendLog",
    "SstLayout",
    "SstTable",
    "SubgroupConfig",
    "TransportError",
    "WriteRequest",
    "build_layout",
    "compute_received_num",
    "null_count_decision",
    "reference_delivery_order",
    "reference_received_num",
    "run_scenario",
    "run_sweep",
    "seq_num",
    "verify_logs",
]

__version__ = "0.1.0"
