"""Scenario driver: spins up in-process nodes, runs traffic, checks claims.

A scenario describes node count, sender pattern, per-sender quotas and
delays, window size, message size, optimization toggles and transport
costs.  run_scenario executes it to completion (or a progress stall),
re-derives the delivery order with the brute-force reference, and turns
every correctness claim into a PASS/FAIL verdict:

    order         every node delivered the reference sequence
    validity      every committed real delivered exactly once per node
    monotone      per-node delivery sequence numbers strictly increase
    no_stall      the run completed before the stall timeout
    quiescence    no null was committed during the settle window
    one_round     no null-commit assertion fired
    conservation  transport writes balance and deliveries match commits

Reports land next to the delimited output: metrics.json, the three
batch histogram CSVs, latency percentiles, commit and delivery logs,
and rendered figures.
"""

from __future__ import annotations

import hashlib
import json
import struct
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

from .config import INFINITE, ConfigError, parse_bool, parse_duration_ns, parse_size
from .metrics import (
    CommitTimes,
    MetricsSink,
    latency_percentiles,
    merge_histograms,
    total_counter,
)
from .multicast import EngineOptions, MulticastEngine, NullCatchupViolation
from .oracle import (
    REAL,
    SendLog,
    read_commit_logs,
    read_delivery_logs,
    reference_delivery_order,
    write_commit_log,
    write_delivery_log,
)
from .smc import DeliveryMode, SubgroupConfig
from .sst import build_layout
from .transport import ChannelParams, Fabric

_PATTERNS = ("all", "half", "one")


def _busy_wait_ns(duration_ns: int) -> None:
    # Busy in spirit, GIL-polite in practice: long waits yield the
    # interpreter so 20 threads of busy-waiters do not starve each other.
    end = time.perf_counter_ns() + duration_ns
    while True:
        remaining = end - time.perf_counter_ns()
        if remaining <= 0:
            return
        if remaining > 20_000:
            time.sleep(0)


@dataclass
class ScenarioConfig:
    nodes: int = 4
    subgroups: int = 1
    active_subgroups: Optional[int] = None  # default: all
    sender_pattern: str = "all"
    messages_per_sender: int = 1_000
    message_size: int = 1_024
    window: int = 100
    delivery_mode: DeliveryMode = DeliveryMode.IN_PLACE
    batching: bool = True
    nulls: bool = True
    lock_release: bool = True
    copy_in: bool = False
    sender_delay_ns: int = 0  # applied to every sender unless overridden
    sender_delays: Dict[int, int] = field(default_factory=dict)  # node -> ns, INFINITE = silent
    quotas: Dict[int, int] = field(default_factory=dict)  # node -> messages (overrides)
    paced: bool = False  # senders follow one shared absolute send schedule
    upcall_delay_ns: int = 0
    post_cost_ns: int = 1_000
    lat_1b_ns: Optional[int] = None  # latency-curve overrides
    lat_4k_ns: Optional[int] = None
    zero_cost: bool = False
    jitter_ns: int = 0
    seed: int = 0
    stall_timeout_s: float = 30.0
    settle_s: float = 0.0
    idle_park_sweeps: int = 10_000
    digest_payloads: bool = False
    render_figures: bool = True

    def __post_init__(self):
        if self.nodes < 1:
            raise ConfigError("nodes must be >= 1")
        if self.sender_pattern not in _PATTERNS:
            raise ConfigError(f"sender pattern must be one of {_PATTERNS}")
        if self.active_subgroups is None:
            self.active_subgroups = self.subgroups

    @classmethod
    def from_mapping(cls, kv: Dict[str, str]) -> "ScenarioConfig":
        cfg = cls()
        setters = {
            "nodes": ("nodes", int),
            "subgroups": ("subgroups", int),
            "active_subgroups": ("active_subgroups", int),
            "senders": ("sender_pattern", str),
            "messages_per_sender": ("messages_per_sender", int),
            "message_size": ("message_size", parse_size),
            "window": ("window", int),
            "delivery_mode": ("delivery_mode", DeliveryMode),
            "batching": ("batching", parse_bool),
            "nulls": ("nulls", parse_bool),
            "lock_release": ("lock_release", parse_bool),
            "copy_in": ("copy_in", parse_bool),
            "sender_delay": ("sender_delay_ns", parse_duration_ns),
            "paced": ("paced", parse_bool),
            "upcall_delay": ("upcall_delay_ns", parse_duration_ns),
            "post_cost": ("post_cost_ns", parse_duration_ns),
            "lat_1b": ("lat_1b_ns", parse_duration_ns),
            "lat_4k": ("lat_4k_ns", parse_duration_ns),
            "zero_cost": ("zero_cost", parse_bool),
            "jitter": ("jitter_ns", parse_duration_ns),
            "seed": ("seed", int),
            "stall_timeout": ("stall_timeout_s", float),
            "settle": ("settle_s", float),
            "idle_park_sweeps": ("idle_park_sweeps", int),
            "digests": ("digest_payloads", parse_bool),
            "figures": ("render_figures", parse_bool),
        }
        for key, value in kv.items():
            if key.startswith("delay."):
                cfg.sender_delays[int(key.split(".", 1)[1])] = parse_duration_ns(value)
            elif key.startswith("quota."):
                cfg.quotas[int(key.split(".", 1)[1])] = int(value)
            elif key in setters:
                attr, conv = setters[key]
                setattr(cfg, attr, conv(value))
            else:
                raise ConfigError(f"unknown scenario key {key!r}")
        cfg.__post_init__()
        return cfg

    def senders_for(self, members: tuple) -> tuple:
        if self.sender_pattern == "all":
            return members
        if self.sender_pattern == "half":
            return members[: max(1, len(members) // 2)]
        return members[:1]

    def delay_for(self, node: int) -> int:
        return self.sender_delays.get(node, self.sender_delay_ns)

    def quota_for(self, node: int) -> int:
        if self.delay_for(node) == INFINITE:
            return 0
        return self.quotas.get(node, self.messages_per_sender)


@dataclass
class RunResult:
    config: ScenarioConfig
    verdicts: Dict[str, bool]
    metrics: dict
    commit_records: list
    delivery_records: list
    stall_dump: Optional[list] = None
    out_dir: Optional[Path] = None

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


def _payload_builder(node: int, sg_id: int, msg_no: int, size: int):
    prefix = struct.pack("<iiq", node, sg_id, msg_no)

    def build(view: memoryview) -> None:
        head = min(len(prefix), size)
        view[:head] = prefix[:head]
        if size > head:
            fill = (node * 131 + msg_no * 31 + sg_id) & 0xFF
            view[head:] = bytes([fill]) * (size - head)

    return build


def _sender_loop(engine, sg_id, quota, size, delay_ns, failures, paced_from=None):
    try:
        for msg_no in range(quota):
            if paced_from is not None:
                # shared absolute schedule: send number k goes out at
                # t0 + k*delay on every sender, keeping rates symmetric
                # regardless of scheduler jitter
                _busy_wait_ns(paced_from + msg_no * delay_ns - time.perf_counter_ns())
            engine.send(sg_id, size, _payload_builder(engine.node, sg_id, msg_no, size))
            if paced_from is None and delay_ns > 0:
                _busy_wait_ns(delay_ns)
    except RuntimeError:
        # engine stopped under us: the run is being torn down after a stall
        pass
    except BaseException as exc:
        failures.append(exc)


def run_scenario(cfg: ScenarioConfig, out_dir: Optional[Path] = None) -> RunResult:
    members = tuple(range(cfg.nodes))
    senders = cfg.senders_for(members)
    sg_cfgs = [
        SubgroupConfig(
            sg_id=sg,
            members=members,
            senders=senders,
            window=cfg.window,
            max_msg_bytes=cfg.message_size + 8,  # body length prefix rides inside
            delivery_mode=cfg.delivery_mode,
        )
        for sg in range(cfg.subgroups)
    ]
    active = list(range(cfg.active_subgroups))
    params = ChannelParams.zero_cost() if cfg.zero_cost else ChannelParams()
    params.post_cost_ns = 0 if cfg.zero_cost else cfg.post_cost_ns
    params.jitter_ns = cfg.jitter_ns
    if cfg.lat_1b_ns is not None:
        params.lat_1b_ns = cfg.lat_1b_ns
    if cfg.lat_4k_ns is not None:
        params.lat_4k_ns = cfg.lat_4k_ns
    fabric = Fabric(params, seed=cfg.seed)
    layout = build_layout(sg_cfgs, n=cfg.nodes)
    options = EngineOptions(
        batching=cfg.batching,
        nulls=cfg.nulls,
        lock_release_before_push=cfg.lock_release,
        copy_in=cfg.copy_in,
        idle_park_sweeps=cfg.idle_park_sweeps,
        digest_payloads=cfg.digest_payloads,
    )
    commit_times = CommitTimes()
    sinks = [MetricsSink(node) for node in members]
    engines = [
        MulticastEngine(node, fabric, layout, sg_cfgs, options, sinks[node], commit_times)
        for node in members
    ]

    deliveries: Dict[tuple, list] = {(n, sg): [] for n in members for sg in range(cfg.subgroups)}

    def make_upcall(node: int, sg: int):
        record = deliveries[(node, sg)].append
        delay = cfg.upcall_delay_ns
        digesting = cfg.digest_payloads

        def on_event(ev):
            if digesting:
                digest = hashlib.blake2b(bytes(ev.body), digest_size=8).hexdigest()
            else:
                digest = "-"
            record((ev.seq, ev.sender_rank, ev.index, digest))

        if cfg.delivery_mode is DeliveryMode.BATCHED:

            def upcall(events):
                if delay > 0:
                    _busy_wait_ns(delay)
                for ev in events:
                    on_event(ev)

        else:

            def upcall(ev):
                if delay > 0:
                    _busy_wait_ns(delay)
                on_event(ev)

        return upcall

    for engine in engines:
        for sg in range(cfg.subgroups):
            engine.set_upcall(sg, make_upcall(engine.node, sg))

    expected_per_sg = {
        sg: (sum(cfg.quota_for(node) for node in senders) if sg in active else 0)
        for sg in range(cfg.subgroups)
    }
    total_expected = sum(expected_per_sg.values())

    sender_failures: list = []
    sender_threads = []
    paced_from = (
        time.perf_counter_ns() + 20_000_000 if cfg.paced and cfg.sender_delay_ns > 0 else None
    )
    for sg in active:
        for node in senders:
            quota = cfg.quota_for(node)
            if quota <= 0:
                continue
            t = threading.Thread(
                target=_sender_loop,
                args=(
                    engines[node],
                    sg,
                    quota,
                    cfg.message_size,
                    cfg.delay_for(node),
                    sender_failures,
                    paced_from,
                ),
                name=f"sender-{node}-sg{sg}",
                daemon=True,
            )
            sender_threads.append(t)

    for engine in engines:
        engine.start()
    start_ns = time.perf_counter_ns()
    for t in sender_threads:
        t.start()

    def delivered_total() -> int:
        return sum(
            engines[n].delivered_reals(sg) for n in members for sg in range(cfg.subgroups)
        )

    target = total_expected * cfg.nodes
    stalled = False
    fatal: Optional[BaseException] = None
    last_progress = delivered_total()
    last_change = time.perf_counter()
    while delivered_total() < target:
        time.sleep(0.005)
        fatal = next((e.fatal_error for e in engines if e.fatal_error), None)
        if fatal or sender_failures:
            break
        progress = delivered_total()
        if progress != last_progress:
            last_progress = progress
            last_change = time.perf_counter()
        elif time.perf_counter() - last_change > cfg.stall_timeout_s:
            stalled = True
            break
    end_ns = time.perf_counter_ns()
    elapsed_s = max((end_ns - start_ns) / 1e9, 1e-9)

    stall_dump = [e.state_dump() for e in engines] if stalled else None

    settle_new_nulls = 0
    if not stalled and fatal is None and cfg.settle_s > 0:
        before = sum(e.nulls_committed(sg) for e in engines for sg in range(cfg.subgroups))
        time.sleep(cfg.settle_s)
        after = sum(e.nulls_committed(sg) for e in engines for sg in range(cfg.subgroups))
        settle_new_nulls = after - before

    for engine in engines:
        engine.stop()
    for t in sender_threads:
        t.join(timeout=10.0)
    try:
        fabric.quiesce(timeout_s=15.0)
        drained = True
    except Exception:
        drained = False
    fabric.close()
    if fatal is None:
        fatal = next((e.fatal_error for e in engines if e.fatal_error), None)
    if sender_failures and fatal is None:
        fatal = sender_failures[0]

    # -- collect logs ---------------------------------------------------------
    commit_records = []
    logs_per_sg: Dict[int, List[SendLog]] = {}
    committed_reals = 0
    for sg in range(cfg.subgroups):
        logs = []
        for rank, node in enumerate(senders):
            log = SendLog()
            # commit_log is ordered by commit time; an index claimed by an
            # application thread can be outrun by a null committed on the
            # polling thread, so order canonically by index
            for rec in sorted(engines[node].commit_log(sg), key=lambda r: r.index):
                log.entries.append((rec.index, rec.kind, rec.digest))
                commit_records.append((node, sg, rank, rec.index, rec.kind, rec.digest))
                if rec.kind == REAL:
                    committed_reals += 1
            logs.append(log)
        logs_per_sg[sg] = logs

    delivery_records = []
    for (node, sg), recs in sorted(deliveries.items()):
        for seq, rank, index, digest in recs:
            delivery_records.append((node, sg, seq, rank, index, digest))

    # -- verdicts ----------------------------------------------------------------
    order_ok = True
    validity_ok = True
    monotone_ok = True
    for sg in range(cfg.subgroups):
        reference = reference_delivery_order(logs_per_sg[sg])
        ref_ids = [(rank, index) for rank, index, _ in reference]
        ref_digests = {(rank, index): d for rank, index, d in reference}
        reals_in_log = sum(len([e for e in log.entries if e[1] == REAL]) for log in logs_per_sg[sg])
        if len(ref_ids) != reals_in_log:
            validity_ok = False  # some committed real never became deliverable
        for node in members:
            recs = deliveries[(node, sg)]
            got_ids = [(rank, index) for _, rank, index, _ in recs]
            if got_ids != ref_ids:
                order_ok = False
            seqs = [seq for seq, _, _, _ in recs]
            if any(b <= a for a, b in zip(seqs, seqs[1:])):
                monotone_ok = False
            if cfg.digest_payloads:
                for _, rank, index, digest in recs:
                    if ref_digests.get((rank, index)) != digest:
                        validity_ok = False

    writes_balanced = drained and fabric.writes_posted() == fabric.writes_applied()
    deliveries_balanced = delivered_total() == committed_reals * cfg.nodes
    verdicts = {
        "order": order_ok and not stalled and fatal is None,
        "validity": validity_ok and not stalled and fatal is None,
        "monotone": monotone_ok,
        "no_stall": not stalled and fatal is None,
        "quiescence": settle_new_nulls == 0,
        "one_round": not isinstance(fatal, NullCatchupViolation),
        "conservation": writes_balanced and (stalled or deliveries_balanced),
    }

    # -- metrics ----------------------------------------------------------------
    delivered_bytes = [
        sum(engines[n].delivered_bytes(sg) for sg in range(cfg.subgroups)) for n in members
    ]
    deliveries_total = delivered_total()
    writes_total = fabric.writes_posted()
    merged_hists = merge_histograms(sinks)
    metrics = {
        "scenario": _config_dict(cfg),
        "elapsed_s": elapsed_s,
        "delivered_messages_total": deliveries_total,
        "committed_reals": committed_reals,
        "nulls_committed": total_counter(sinks, "nulls_committed"),
        "writes_posted": writes_total,
        "writes_applied": fabric.writes_applied(),
        "writes_per_delivery": writes_total / max(1, deliveries_total),
        "throughput_bytes_per_s": (sum(delivered_bytes) / cfg.nodes) / elapsed_s,
        "delivered_bytes_per_node": delivered_bytes,
        "posts_in_lock": total_counter(sinks, "posts_in_lock"),
        "send_copies": total_counter(sinks, "send_copies"),
        "delivery_copies": total_counter(sinks, "delivery_copies"),
        "parks": total_counter(sinks, "parks"),
        "post_time_s": total_counter(sinks, "post_ns") / 1e9,
        "settle_new_nulls": settle_new_nulls,
        "latency_us": latency_percentiles(sinks),
        "histograms": {s: dict(sorted(h.items())) for s, h in merged_hists.items()},
        "per_node": [s.to_dict() for s in sinks],
        "verdicts": verdicts,
        "fatal": repr(fatal) if fatal else None,
    }

    result = RunResult(
        config=cfg,
        verdicts=verdicts,
        metrics=metrics,
        commit_records=commit_records,
        delivery_records=delivery_records,
        stall_dump=stall_dump,
        out_dir=out_dir,
    )
    if out_dir is not None:
        emit_report(result, Path(out_dir))
    return result


def _config_dict(cfg: ScenarioConfig) -> dict:
    out = {}
    for key, value in vars(cfg).items():
        if isinstance(value, DeliveryMode):
            value = value.value
        elif isinstance(value, dict):
            value = {str(k): v for k, v in value.items()}
        elif isinstance(value, Path):
            value = str(value)
        out[key] = value
    return out


def _write_csv(path: Path, header: List[str], rows: List[tuple]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def emit_report(result: RunResult, out_dir: Path) -> List[Path]:
    """Write metrics.json, histogram/latency CSVs, logs and figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []

    metrics_path = out_dir / "metrics.json"
    with open(metrics_path, "w", encoding="utf-8") as fh:
        json.dump(result.metrics, fh, indent=2)
    files.append(metrics_path)

    for stage in ("send", "receive", "delivery"):
        hist = result.metrics["histograms"][stage]
        path = out_dir / f"hist_{stage}.csv"
        _write_csv(
            path,
            ["batch_size", "count"],
            sorted(((int(k), v) for k, v in hist.items())),
        )
        files.append(path)

    lat = result.metrics["latency_us"]
    lat_path = out_dir / "latency.csv"
    _write_csv(
        lat_path,
        ["percentile", "microseconds"],
        [(k, lat[k]) for k in ("p50", "p90", "p99", "max") if k in lat],
    )
    files.append(lat_path)

    commits_path = out_dir / "commits.log"
    write_commit_log(commits_path, result.commit_records)
    files.append(commits_path)
    deliveries_path = out_dir / "deliveries.log"
    write_delivery_log(deliveries_path, result.delivery_records)
    files.append(deliveries_path)

    if result.stall_dump is not None:
        dump_path = out_dir / "stall_dump.json"
        with open(dump_path, "w", encoding="utf-8") as fh:
            json.dump(result.stall_dump, fh, indent=2)
        files.append(dump_path)

    if result.config.render_figures:
        from . import report

        files.extend(report.render_run_dir(out_dir))
    result.out_dir = out_dir
    return files


def verdict_lines(verdicts: Dict[str, bool]) -> List[str]:
    return [f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in sorted(verdicts.items())]


# -- deterministic lockstep driver ---------------------------------------------


def run_lockstep(
    nodes: int = 4,
    rounds: int = 2_000,
    window: int = 100,
    payload_bytes: int = 16,
    sweep_cycle: tuple = (1,),
    nulls: bool = True,
    delivery_mode: DeliveryMode = DeliveryMode.IN_PLACE,
    upcall_delay_ns: int = 0,
    seed: int = 0,
) -> dict:
    """Symmetric continuous load under a deterministic inline scheduler.

    Every node is a sender; each tick all of them commit one message and
    every engine is stepped at the same cadence (sweep_cycle gives the
    number of ticks between sweeps, cycled).  No OS threads are
    involved, so emergent effects such as batch structure or the cost of
    a slow delivery upcall reflect the protocol's own behavior rather
    than interpreter scheduling noise.  Returns the merged batch
    histograms, per-node delivery orders, an order verdict and the
    elapsed wall time of the whole exchange.
    """
    sg = SubgroupConfig(
        sg_id=0,
        members=tuple(range(nodes)),
        senders=tuple(range(nodes)),
        window=window,
        max_msg_bytes=payload_bytes + 24,
        delivery_mode=delivery_mode,
    )
    fabric = Fabric(ChannelParams(post_cost_ns=0, lat_1b_ns=0, lat_4k_ns=0, synchronous=True))
    layout = build_layout([sg], n=nodes)
    sinks = [MetricsSink(node) for node in range(nodes)]
    options = EngineOptions(nulls=nulls)
    engines = [
        MulticastEngine(node, fabric, layout, [sg], options, sinks[node]) for node in range(nodes)
    ]
    orders: Dict[int, list] = {node: [] for node in range(nodes)}

    def make_upcall(record):
        if delivery_mode is DeliveryMode.BATCHED:

            def upcall(events):
                if upcall_delay_ns > 0:
                    _busy_wait_ns(upcall_delay_ns)
                for ev in events:
                    record((ev.sender_rank, ev.index))

        else:

            def upcall(ev):
                if upcall_delay_ns > 0:
                    _busy_wait_ns(upcall_delay_ns)
                record((ev.sender_rank, ev.index))

        return upcall

    for engine in engines:
        engine.set_upcall(0, make_upcall(orders[engine.node].append))

    cycle_pos = 0
    until_sweep = sweep_cycle[0]
    payload = bytes(payload_bytes)
    start_ns = time.perf_counter_ns()
    for _ in range(rounds):
        for engine in engines:
            engine.send(0, payload_bytes, payload=payload)
        until_sweep -= 1
        if until_sweep == 0:
            for engine in engines:
                engine.run_steps(1)
            cycle_pos = (cycle_pos + 1) % len(sweep_cycle)
            until_sweep = sweep_cycle[cycle_pos]
    while any(engines[n].delivered_reals(0) < nodes * rounds for n in range(nodes)):
        progressed = False
        for engine in engines:
            progressed |= engine.run_steps(1)
        if not progressed:
            break
    elapsed_s = (time.perf_counter_ns() - start_ns) / 1e9
    fabric.close()

    logs = []
    for rank in range(nodes):
        log = SendLog()
        for rec in sorted(engines[rank].commit_log(0), key=lambda r: r.index):
            log.entries.append((rec.index, rec.kind, rec.digest))
        logs.append(log)
    reference = [(rank, index) for rank, index, _ in reference_delivery_order(logs)]
    order_ok = all(orders[node] == reference for node in range(nodes))
    delivered = [engines[n].delivered_reals(0) for n in range(nodes)]
    return {
        "histograms": {k: dict(v) for k, v in merge_histograms(sinks).items()},
        "order_ok": order_ok,
        "delivered": delivered,
        "expected": nodes * rounds,
        "elapsed_s": max(elapsed_s, 1e-9),
        "throughput_bytes_per_s": sum(delivered) * payload_bytes / nodes / max(elapsed_s, 1e-9),
    }


# -- offline verification -------------------------------------------------------


def verify_logs(run_dir: Path) -> Dict[str, bool]:
    """Re-check order/validity/monotonicity from a run's emitted logs."""
    run_dir = Path(run_dir)
    commit_logs = read_commit_logs(run_dir / "commits.log")
    delivery_path = run_dir / "deliveries.log"
    delivered = read_delivery_logs(delivery_path) if delivery_path.exists() else {}

    order_ok = True
    validity_ok = True
    monotone_ok = True
    for sg, by_rank in commit_logs.items():
        num_senders = max(by_rank) + 1
        logs = [by_rank.get(rank, SendLog()) for rank in range(num_senders)]
        reference = reference_delivery_order(logs)
        ref_ids = [(rank, index) for rank, index, _ in reference]
        reals = sum(1 for log in logs for e in log.entries if e[1] == REAL)
        if len(ref_ids) != reals:
            validity_ok = False
        nodes = {node for (node, s) in delivered if s == sg}
        for node in nodes:
            recs = delivered[(node, sg)]
            got = [(rank, index) for _, rank, index, _ in recs]
            if got != ref_ids:
                order_ok = False
            seqs = [seq for seq, _, _, _ in recs]
            if any(b <= a for a, b in zip(seqs, seqs[1:])):
                monotone_ok = False
    return {"order": order_ok, "validity": validity_ok, "monotone": monotone_ok}


# -- sweeps ------------------------------------------------------------------------


_SWEEP_PARAMS = {
    "w": ("window", int),
    "window": ("window", int),
    "message_size": ("message_size", parse_size),
    "nodes": ("nodes", int),
    "messages_per_sender": ("messages_per_sender", int),
    "post_cost": ("post_cost_ns", parse_duration_ns),
    "upcall_delay": ("upcall_delay_ns", parse_duration_ns),
}


def run_sweep(base: ScenarioConfig, param: str, values: List[str], out_dir: Path) -> List[RunResult]:
    if param not in _SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r} (choose from {sorted(_SWEEP_PARAMS)})")
    attr, conv = _SWEEP_PARAMS[param]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    rows = []
    for value in values:
        cfg = replace(base, render_figures=False)
        setattr(cfg, attr, conv(value))
        sub = out_dir / f"{param}_{value}"
        result = run_scenario(cfg, out_dir=sub)
        results.append(result)
        rows.append(
            (
                param,
                value,
                f"{result.metrics['throughput_bytes_per_s']:.1f}",
                f"{result.metrics['writes_per_delivery']:.3f}",
                f"{result.metrics['latency_us']['p50']:.1f}",
                "PASS" if result.passed else "FAIL",
            )
        )
    _write_csv(
        out_dir / "sweep.csv",
        ["param", "value", "throughput_bytes_per_s", "writes_per_delivery", "latency_p50_us", "verdict"],
        rows,
    )
    if base.render_figures:
        from . import report

        report.render_sweep(out_dir)
    return results
