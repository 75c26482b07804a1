"""Render figures from a run's delimited output.

Figures are derived purely from the emitted CSV/JSON files, so the same
inputs always produce the same images and external tooling can consume
the identical data.  Missing inputs are skipped with a warning rather
than failing the run.
"""

from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

STAGES = ("send", "receive", "delivery")


def _read_csv(path: Path) -> List[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))


def render_run_dir(run_dir: Path) -> List[Path]:
    """Histogram and latency figures for a single completed run."""
    run_dir = Path(run_dir)
    out: List[Path] = []

    stages = []
    for stage in STAGES:
        path = run_dir / f"hist_{stage}.csv"
        if not path.exists():
            warnings.warn(f"missing {path.name}, skipping histogram figure")
            continue
        stages.append((stage, _read_csv(path)))
    if stages:
        fig, axes = plt.subplots(1, len(stages), figsize=(4 * len(stages), 3.2))
        if len(stages) == 1:
            axes = [axes]
        for ax, (stage, rows) in zip(axes, stages):
            sizes = [int(r["batch_size"]) for r in rows]
            counts = [int(r["count"]) for r in rows]
            ax.bar(sizes, counts, width=max(1, (max(sizes) - min(sizes)) // 60) if sizes else 1)
            ax.set_title(f"{stage} batches")
            ax.set_xlabel("batch size")
            ax.set_ylabel("occurrences")
        fig.tight_layout()
        path = run_dir / "histograms.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        out.append(path)

    lat_path = run_dir / "latency.csv"
    if lat_path.exists():
        rows = _read_csv(lat_path)
        if rows:
            fig, ax = plt.subplots(figsize=(4.5, 3.2))
            labels = [r["percentile"] for r in rows]
            values = [float(r["microseconds"]) for r in rows]
            ax.bar(labels, values, color="#4878d0")
            ax.set_ylabel("commit-to-delivery (us)")
            ax.set_title("delivery latency")
            fig.tight_layout()
            path = run_dir / "latency.png"
            fig.savefig(path, dpi=110)
            plt.close(fig)
            out.append(path)
    else:
        warnings.warn("missing latency.csv, skipping latency figure")

    metrics_path = run_dir / "metrics.json"
    if metrics_path.exists():
        with open(metrics_path, encoding="utf-8") as fh:
            metrics = json.load(fh)
        per_node = metrics.get("delivered_bytes_per_node", [])
        elapsed = max(metrics.get("elapsed_s", 0.0), 1e-9)
        if per_node:
            fig, ax = plt.subplots(figsize=(4.5, 3.2))
            ax.bar(range(len(per_node)), [b / elapsed / 1e6 for b in per_node], color="#6acc64")
            ax.set_xlabel("node")
            ax.set_ylabel("MB/s delivered")
            ax.set_title("per-node throughput")
            fig.tight_layout()
            path = run_dir / "throughput.png"
            fig.savefig(path, dpi=110)
            plt.close(fig)
            out.append(path)
    return out


def render_sweep(sweep_dir: Path) -> List[Path]:
    """Line chart of throughput against the swept parameter."""
    sweep_dir = Path(sweep_dir)
    path = sweep_dir / "sweep.csv"
    if not path.exists():
        warnings.warn("missing sweep.csv, skipping sweep figure")
        return []
    rows = _read_csv(path)
    if not rows:
        return []
    param = rows[0]["param"]
    xs = [row["value"] for row in rows]
    ys = [float(row["throughput_bytes_per_s"]) / 1e6 for row in rows]
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.plot(xs, ys, marker="o")
    ax.set_xlabel(param)
    ax.set_ylabel("throughput (MB/s)")
    ax.set_title(f"throughput vs {param}")
    fig.tight_layout()
    out = sweep_dir / "sweep.png"
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return [out]
