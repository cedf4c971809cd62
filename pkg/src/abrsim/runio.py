"""Flat CSV output for runs and loading them back for verification.

Schemas:
    acr.csv       time_ns, vc_id, acr_mbps
    queues.csv    time_ns, node_id, queue_id, cells   (per-bucket maxima)
    delivered.csv time_ns, vc_id, cumulative_cells
    summary.csv   scenario, column, metric, value

Times are integer nanoseconds; rates carry six decimals, so repeated
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from abrsim.metrics import RunSeries


def write_run_dir(run_dir: Path, series: RunSeries, meta: dict) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    acr_rows = sorted(
        (t, vc, v) for vc, rows in series.acr.items() for t, v in rows
    )
    with open(run_dir / "acr.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time_ns", "vc_id", "acr_mbps"])
        for t, vc, v in acr_rows:
            w.writerow([t, vc, f"{v:.6f}"])
    q_rows = sorted(
        (t, node, q, mx)
        for (node, q), rows in series.queue_rows.items()
        for t, mx in rows
    )
    with open(run_dir / "queues.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time_ns", "node_id", "queue_id", "cells"])
        for t, node, q, mx in q_rows:
            w.writerow([t, node, q, mx])
    d_rows = sorted(
        (t, vc, c) for vc, rows in series.delivered_rows.items() for t, c in rows
    )
    with open(run_dir / "delivered.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time_ns", "vc_id", "cumulative_cells"])
        for t, vc, c in d_rows:
            w.writerow([t, vc, c])
    with open(run_dir / "run.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def load_run_dir(run_dir: Path) -> tuple[RunSeries, dict]:
    with open(run_dir / "run.json") as f:
        meta = json.load(f)
    acr: dict[str, list[tuple[int, float]]] = {}
    with open(run_dir / "acr.csv", newline="") as f:
        for row in list(csv.reader(f))[1:]:
            acr.setdefault(row[1], []).append((int(row[0]), float(row[2])))
    queue_rows: dict[tuple[str, str], list[tuple[int, int]]] = {}
    with open(run_dir / "queues.csv", newline="") as f:
        for row in list(csv.reader(f))[1:]:
            queue_rows.setdefault((row[1], row[2]), []).append(
                (int(row[0]), int(row[3])))
    delivered_rows: dict[str, list[tuple[int, int]]] = {}
    with open(run_dir / "delivered.csv", newline="") as f:
        for row in list(csv.reader(f))[1:]:
            delivered_rows.setdefault(row[1], []).append(
                (int(row[0]), int(row[2])))
    for rows in acr.values():
        rows.sort()
    for rows in queue_rows.values():
        rows.sort()
    for rows in delivered_rows.values():
        rows.sort()
    series = RunSeries(
        acr=acr,
        queue_rows=queue_rows,
        delivered={vc: rows[-1][1] for vc, rows in delivered_rows.items()},
        injected=meta.get("injected", {}),
        bucket_ns=meta["bucket_ns"],
        delivered_rows=delivered_rows,
    )
    return series, meta
