"""Run metrics: response time, convergence time, throughput, queue peaks.

All functions operate on plain series data (as recorded in memory or
read back from the run CSVs), so the summary numbers are recomputable
offline from a run directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_RESPONSE_TOL = 0.10
DEFAULT_CONV_TOL = 0.05
DEFAULT_CONV_WINDOW_NS = 10_000_000  # 10 ms


@dataclass
class RunSeries:
    """Everything a run leaves behind, in metric-friendly form."""

    acr: dict[str, list[tuple[int, float]]]
    queue_rows: dict[tuple[str, str], list[tuple[int, int]]]
    delivered: dict[str, int]
    injected: dict[str, int]
    bucket_ns: int
    delivered_rows: dict[str, list[tuple[int, int]]] = field(default_factory=dict)


def from_recorder(rec) -> RunSeries:
    return RunSeries(
        acr={vc: list(rows) for vc, rows in rec.acr.items()},
        queue_rows={k: list(t.rows) for k, t in rec.queues.items()},
        delivered=rec.delivered_counts(),
        injected=dict(rec.injected),
        bucket_ns=rec.bucket_ns,
        delivered_rows={vc: list(t.rows) for vc, t in rec.delivered.items()},
    )


def _steps_in_window(series: list[tuple[int, float]], lo: int, hi: int):
    """Yield (start, end, value) pieces of the step function on [lo, hi)."""
    if not series or lo >= hi:
        return
    value = None
    start = lo
    for t, v in series:
        if t <= lo:
            value = v
            continue
        if t >= hi:
            break
        if value is not None:
            yield (start, t, value)
        value = v
        start = t
    if value is not None:
        yield (start, hi, value)


def response_time_ns(acr: dict[str, list[tuple[int, float]]],
                     optimal: dict[str, float], tol: float = DEFAULT_RESPONSE_TOL,
                     t0: int = 0, t1: int = 2**62) -> int | None:
    """Earliest time (relative to t0) by which every VC's ACR has entered
    the +/-tol band around its optimal allocation, however briefly."""
    worst = 0
    for vc, opt in optimal.items():
        lo_band, hi_band = opt * (1 - tol), opt * (1 + tol)
        entered = None
        for s, _e, v in _steps_in_window(acr.get(vc, []), t0, t1):
            if lo_band <= v <= hi_band:
                entered = s
                break
        if entered is None:
            return None
        worst = max(worst, entered - t0)
    return worst


def convergence_time_ns(acr: dict[str, list[tuple[int, float]]],
                        optimal: dict[str, float], tol: float = DEFAULT_CONV_TOL,
                        window_ns: int = DEFAULT_CONV_WINDOW_NS,
                        t0: int = 0, t1: int = 2**62) -> int | None:
    """Earliest t (relative to t0) such that every VC stays within the
    +/-tol band for all of [t, min(t + window, t1)]."""
    bad: list[tuple[int, int]] = []
    for vc, opt in optimal.items():
        lo_band, hi_band = opt * (1 - tol), opt * (1 + tol)
        series = acr.get(vc, [])
        if not series:
            return None
        for s, e, v in _steps_in_window(series, t0, t1):
            if not (lo_band <= v <= hi_band):
                bad.append((s, e))
    bad.sort()
    merged: list[tuple[int, int]] = []
    for s, e in bad:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    candidates = [t0] + [e for _s, e in merged]
    for t in candidates:
        if t < t0 or t >= t1:
            continue
        win_end = min(t + window_ns, t1)
        if all(e <= t or s >= win_end for s, e in merged):
            return t - t0
    return None


def throughput_kcells(delivered: dict[str, int], vc: str) -> float:
    return delivered.get(vc, 0) / 1000.0


def max_queue_kcells(queue_rows: dict[tuple[str, str], list[tuple[int, int]]],
                     before_ns: int, bucket_ns: int,
                     prefixes: tuple[str, ...] = ("abr:",)) -> float:
    """Peak backlog (Kcells) over the selected queues up to `before_ns`.

    Per-class ABR queues by default; pass ("abr:", "vc:") to include the
    per-VC queues of virtual sources as well.
    """
    peak = 0
    for (_node, label), rows in queue_rows.items():
        if not label.startswith(prefixes):
            continue
        for bucket_end, mx in rows:
            if bucket_end - bucket_ns < before_ns and mx > peak:
                peak = mx
    return peak / 1000.0


def cycle_maxima(queue_rows: dict[tuple[str, str], list[tuple[int, int]]],
                 cycle_ns: int, until_ns: int,
                 prefixes: tuple[str, ...] = ("abr:", "vc:")) -> list[int]:
    """Per-cycle peak backlog (cells) over the selected queues."""
    n_cycles = until_ns // cycle_ns
    peaks = [0] * n_cycles
    for (_node, label), rows in queue_rows.items():
        if not label.startswith(prefixes):
            continue
        for bucket_end, mx in rows:
            k = (bucket_end - 1) // cycle_ns
            if 0 <= k < n_cycles and mx > peaks[k]:
                peaks[k] = mx
    return peaks
