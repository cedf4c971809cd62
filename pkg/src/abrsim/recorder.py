"""Time-series recording for simulation runs.

ACR samples are kept at full resolution (they change only on RM-cell
feedback).  Queue lengths change on every cell, so they are decimated
into fixed time buckets, keeping the exact maximum per bucket; windowed
maxima (high-water marks, per-VBR-cycle peaks) computed from the bucket
rows are therefore exact as long as the window is bucket-aligned.
"""

from __future__ import annotations

DEFAULT_BUCKET_NS = 500_000  # 0.5 ms


class QueueTracker:
    """Per-queue bucketed max tracker over a piecewise-constant length."""

    __slots__ = ("rows", "bucket_ns", "idx", "cur_max", "cur_len", "hwm")

    def __init__(self, bucket_ns: int):
        self.rows: list[tuple[int, int]] = []  # (bucket_end_ns, max_cells)
        self.bucket_ns = bucket_ns
        self.idx = 0
        self.cur_max = 0
        self.cur_len = 0
        self.hwm = 0

    def update(self, now: int, length: int) -> None:
        idx = now // self.bucket_ns
        if idx != self.idx:
            b = self.bucket_ns
            self.rows.append(((self.idx + 1) * b, self.cur_max))
            # queue length was constant through any skipped buckets
            for i in range(self.idx + 1, idx):
                self.rows.append(((i + 1) * b, self.cur_len))
            self.idx = idx
            self.cur_max = self.cur_len
        if length > self.cur_max:
            self.cur_max = length
        if length > self.hwm:
            self.hwm = length
        self.cur_len = length

    def flush(self, end: int) -> None:
        """Emit rows up to and including the bucket containing `end`."""
        self.update(end, self.cur_len)
        self.rows.append(((self.idx + 1) * self.bucket_ns, self.cur_max))


class CounterTracker:
    """Bucketed cumulative counter (delivered cells)."""

    __slots__ = ("rows", "bucket_ns", "idx", "count", "_emitted")

    def __init__(self, bucket_ns: int):
        self.rows: list[tuple[int, int]] = []  # (bucket_end_ns, cumulative)
        self.bucket_ns = bucket_ns
        self.idx = 0
        self.count = 0
        self._emitted = 0

    def update(self, now: int, count: int) -> None:
        idx = now // self.bucket_ns
        if idx != self.idx:
            if self.count != self._emitted or not self.rows:
                self.rows.append(((self.idx + 1) * self.bucket_ns, self.count))
                self._emitted = self.count
            self.idx = idx
        self.count = count

    def flush(self, end: int) -> None:
        self.update(end, self.count)
        self.rows.append(((self.idx + 1) * self.bucket_ns, self.count))


class MetricsRecorder:
    """Collects ACR, queue-length, and delivery series for one run."""

    def __init__(self, bucket_ns: int = DEFAULT_BUCKET_NS):
        self.bucket_ns = bucket_ns
        self.acr: dict[str, list[tuple[int, float]]] = {}
        self.queues: dict[tuple[str, str], QueueTracker] = {}
        self.delivered: dict[str, CounterTracker] = {}
        self.injected: dict[str, int] = {}

    # -- hooks used by nodes ------------------------------------------------

    def acr_sample(self, now: int, vc: str, acr: float) -> None:
        self.acr.setdefault(vc, []).append((now, acr))

    def queue_tracker(self, node: str, queue: str) -> QueueTracker:
        t = QueueTracker(self.bucket_ns)
        self.queues[(node, queue)] = t
        return t

    def count_injected(self, vc: str) -> None:
        self.injected[vc] = self.injected.get(vc, 0) + 1

    def count_delivered(self, now: int, vc: str) -> int:
        t = self.delivered.get(vc)
        if t is None:
            t = self.delivered[vc] = CounterTracker(self.bucket_ns)
        t.update(now, t.count + 1)
        return t.count

    # -- finalization -------------------------------------------------------

    def finalize(self, end: int) -> None:
        for t in self.queues.values():
            t.flush(end)
        for t in self.delivered.values():
            t.flush(end)

    def delivered_counts(self) -> dict[str, int]:
        return {vc: t.count for vc, t in self.delivered.items()}
