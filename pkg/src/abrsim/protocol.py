"""Cells, VC/link configuration, and the two-level queue structure.

An ATM cell occupies one 53-byte slot (424 bits on the wire); every
Mbps <-> cells/s conversion in the simulator goes through the helpers
here so all modules agree on the arithmetic.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional

CELL_BITS = 424  # 53 bytes
NRM = 32  # one in-rate FRM per 31 data cells
PROP_NS_PER_KM = 5_000  # 5 us/km propagation


def cell_gap_ns(rate_mbps: float) -> Optional[int]:
    """Inter-cell spacing at `rate_mbps`, or None for a silent (<=0) rate."""
    if rate_mbps <= 0.0:
        return None
    return max(1, round(CELL_BITS * 1_000.0 / rate_mbps))


def rate_mbps(cells: int, dur_ns: int) -> float:
    """Rate represented by `cells` cells observed over `dur_ns`."""
    if dur_ns <= 0:
        return 0.0
    return cells * CELL_BITS * 1_000.0 / dur_ns


class CellKind(enum.Enum):
    DATA = "data"
    FRM = "frm"
    BRM = "brm"


class RmDir(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(slots=True)
class RmPayload:
    """Explicit-rate feedback carried by an RM cell (Mbps)."""

    er: float
    ccr: float
    direction: RmDir


@dataclass(slots=True)
class Cell:
    vc: str
    kind: CellKind
    rm: Optional[RmPayload] = None
    created_at: int = 0
    seq: int = 0  # per-VC data sequence number, for FIFO checks


class ServiceClass(enum.Enum):
    ABR = "abr"
    VBR = "vbr"


@dataclass(slots=True)
class VbrPattern:
    """ON/OFF square wave: `on_fraction` of the link rate while ON."""

    on_fraction: float
    on_ns: int
    off_ns: int

    @property
    def period_ns(self) -> int:
        return self.on_ns + self.off_ns


@dataclass
class VcConfig:
    id: str
    cls: ServiceClass
    path: list[str]  # source, switches..., destination
    pcr: float
    mcr: float = 0.0
    icr: float = 10.0
    start_at: int = 0
    stop_at: Optional[int] = None
    vbr_pattern: Optional[VbrPattern] = None

    def __post_init__(self):
        if not (self.mcr <= self.icr <= self.pcr):
            raise ValueError(f"{self.id}: need mcr <= icr <= pcr")
        if len(self.path) < 2:
            raise ValueError(f"{self.id}: path needs source and destination")

    def clamp(self, rate: float) -> float:
        return max(self.mcr, min(rate, self.pcr))


@dataclass
class LinkConfig:
    rate_mbps: float
    length_km: float

    @property
    def prop_delay_ns(self) -> int:
        return round(self.length_km * PROP_NS_PER_KM)


def make_frm(vc: VcConfig, acr_now: float, now: int = 0) -> Cell:
    """Forward RM cell declaring the sender's current rate (CCR=ACR)."""
    if vc.cls is not ServiceClass.ABR:
        raise ValueError(f"{vc.id}: RM cells are generated for ABR VCs only")
    return Cell(
        vc=vc.id,
        kind=CellKind.FRM,
        rm=RmPayload(er=vc.pcr, ccr=acr_now, direction=RmDir.FORWARD),
        created_at=now,
    )


def turnaround(frm: Cell) -> Cell:
    """Turn an FRM around as a BRM; ER/CCR carry over unchanged."""
    if frm.kind is not CellKind.FRM:
        raise ValueError("only FRM cells can be turned around")
    return Cell(
        vc=frm.vc,
        kind=CellKind.BRM,
        rm=RmPayload(er=frm.rm.er, ccr=frm.rm.ccr, direction=RmDir.BACKWARD),
        created_at=frm.created_at,
    )


class PerClassQueue:
    """FIFO for one service class feeding a link."""

    __slots__ = ("label", "cells", "arrivals", "hwm", "tracker")

    def __init__(self, label: str, tracker=None):
        self.label = label
        self.cells: deque[Cell] = deque()
        self.arrivals = 0
        self.hwm = 0
        self.tracker = tracker
        if tracker is not None:
            tracker.update(0, 0)

    def push(self, cell: Cell, now: int) -> None:
        self.cells.append(cell)
        self.arrivals += 1
        n = len(self.cells)
        if n > self.hwm:
            self.hwm = n
        if self.tracker is not None:
            self.tracker.update(now, n)

    def pop(self, now: int) -> Cell:
        cell = self.cells.popleft()
        if self.tracker is not None:
            self.tracker.update(now, len(self.cells))
        return cell

    def __len__(self) -> int:
        return len(self.cells)


class PerVcQueue:
    """Per-VC FIFO at a virtual source, drained at the shaping rate `acr`."""

    __slots__ = ("vc", "cells", "acr", "arrivals", "hwm", "tracker")

    def __init__(self, vc: str, acr: float, tracker=None):
        self.vc = vc
        self.cells: deque[Cell] = deque()
        self.acr = acr
        self.arrivals = 0
        self.hwm = 0
        self.tracker = tracker
        if tracker is not None:
            tracker.update(0, 0)

    def push(self, cell: Cell, now: int) -> None:
        self.cells.append(cell)
        self.arrivals += 1
        n = len(self.cells)
        if n > self.hwm:
            self.hwm = n
        if self.tracker is not None:
            self.tracker.update(now, n)

    def pop(self, now: int) -> Cell:
        cell = self.cells.popleft()
        if self.tracker is not None:
            self.tracker.update(now, len(self.cells))
        return cell

    def __len__(self) -> int:
        return len(self.cells)
