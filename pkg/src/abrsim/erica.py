"""ERICA rate allocation: per-port interval measurement and per-VC VAL.

Each output port measures, over a fixed interval, the ABR input rate,
the high-priority (VBR) rate, and the set of active VCs.  At interval
end it computes

    target   = utilization * link_rate - vbr_rate
    overload = abr_input_rate / target
    fair     = target / max(n_active, 1)

and a VC's allocation is then max(vc_rate / overload, fair), clamped to
the link rate.  Where the VC rate comes from (declared CCR fields or
measured rates at either queue level) is the owner's choice; the owner
maintains `vc_rates`.
"""

from __future__ import annotations

from dataclasses import dataclass

from abrsim.engine import MS
from abrsim.protocol import rate_mbps

OVERLOAD_FLOOR = 0.01
TARGET_FLOOR_MBPS = 0.1


@dataclass(frozen=True, slots=True)
class IntervalSnapshot:
    target_rate: float
    overload: float
    fair_share: float
    n_active: int
    input_rate: float
    vbr_rate: float


class EricaPortState:
    """Measurement and allocation state for one output port."""

    def __init__(self, link_rate: float, target_util: float = 0.9,
                 interval_ns: int = MS):
        self.link_rate = link_rate
        self.target_util = target_util
        self.interval_ns = interval_ns
        self.abr_cells = 0
        self.hp_cells = 0
        self.active: set[str] = set()
        self.vc_rates: dict[str, float] = {}
        self.snapshot: IntervalSnapshot | None = None

    def note_abr(self, vc: str) -> None:
        self.abr_cells += 1
        self.active.add(vc)

    def note_hp(self) -> None:
        self.hp_cells += 1

    def end_interval(self) -> IntervalSnapshot:
        vbr = rate_mbps(self.hp_cells, self.interval_ns)
        target = max(self.target_util * self.link_rate - vbr, TARGET_FLOOR_MBPS)
        inp = rate_mbps(self.abr_cells, self.interval_ns)
        overload = max(inp / target, OVERLOAD_FLOOR)
        fair = target / max(len(self.active), 1)
        self.snapshot = IntervalSnapshot(
            target_rate=target,
            overload=overload,
            fair_share=fair,
            n_active=len(self.active),
            input_rate=inp,
            vbr_rate=vbr,
        )
        self.abr_cells = 0
        self.hp_cells = 0
        self.active.clear()
        return self.snapshot

    def allocate(self, vc: str) -> float:
        """VC's allocation at this link; unconstrained before the first
        completed interval."""
        s = self.snapshot
        if s is None:
            return self.link_rate
        val = max(self.vc_rates.get(vc, 0.0) / s.overload, s.fair_share)
        return min(max(val, 0.0), self.link_rate)
