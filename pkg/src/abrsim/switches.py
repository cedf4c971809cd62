"""Switch models: per-class FIFO switch and the VS/VD switch.

The VS/VD switch splits every ABR connection into segments.  Its
virtual destination (VD) terminates the upstream segment: data cells
are forwarded into the per-VC queue of the virtual source (VS) feeding
the next link, and forward RM cells are turned around immediately as
backward RM cells.  The VS paces each VC at its own allowed rate
(acr2), generates fresh forward RM cells every NRM-th emission, and
consumes the backward RM cells of the downstream segment.

How the two control loops are coupled is configurable on four axes
(VsVdOptions); all 4 x 2 x 3 x 3 = 72 combinations are constructible,
with the six viable presets exposed as letters A..F.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from abrsim.engine import Engine, MS
from abrsim.erica import EricaPortState
from abrsim.net import Network, Node
from abrsim.protocol import (
    Cell,
    CellKind,
    NRM,
    PerVcQueue,
    RmDir,
    RmPayload,
    ServiceClass,
    VcConfig,
    cell_gap_ns,
    turnaround,
)


class VcRateMethod(enum.Enum):
    FRM1_CCR = "frm1_ccr"  # rate declared by the previous loop's source
    FRM2_CCR = "frm2_ccr"  # rate this VS declares (its own acr2)
    PER_VC_INPUT = "per_vc_input"  # measured entering the per-VC queue
    PER_CLASS_INPUT = "per_class_input"  # measured entering the class queue


class InputRateMethod(enum.Enum):
    SUM_PER_VC = "sum_per_vc"
    PER_CLASS = "per_class"


class CongestionEffect(enum.Enum):
    PREV_ONLY = "prev_only"
    NEXT_ONLY = "next_only"
    BOTH = "both"


class AllocUpdate(enum.Enum):
    BRM_ONLY = "brm_only"
    FRM_ONLY = "frm_only"
    FRM_AND_BRM = "frm_and_brm"


@dataclass(frozen=True)
class VsVdOptions:
    vc_rate: VcRateMethod
    input_rate: InputRateMethod
    congestion: CongestionEffect
    alloc_update: AllocUpdate

    def label(self) -> str:
        for letter, opts in PRESETS.items():
            if opts == self:
                return letter
        return "custom"


PRESETS: dict[str, VsVdOptions] = {
    # option numbers 41, 52, 329, 340, 393, 404 in row order
    "A": VsVdOptions(VcRateMethod.FRM1_CCR, InputRateMethod.SUM_PER_VC,
                     CongestionEffect.PREV_ONLY, AllocUpdate.FRM_ONLY),
    "B": VsVdOptions(VcRateMethod.PER_CLASS_INPUT, InputRateMethod.PER_CLASS,
                     CongestionEffect.BOTH, AllocUpdate.FRM_ONLY),
    "C": VsVdOptions(VcRateMethod.FRM1_CCR, InputRateMethod.SUM_PER_VC,
                     CongestionEffect.BOTH, AllocUpdate.FRM_ONLY),
    "D": VsVdOptions(VcRateMethod.PER_CLASS_INPUT, InputRateMethod.PER_CLASS,
                     CongestionEffect.BOTH, AllocUpdate.FRM_AND_BRM),
    "E": VsVdOptions(VcRateMethod.FRM1_CCR, InputRateMethod.SUM_PER_VC,
                     CongestionEffect.BOTH, AllocUpdate.BRM_ONLY),
    "F": VsVdOptions(VcRateMethod.PER_CLASS_INPUT, InputRateMethod.PER_CLASS,
                     CongestionEffect.BOTH, AllocUpdate.BRM_ONLY),
}

# declared-rate + per-class measurement: over-allocates whenever declared
# rates exceed actual source rates, e.g. right after the VBR source drops.
# With the next loop uncoupled from the local allocation the declared rate
# is never pulled back down, so the over-allocation persists and queues
# grow without bound; any coupling that clamps acr2 with the local VAL
# self-corrects within about one measurement interval instead.
MISCONFIG_ROW4 = VsVdOptions(VcRateMethod.FRM2_CCR, InputRateMethod.PER_CLASS,
                             CongestionEffect.PREV_ONLY, AllocUpdate.FRM_ONLY)


def preset(letter: str) -> VsVdOptions:
    try:
        return PRESETS[letter]
    except KeyError:
        raise ValueError(f"unknown preset {letter!r}; expected A..F") from None


class _SwitchBase(Node):
    """Shared routing tables and measurement-interval scheduling."""

    def __init__(self, engine: Engine, network: Network, node_id: str,
                 recorder, target_util: float = 0.9, interval_ns: int = MS):
        super().__init__(engine, network, node_id)
        self.recorder = recorder
        self.target_util = target_util
        self.interval_ns = interval_ns
        self.next_hop: dict[str, str] = {}
        self.prev_hop: dict[str, str] = {}

    def attach_vc(self, vc: VcConfig) -> None:
        i = vc.path.index(self.id)
        self.next_hop[vc.id] = vc.path[i + 1]
        self.prev_hop[vc.id] = vc.path[i - 1]
        self._ensure_port_state(vc)

    def _ensure_port_state(self, vc: VcConfig) -> None:
        raise NotImplementedError


class NonVsVdSwitch(_SwitchBase):
    """Per-class FIFO switch: BRMs are stamped with min(ER, VAL) in the
    reverse direction; forward cells pass through unmodified."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.erica: dict[str, EricaPortState] = {}  # keyed by next-hop peer

    def _ensure_port_state(self, vc: VcConfig) -> None:
        peer = self.next_hop[vc.id]
        if peer not in self.erica:
            st = EricaPortState(self.ports[peer].link.rate_mbps,
                                self.target_util, self.interval_ns)
            self.erica[peer] = st
            self.engine.schedule(self.interval_ns, lambda: self._tick(st))

    def _tick(self, st: EricaPortState) -> None:
        st.end_interval()
        self.engine.schedule_in(self.interval_ns, lambda: self._tick(st))

    def on_cell(self, cell: Cell, from_id: str) -> None:
        vc = self.network.vcs[cell.vc]
        if cell.kind is CellKind.BRM:
            st = self.erica[self.next_hop[vc.id]]
            rm = cell.rm
            rm.er = min(rm.er, st.allocate(vc.id))
            self.ports[self.prev_hop[vc.id]].send_ctrl(cell)
            return
        peer = self.next_hop[vc.id]
        port = self.ports[peer]
        st = self.erica[peer]
        if vc.cls is ServiceClass.VBR:
            st.note_hp()
            port.send_vbr(cell)
            return
        st.note_abr(vc.id)
        if cell.kind is CellKind.FRM:
            st.vc_rates[vc.id] = cell.rm.ccr  # rate declared by the source
        port.send_abr(cell)


class VsState:
    """Per-(port, VC) virtual source/destination state."""

    __slots__ = ("vc", "q", "cells_since_frm", "last_emit", "slot_ev",
                 "stored_val", "in_cells", "out_cells")

    def __init__(self, vc: VcConfig, tracker):
        self.vc = vc
        self.q = PerVcQueue(vc.id, acr=vc.icr, tracker=tracker)
        self.cells_since_frm = 0
        self.last_emit: int | None = None
        self.slot_ev = None
        self.stored_val: float | None = None  # VAL table entry (Fig. 9 style)
        self.in_cells = 0  # arrivals at the VD side this interval
        self.out_cells = 0  # emissions into the class queue this interval

    @property
    def acr2(self) -> float:
        return self.q.acr


class _PortVsVd:
    """VS/VD machinery for one output port."""

    __slots__ = ("peer", "erica", "vcs")

    def __init__(self, peer: str, erica: EricaPortState):
        self.peer = peer
        self.erica = erica
        self.vcs: dict[str, VsState] = {}


class VsVdSwitch(_SwitchBase):
    """Switch with per-VC queues, a virtual destination terminating the
    upstream segment and a shaped virtual source feeding the next one."""

    def __init__(self, engine, network, node_id, recorder, options: VsVdOptions,
                 target_util: float = 0.9, interval_ns: int = MS):
        super().__init__(engine, network, node_id, recorder, target_util,
                         interval_ns)
        self.options = options
        self.pstate: dict[str, _PortVsVd] = {}  # keyed by next-hop peer

    def _ensure_port_state(self, vc: VcConfig) -> None:
        peer = self.next_hop[vc.id]
        pvd = self.pstate.get(peer)
        if pvd is None:
            erica = EricaPortState(self.ports[peer].link.rate_mbps,
                                   self.target_util, self.interval_ns)
            pvd = self.pstate[peer] = _PortVsVd(peer, erica)
            self.engine.schedule(self.interval_ns, lambda: self._tick(pvd))
        if vc.cls is ServiceClass.ABR and vc.id not in pvd.vcs:
            tracker = self.recorder.queue_tracker(self.id, f"vc:{vc.id}:{peer}")
            pvd.vcs[vc.id] = VsState(vc, tracker)

    # -- measurement ---------------------------------------------------------

    def _tick(self, pvd: _PortVsVd) -> None:
        opts = self.options
        interval = self.interval_ns
        if opts.vc_rate is VcRateMethod.PER_VC_INPUT:
            for vcid, st in pvd.vcs.items():
                pvd.erica.vc_rates[vcid] = st.in_cells * 424_000.0 / interval
        elif opts.vc_rate is VcRateMethod.PER_CLASS_INPUT:
            for vcid, st in pvd.vcs.items():
                pvd.erica.vc_rates[vcid] = st.out_cells * 424_000.0 / interval
        pvd.erica.end_interval()
        for st in pvd.vcs.values():
            st.in_cells = 0
            st.out_cells = 0
        self.engine.schedule_in(self.interval_ns, lambda: self._tick(pvd))

    # -- cell handling -------------------------------------------------------

    def on_cell(self, cell: Cell, from_id: str) -> None:
        vc = self.network.vcs[cell.vc]
        if vc.cls is ServiceClass.VBR:
            peer = self.next_hop[vc.id]
            self.pstate[peer].erica.note_hp()
            self.ports[peer].send_vbr(cell)
            return
        pvd = self.pstate[self.next_hop[vc.id]]
        st = pvd.vcs[vc.id]
        if cell.kind is CellKind.DATA:
            self._vd_on_data(pvd, st, cell)
        elif cell.kind is CellKind.FRM:
            self._vd_turnaround_frm(pvd, st, cell)
        else:
            self._vs_on_brm(pvd, st, cell)

    def _vd_on_data(self, pvd: _PortVsVd, st: VsState, cell: Cell) -> None:
        st.in_cells += 1
        if self.options.input_rate is InputRateMethod.SUM_PER_VC:
            pvd.erica.note_abr(st.vc.id)
        st.q.push(cell, self.engine.now())
        if st.slot_ev is None:
            self._wake(pvd, st)

    def _vd_turnaround_frm(self, pvd: _PortVsVd, st: VsState, frm: Cell) -> None:
        opts = self.options
        st.in_cells += 1
        if opts.input_rate is InputRateMethod.SUM_PER_VC:
            pvd.erica.note_abr(st.vc.id)
        if opts.vc_rate is VcRateMethod.FRM1_CCR:
            pvd.erica.vc_rates[st.vc.id] = frm.rm.ccr
        if opts.alloc_update in (AllocUpdate.FRM_ONLY, AllocUpdate.FRM_AND_BRM):
            st.stored_val = pvd.erica.allocate(st.vc.id)
        val2 = st.stored_val if st.stored_val is not None else pvd.erica.link_rate
        brm = turnaround(frm)
        er = min(frm.rm.er, st.acr2)
        if opts.congestion in (CongestionEffect.PREV_ONLY, CongestionEffect.BOTH):
            er = min(er, val2)
        brm.rm.er = er
        self.ports[self.prev_hop[st.vc.id]].send_ctrl(brm)

    def _vs_on_brm(self, pvd: _PortVsVd, st: VsState, brm: Cell) -> None:
        opts = self.options
        if opts.alloc_update in (AllocUpdate.BRM_ONLY, AllocUpdate.FRM_AND_BRM):
            st.stored_val = pvd.erica.allocate(st.vc.id)
        val2 = st.stored_val if st.stored_val is not None else pvd.erica.link_rate
        er_eff = brm.rm.er
        if opts.congestion in (CongestionEffect.NEXT_ONLY, CongestionEffect.BOTH):
            er_eff = min(er_eff, val2)
        new = st.vc.clamp(er_eff)
        if new != st.acr2:
            st.q.acr = new
            if opts.vc_rate is VcRateMethod.FRM2_CCR:
                pvd.erica.vc_rates[st.vc.id] = new
            self._repace(pvd, st)
        # the BRM is absorbed: this is where the next loop terminates

    # -- shaping -------------------------------------------------------------

    def _wake(self, pvd: _PortVsVd, st: VsState) -> None:
        gap = cell_gap_ns(st.acr2)
        if gap is None:
            return
        now = self.engine.now()
        nxt = now if st.last_emit is None else max(now, st.last_emit + gap)
        st.slot_ev = self.engine.schedule(nxt, lambda: self._vs_slot(pvd, st))

    def _repace(self, pvd: _PortVsVd, st: VsState) -> None:
        gap = cell_gap_ns(st.acr2)
        if gap is None:
            return
        now = self.engine.now()
        nxt = now if st.last_emit is None else max(now, st.last_emit + gap)
        if st.slot_ev is None:
            if len(st.q) or st.cells_since_frm == 0:
                st.slot_ev = self.engine.schedule(
                    nxt, lambda: self._vs_slot(pvd, st))
        elif nxt < st.slot_ev.at:
            self.engine.cancel(st.slot_ev)
            st.slot_ev = self.engine.schedule(nxt, lambda: self._vs_slot(pvd, st))

    def _vs_slot(self, pvd: _PortVsVd, st: VsState) -> None:
        st.slot_ev = None
        now = self.engine.now()
        if st.cells_since_frm == 0:
            # fresh FRM for the next loop, declaring CCR = acr2
            cell = Cell(vc=st.vc.id, kind=CellKind.FRM, created_at=now,
                        rm=RmPayload(er=st.vc.pcr, ccr=st.acr2,
                                     direction=RmDir.FORWARD))
            if self.options.vc_rate is VcRateMethod.FRM2_CCR:
                pvd.erica.vc_rates[st.vc.id] = st.acr2
        elif len(st.q):
            cell = st.q.pop(now)
        else:
            return  # nothing to send; woken again by the next arrival
        st.cells_since_frm = (st.cells_since_frm + 1) % NRM
        st.last_emit = now
        st.out_cells += 1
        if self.options.input_rate is InputRateMethod.PER_CLASS:
            pvd.erica.note_abr(st.vc.id)
        self.ports[pvd.peer].send_abr(cell)
        gap = cell_gap_ns(st.acr2)
        if gap is not None:
            st.slot_ev = self.engine.schedule(now + gap,
                                              lambda: self._vs_slot(pvd, st))

    def queued_data_cells(self) -> dict[str, int]:
        counts = super().queued_data_cells()
        for pvd in self.pstate.values():
            for vcid, st in pvd.vcs.items():
                n = sum(1 for c in st.q.cells if c.kind is CellKind.DATA)
                if n:
                    counts[vcid] = counts.get(vcid, 0) + n
        return counts
