"""ABR source/destination end systems and the ON/OFF VBR background source.

Sources are greedy: they always have data and pace cells at exactly
their Allowed Cell Rate, inserting one in-rate FRM every NRM-th cell.
The ACR update on backward RM feedback is pure explicit-rate,
acr = clamp(er, mcr, pcr); there are no additive increase/decrease
factors, so the allocation dynamics of the switch scheme stay visible.
"""

from __future__ import annotations

from abrsim.net import Network, Node
from abrsim.protocol import (
    Cell,
    CellKind,
    NRM,
    ServiceClass,
    VcConfig,
    cell_gap_ns,
    make_frm,
    turnaround,
)


class AbrSource(Node):
    """Greedy rate-paced ABR source for a single VC."""

    def __init__(self, engine, network: Network, node_id: str, vc: VcConfig,
                 recorder):
        super().__init__(engine, network, node_id)
        assert vc.cls is ServiceClass.ABR
        self.vc = vc
        self.recorder = recorder
        self.acr = vc.icr
        self.cells_since_frm = 0
        self.data_seq = 0
        self.max_brm_er = 0.0  # for ER-monotonicity checks (ER written = PCR)
        self.last_emit: int | None = None
        self._slot_ev = None
        engine.schedule(vc.start_at, self._start)

    def _start(self) -> None:
        self.recorder.acr_sample(self.engine.now(), self.vc.id, self.acr)
        self._slot()

    def _stopped(self) -> bool:
        return self.vc.stop_at is not None and self.engine.now() >= self.vc.stop_at

    def _slot(self) -> None:
        self._slot_ev = None
        if self._stopped():
            return
        now = self.engine.now()
        if self.cells_since_frm == 0:
            cell = make_frm(self.vc, self.acr, now)
        else:
            cell = Cell(vc=self.vc.id, kind=CellKind.DATA, created_at=now,
                        seq=self.data_seq)
            self.data_seq += 1
            self.recorder.count_injected(self.vc.id)
        self.cells_since_frm = (self.cells_since_frm + 1) % NRM
        self.last_emit = now
        self.ports[self.vc.path[1]].send_abr(cell)
        gap = cell_gap_ns(self.acr)
        if gap is not None:
            self._slot_ev = self.engine.schedule(now + gap, self._slot)

    def on_cell(self, cell: Cell, from_id: str) -> None:
        if cell.kind is CellKind.BRM:
            self.on_brm(cell)
        # anything else delivered to a source is dropped

    def on_brm(self, brm: Cell) -> None:
        if brm.rm.er > self.max_brm_er:
            self.max_brm_er = brm.rm.er
        new = self.vc.clamp(brm.rm.er)
        if new != self.acr:
            self.acr = new
            self.recorder.acr_sample(self.engine.now(), self.vc.id, new)
            self._repace()

    def _repace(self) -> None:
        if self._stopped():
            return
        gap = cell_gap_ns(self.acr)
        if gap is None:
            return  # source idles until feedback raises the rate again
        now = self.engine.now()
        nxt = now if self.last_emit is None else max(now, self.last_emit + gap)
        if self._slot_ev is None:
            if now >= self.vc.start_at:
                self._slot_ev = self.engine.schedule(nxt, self._slot)
        elif nxt < self._slot_ev.at:
            self.engine.cancel(self._slot_ev)
            self._slot_ev = self.engine.schedule(nxt, self._slot)


class Destination(Node):
    """Absorbs data, turns FRMs around as BRMs with zero processing delay."""

    def __init__(self, engine, network: Network, node_id: str, recorder):
        super().__init__(engine, network, node_id)
        self.recorder = recorder
        self.frm_turned = 0
        self._expected_seq: dict[str, int] = {}

    def on_cell(self, cell: Cell, from_id: str) -> None:
        if cell.kind is CellKind.DATA:
            want = self._expected_seq.get(cell.vc, 0)
            assert cell.seq == want, (
                f"{cell.vc}: per-VC FIFO violated at {self.id}: "
                f"got seq {cell.seq}, expected {want}")
            self._expected_seq[cell.vc] = want + 1
            self.recorder.count_delivered(self.engine.now(), cell.vc)
        elif cell.kind is CellKind.FRM:
            self.frm_turned += 1
            self.ports[from_id].send_ctrl(turnaround(cell))
        # BRMs reaching a destination (bi-directional VCs) are absorbed


class VbrSource(Node):
    """High-priority ON/OFF source: on_fraction of the link rate while ON."""

    def __init__(self, engine, network: Network, node_id: str, vc: VcConfig,
                 recorder):
        super().__init__(engine, network, node_id)
        assert vc.cls is ServiceClass.VBR and vc.vbr_pattern is not None
        self.vc = vc
        self.recorder = recorder
        self.pattern = vc.vbr_pattern
        self.data_seq = 0
        engine.schedule(vc.start_at, self._slot)

    def _slot(self) -> None:
        now = self.engine.now()
        if self.vc.stop_at is not None and now >= self.vc.stop_at:
            return
        pat = self.pattern
        on_rate = pat.on_fraction * self.ports[self.vc.path[1]].link.rate_mbps
        gap = cell_gap_ns(on_rate)
        if gap is None:
            return  # fraction 0: silent source
        phase = (now - self.vc.start_at) % pat.period_ns
        if phase < pat.on_ns:
            cell = Cell(vc=self.vc.id, kind=CellKind.DATA, created_at=now,
                        seq=self.data_seq)
            self.data_seq += 1
            self.recorder.count_injected(self.vc.id)
            self.ports[self.vc.path[1]].send_vbr(cell)
            self.engine.schedule(now + gap, self._slot)
        else:
            self.engine.schedule(now + (pat.period_ns - phase), self._slot)

    def on_cell(self, cell: Cell, from_id: str) -> None:
        pass  # nothing is addressed to a VBR source
