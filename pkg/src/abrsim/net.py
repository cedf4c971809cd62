"""Nodes, directed link ports, and cell delivery.

Every link is modelled as two independent directed ports (one per
endpoint).  A port serves its class queues in strict priority order:
VBR first, then backward RM feedback (kept out-of-band so rate feedback
is never stuck behind data), then the ABR class queue.  Transmission
takes one cell time at the link rate; delivery lands after the
propagation delay derived from the link length.
"""

from __future__ import annotations

from collections import deque

from abrsim.engine import Engine
from abrsim.protocol import (
    Cell,
    CellKind,
    LinkConfig,
    PerClassQueue,
    VcConfig,
    cell_gap_ns,
)


class Port:
    """One direction of a link: sender-side queues plus the wire."""

    def __init__(self, engine: Engine, network: "Network", node_id: str,
                 peer_id: str, link: LinkConfig, recorder):
        self.engine = engine
        self.network = network
        self.node_id = node_id
        self.peer_id = peer_id
        self.link = link
        self.tx_ns = cell_gap_ns(link.rate_mbps)
        self.prop_ns = link.prop_delay_ns
        self.busy = False
        self.vbr_q = PerClassQueue(f"vbr:{peer_id}")
        self.ctrl_q: deque[Cell] = deque()
        self.abr_q = PerClassQueue(
            f"abr:{peer_id}", recorder.queue_tracker(node_id, f"abr:{peer_id}")
        )

    def send_abr(self, cell: Cell) -> None:
        self.abr_q.push(cell, self.engine.now())
        if not self.busy:
            self._start_tx()

    def send_vbr(self, cell: Cell) -> None:
        self.vbr_q.push(cell, self.engine.now())
        if not self.busy:
            self._start_tx()

    def send_ctrl(self, cell: Cell) -> None:
        self.ctrl_q.append(cell)
        if not self.busy:
            self._start_tx()

    def _start_tx(self) -> None:
        now = self.engine.now()
        if len(self.vbr_q):
            cell = self.vbr_q.pop(now)
        elif self.ctrl_q:
            cell = self.ctrl_q.popleft()
        elif len(self.abr_q):
            cell = self.abr_q.pop(now)
        else:
            return
        self.busy = True
        self.engine.schedule(now + self.tx_ns, self._tx_done)
        self.network.launch(self, cell, now + self.tx_ns + self.prop_ns)

    def _tx_done(self) -> None:
        self.busy = False
        self._start_tx()

    def queued_data_cells(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for q in (self.vbr_q.cells, self.abr_q.cells, self.ctrl_q):
            for cell in q:
                if cell.kind is CellKind.DATA:
                    counts[cell.vc] = counts.get(cell.vc, 0) + 1
        return counts


class Node:
    """Base network element; subclasses implement cell handling."""

    def __init__(self, engine: Engine, network: "Network", node_id: str):
        self.engine = engine
        self.network = network
        self.id = node_id
        self.ports: dict[str, Port] = {}

    def on_cell(self, cell: Cell, from_id: str) -> None:
        raise NotImplementedError

    def queued_data_cells(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for port in self.ports.values():
            for vc, n in port.queued_data_cells().items():
                counts[vc] = counts.get(vc, 0) + n
        return counts


class Network:
    """Node registry, link wiring, and in-flight accounting."""

    def __init__(self, engine: Engine, recorder):
        self.engine = engine
        self.recorder = recorder
        self.nodes: dict[str, Node] = {}
        self.vcs: dict[str, VcConfig] = {}
        self.in_flight: dict[str, int] = {}

    def add_node(self, node: Node) -> Node:
        self.nodes[node.id] = node
        return node

    def add_vc(self, vc: VcConfig) -> None:
        self.vcs[vc.id] = vc

    def add_link(self, a: str, b: str, cfg: LinkConfig) -> None:
        na, nb = self.nodes[a], self.nodes[b]
        na.ports[b] = Port(self.engine, self, a, b, cfg, self.recorder)
        nb.ports[a] = Port(self.engine, self, b, a, cfg, self.recorder)

    def launch(self, port: Port, cell: Cell, arrive_at: int) -> None:
        if cell.kind is CellKind.DATA:
            self.in_flight[cell.vc] = self.in_flight.get(cell.vc, 0) + 1
        dest = self.nodes[port.peer_id]
        from_id = port.node_id
        self.engine.schedule(arrive_at, lambda: self._deliver(dest, cell, from_id))

    def _deliver(self, dest: Node, cell: Cell, from_id: str) -> None:
        if cell.kind is CellKind.DATA:
            self.in_flight[cell.vc] -= 1
        dest.on_cell(cell, from_id)

    def data_cells_in_network(self) -> dict[str, int]:
        """Data cells currently queued or in flight, per VC."""
        counts = {vc: n for vc, n in self.in_flight.items() if n}
        for node in self.nodes.values():
            for vc, n in node.queued_data_cells().items():
                counts[vc] = counts.get(vc, 0) + n
        return counts
