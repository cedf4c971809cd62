"""The four evaluation topologies, the max-min reference oracle, and
simulation assembly.

Link speeds are 155.52 Mbps throughout.  Wide-area links are 1000 km
(5 ms propagation); in the parking lot the sources sit at their first
switch, which makes the long S1/S2 round trip three 1000 km hops
(30 ms) and the S3 round trip two (20 ms).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from abrsim.endsystems import AbrSource, Destination, VbrSource
from abrsim.engine import MS, Engine
from abrsim.metrics import (
    DEFAULT_CONV_TOL,
    DEFAULT_CONV_WINDOW_NS,
    DEFAULT_RESPONSE_TOL,
    RunSeries,
    convergence_time_ns,
    from_recorder,
    max_queue_kcells,
    response_time_ns,
    throughput_kcells,
)
from abrsim.net import Network
from abrsim.protocol import LinkConfig, ServiceClass, VbrPattern, VcConfig
from abrsim.recorder import DEFAULT_BUCKET_NS, MetricsRecorder
from abrsim.switches import NonVsVdSwitch, VsVdOptions, VsVdSwitch

LINE_RATE = 155.52
WAN_KM = 1000.0

SCENARIO_NAMES = ("two_src_vbr", "parking_lot", "upstream_bottleneck",
                  "transient")


@dataclass
class ScenarioDef:
    name: str
    links: list[tuple[str, str, LinkConfig]]
    vcs: list[VcConfig]
    switches: list[str]
    run_until_ns: int
    metric_start_ns: int
    metric_end_ns: int
    vbr_cycle_ns: Optional[int] = None
    optimal_alloc: dict[str, float] = field(default_factory=dict)

    def abr_vcs(self) -> list[VcConfig]:
        return [vc for vc in self.vcs if vc.cls is ServiceClass.ABR]


def _wan(km: float = WAN_KM) -> LinkConfig:
    return LinkConfig(LINE_RATE, km)


def _abr(vc_id: str, path: list[str], icr: float = 10.0,
         start_at: int = 0, stop_at: Optional[int] = None) -> VcConfig:
    return VcConfig(id=vc_id, cls=ServiceClass.ABR, path=path, pcr=LINE_RATE,
                    mcr=0.0, icr=icr, start_at=start_at, stop_at=stop_at)


def _two_src_vbr() -> ScenarioDef:
    links = [
        ("S1", "SW1", _wan()), ("S2", "SW1", _wan()), ("VB", "SW1", _wan()),
        ("SW1", "SW2", _wan()),
        ("SW2", "D1", _wan()), ("SW2", "D2", _wan()), ("SW2", "DV", _wan()),
    ]
    vbr = VcConfig(id="VBR", cls=ServiceClass.VBR, path=["VB", "SW1", "SW2", "DV"],
                   pcr=LINE_RATE, icr=LINE_RATE,
                   vbr_pattern=VbrPattern(on_fraction=0.8, on_ns=20 * MS,
                                          off_ns=20 * MS))
    vcs = [_abr("S1", ["S1", "SW1", "SW2", "D1"]),
           _abr("S2", ["S2", "SW1", "SW2", "D2"]),
           vbr]
    # rate metrics are evaluated against the first VBR-OFF phase, where the
    # whole target rate is available to the two ABR sources
    return ScenarioDef(name="two_src_vbr", links=links, vcs=vcs,
                       switches=["SW1", "SW2"], run_until_ns=400 * MS,
                       metric_start_ns=20 * MS, metric_end_ns=40 * MS,
                       vbr_cycle_ns=40 * MS)


def _parking_lot() -> ScenarioDef:
    links = [
        ("S1", "SW1", _wan(0.0)), ("S2", "SW1", _wan(0.0)),
        ("S3", "SW2", _wan(0.0)),
        ("SW1", "SW2", _wan()), ("SW2", "SW3", _wan()),
        ("SW3", "D1", _wan()), ("SW3", "D2", _wan()), ("SW3", "D3", _wan()),
    ]
    # sources start at PCR: the startup transient is part of what the
    # parking-lot queue comparison measures
    vcs = [_abr("S1", ["S1", "SW1", "SW2", "SW3", "D1"], icr=LINE_RATE),
           _abr("S2", ["S2", "SW1", "SW2", "SW3", "D2"], icr=LINE_RATE),
           _abr("S3", ["S3", "SW2", "SW3", "D3"], icr=LINE_RATE)]
    return ScenarioDef(name="parking_lot", links=links, vcs=vcs,
                       switches=["SW1", "SW2", "SW3"], run_until_ns=200 * MS,
                       metric_start_ns=0, metric_end_ns=200 * MS)


def _upstream_bottleneck() -> ScenarioDef:
    links: list[tuple[str, str, LinkConfig]] = []
    vcs: list[VcConfig] = []
    for i in range(1, 15):
        links.append((f"S{i}", "SW1", _wan()))
        links.append((f"SW2", f"D{i}", _wan()))
        vcs.append(_abr(f"S{i}", [f"S{i}", "SW1", "SW2", f"D{i}"],
                        icr=LINE_RATE))
    links.append(("S15", "SW1", _wan()))
    links.append(("SW1", "SW2", _wan()))
    links.append(("SW2", "SW3", _wan()))
    for i in (15, 16, 17):
        links.append(("SW3", f"D{i}", _wan()))
    links.append(("S16", "SW2", _wan()))
    links.append(("S17", "SW2", _wan()))
    vcs.append(_abr("S15", ["S15", "SW1", "SW2", "SW3", "D15"], icr=LINE_RATE))
    vcs.append(_abr("S16", ["S16", "SW2", "SW3", "D16"], icr=LINE_RATE))
    vcs.append(_abr("S17", ["S17", "SW2", "SW3", "D17"], icr=LINE_RATE))
    return ScenarioDef(name="upstream_bottleneck", links=links, vcs=vcs,
                       switches=["SW1", "SW2", "SW3"], run_until_ns=400 * MS,
                       metric_start_ns=0, metric_end_ns=400 * MS)


def _transient() -> ScenarioDef:
    links = [
        ("S1", "SW1", _wan()), ("S2", "SW1", _wan()),
        ("SW1", "SW2", _wan()),
        ("SW2", "D1", _wan()), ("SW2", "D2", _wan()),
    ]
    # the background VC runs throughout; the transient VC is active for
    # 60 ms starting mid-run
    vcs = [_abr("S1", ["S1", "SW1", "SW2", "D1"]),
           _abr("S2", ["S2", "SW1", "SW2", "D2"], start_at=150 * MS,
                stop_at=210 * MS)]
    return ScenarioDef(name="transient", links=links, vcs=vcs,
                       switches=["SW1", "SW2"], run_until_ns=400 * MS,
                       metric_start_ns=150 * MS, metric_end_ns=210 * MS)


_BUILDERS = {
    "two_src_vbr": _two_src_vbr,
    "parking_lot": _parking_lot,
    "upstream_bottleneck": _upstream_bottleneck,
    "transient": _transient,
}


def build(name: str, target_util: float = 0.9) -> ScenarioDef:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; expected one of {SCENARIO_NAMES}"
        ) from None
    sc = builder()
    sc.optimal_alloc = maxmin_oracle(sc, target_util)
    return sc


# -- max-min reference ------------------------------------------------------

def _abr_link_topology(sc: ScenarioDef, target_util: float):
    """Directed ABR-usable capacity and per-VC link lists.

    Capacities reflect the metric phase, during which the VBR source is
    OFF in every scenario that has one.
    """
    paths: dict[str, list[tuple[str, str]]] = {}
    caps: dict[tuple[str, str], float] = {}
    rates = {}
    for a, b, cfg in sc.links:
        rates[(a, b)] = cfg.rate_mbps
        rates[(b, a)] = cfg.rate_mbps
    for vc in sc.abr_vcs():
        hops = list(zip(vc.path, vc.path[1:]))
        paths[vc.id] = hops
        for hop in hops:
            caps.setdefault(hop, target_util * rates[hop])
    return caps, paths


def maxmin_oracle(sc: ScenarioDef, target_util: float = 0.9) -> dict[str, float]:
    """Water-filling max-min fair allocation over the ABR VC paths."""
    caps, paths = _abr_link_topology(sc, target_util)
    users: dict[tuple[str, str], set[str]] = {}
    for vc, hops in paths.items():
        for hop in hops:
            users.setdefault(hop, set()).add(vc)
    alloc: dict[str, float] = {}
    active = set(paths)
    rem = dict(caps)
    while active:
        best: Optional[tuple[float, tuple[str, str]]] = None
        for link, us in users.items():
            n = sum(1 for u in us if u in active)
            if n and (best is None or rem[link] / n < best[0]):
                best = (rem[link] / n, link)
        level, link = best
        for u in sorted(users[link]):
            if u in active:
                alloc[u] = level
                active.discard(u)
                for hop in paths[u]:
                    rem[hop] -= level
    return alloc


def maxmin_progressive(sc: ScenarioDef, target_util: float = 0.9,
                       step: float = 0.01) -> dict[str, float]:
    """Independent brute-force check: raise all unfrozen VCs in small equal
    increments, freezing the users of any link that fills up."""
    caps, paths = _abr_link_topology(sc, target_util)
    alloc = {vc: 0.0 for vc in paths}
    active = set(paths)
    load = {link: 0.0 for link in caps}
    while active:
        for vc in active:
            alloc[vc] += step
            for hop in paths[vc]:
                load[hop] += step
        frozen = set()
        for link, cap in caps.items():
            if load[link] >= cap - step / 2:
                for vc in active:
                    if link in paths[vc]:
                        frozen.add(vc)
        active -= frozen
    return alloc


# -- assembly ---------------------------------------------------------------

@dataclass
class RunParams:
    target_util: float = 0.9
    interval_ns: int = MS
    bucket_ns: int = DEFAULT_BUCKET_NS
    icr_mbps: Optional[float] = None  # override every ABR VC's ICR
    response_tol: float = DEFAULT_RESPONSE_TOL
    conv_tol: float = DEFAULT_CONV_TOL
    conv_window_ns: int = DEFAULT_CONV_WINDOW_NS


class Sim:
    """One assembled simulation instance (scenario x architecture).

    `vsvd_switches` restricts which switches run the VS/VD machinery
    (None = all of them); the rest stay plain per-class FIFO switches.
    """

    def __init__(self, sc: ScenarioDef, options: Optional[VsVdOptions],
                 column: str, params: Optional[RunParams] = None,
                 vsvd_switches: Optional[set[str]] = None):
        self.sc = sc
        self.options = options
        self.column = column
        self.params = params or RunParams()
        p = self.params
        if p.icr_mbps is not None:
            for vc in sc.abr_vcs():
                vc.icr = p.icr_mbps
        self.engine = Engine()
        self.recorder = MetricsRecorder(p.bucket_ns)
        self.network = Network(self.engine, self.recorder)
        switches = []
        for sw in sc.switches:
            vsvd = options is not None and (vsvd_switches is None
                                            or sw in vsvd_switches)
            if vsvd:
                node = VsVdSwitch(self.engine, self.network, sw, self.recorder,
                                  options, p.target_util, p.interval_ns)
            else:
                node = NonVsVdSwitch(self.engine, self.network, sw,
                                     self.recorder, p.target_util, p.interval_ns)
            switches.append(self.network.add_node(node))
        for vc in sc.vcs:
            self.network.add_vc(vc)
            src_id, dst_id = vc.path[0], vc.path[-1]
            if src_id not in self.network.nodes:
                cls = VbrSource if vc.cls is ServiceClass.VBR else AbrSource
                self.network.add_node(cls(self.engine, self.network, src_id,
                                          vc, self.recorder))
            if dst_id not in self.network.nodes:
                self.network.add_node(Destination(self.engine, self.network,
                                                  dst_id, self.recorder))
        for a, b, cfg in sc.links:
            self.network.add_link(a, b, cfg)
        for sw in switches:
            for vc in sc.vcs:
                if sw.id in vc.path[1:-1]:
                    sw.attach_vc(vc)
        self._ran = False

    def run(self) -> RunSeries:
        self.engine.run_until(self.sc.run_until_ns)
        self.recorder.finalize(self.sc.run_until_ns)
        self._ran = True
        return from_recorder(self.recorder)

    def metrics(self, series: Optional[RunSeries] = None) -> dict[str, Optional[float]]:
        if series is None:
            if not self._ran:
                self.run()
            series = from_recorder(self.recorder)
        return compute_metrics(self.sc, series, self.params)

    def conservation(self) -> dict[str, tuple[int, int, int]]:
        """Per-VC (injected, delivered, still-in-network) data-cell counts;
        injected must equal delivered + in-network exactly."""
        delivered = self.recorder.delivered_counts()
        in_net = self.network.data_cells_in_network()
        out = {}
        for vc, injected in sorted(self.recorder.injected.items()):
            out[vc] = (injected, delivered.get(vc, 0), in_net.get(vc, 0))
        return out


def compute_metrics(sc: ScenarioDef, series: RunSeries,
                    params: Optional[RunParams] = None) -> dict[str, Optional[float]]:
    """Summary metrics for one run; pure function of the recorded series."""
    p = params or RunParams()
    t0, t1 = sc.metric_start_ns, sc.metric_end_ns
    resp = response_time_ns(series.acr, sc.optimal_alloc, p.response_tol, t0, t1)
    conv = convergence_time_ns(series.acr, sc.optimal_alloc, p.conv_tol,
                               p.conv_window_ns, t0, t1)
    before = (t0 + conv) if conv is not None else sc.run_until_ns
    out: dict[str, Optional[float]] = {
        "response_ms": None if resp is None else resp / MS,
        "convergence_ms": None if conv is None else conv / MS,
        "max_queue_kcells": max_queue_kcells(series.queue_rows, before,
                                             series.bucket_ns),
    }
    for vc in sc.abr_vcs():
        out[f"throughput_kcells:{vc.id}"] = throughput_kcells(
            series.delivered, vc.id)
        out[f"optimal_mbps:{vc.id}"] = sc.optimal_alloc[vc.id]
    return out
