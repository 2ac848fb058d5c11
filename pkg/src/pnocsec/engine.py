"""Cycle-level simulation of reservation-slot / data-slot transfers.

Timing of one channel traversal granted at cycle ``t``::

    t                   reservation slot (metadata broadcast, key lookup)
    t+1 [+1]            XOR encryption stage on secured channels
    m .. m+S-1          serialisation, S = packet_bits / wavelengths
    m+S+P               light reaches the far end, P = traversal cycles
    +1                  XOR decryption stage on secured channels

A channel grants a new reservation every S cycles at most, so reservation
and data phases of consecutive packets overlap. Encryption shifts every
slot of a secured channel by the same cycle and therefore never changes
the order in which packets win the channel.
"""

from __future__ import annotations

import enum
import heapq
import math
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .cipher import CommType, Metadata, Packet, select_key
from .fabric import Channel, Fabric, FabricError, attach_ramps, secure
from .keyforge import KeyRing, build_keystores
from .photonics import (EnergyParams, LossParams, electrical_energy, fabric_laser_power,
                        packet_energy, static_power)
from .pvmap import DieSpec, PvMap, PvParams, generate_pv_map


class SimulationStalled(RuntimeError):
    pass


class ProtocolViolation(RuntimeError):
    pass


class TraceFormatError(ValueError):
    def __init__(self, lineno: int, line: str, why: str):
        super().__init__(f"trace line {lineno}: {why}: {line.strip()!r}")
        self.lineno = lineno


class TrafficMode(str, enum.Enum):
    UNIFORM = "synthetic_uniform"
    HOTSPOT = "synthetic_hotspot"
    TRACE = "trace_file"


@dataclass(frozen=True)
class TraceEvent:
    cycle: int
    src: int
    dsts: tuple[int, ...]
    comm_type: CommType


@dataclass
class TrafficSpec:
    mode: TrafficMode = TrafficMode.UNIFORM
    injection_rate: float = 0.01
    multicast_fraction: float = 0.0
    trace_path: str | None = None
    trace: list | None = None
    hotspot: int = 0
    hotspot_fraction: float = 0.25
    sources: tuple | None = None
    destinations: tuple | None = None

    def __post_init__(self):
        self.mode = TrafficMode(self.mode)
        for name in ("injection_rate", "multicast_fraction", "hotspot_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.mode is TrafficMode.TRACE and self.trace is None and self.trace_path is None:
            raise ValueError("trace mode needs trace_path or trace events")


_TRACE_RE = re.compile(r"^\s*(\d+)\s+(\d+)\s+\{\s*(\d+(?:\s*,\s*\d+)*)\s*\}\s+([UM])\s*$")


def parse_trace(lines: Iterable[str]) -> list[TraceEvent]:
    """Parse ``<cycle> <src> {<dst>[,<dst>...]} <U|M>`` lines; ``#`` starts a comment."""
    events = []
    last = -1
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _TRACE_RE.match(line)
        if not m:
            raise TraceFormatError(lineno, raw, "malformed record")
        cycle, src = int(m.group(1)), int(m.group(2))
        dsts = tuple(int(d) for d in m.group(3).split(","))
        kind = CommType.UNICAST if m.group(4) == "U" else CommType.MULTICAST
        if cycle < last:
            raise TraceFormatError(lineno, raw, "cycles must be non-decreasing")
        if len(set(dsts)) != len(dsts):
            raise TraceFormatError(lineno, raw, "duplicate destination")
        if kind is CommType.UNICAST and len(dsts) != 1:
            raise TraceFormatError(lineno, raw, "unicast record with several destinations")
        if kind is CommType.MULTICAST and len(dsts) < 2:
            raise TraceFormatError(lineno, raw, "multicast record needs two or more destinations")
        last = cycle
        events.append(TraceEvent(cycle, src, dsts, kind))
    return events


def load_trace(path) -> list[TraceEvent]:
    with open(path) as fh:
        return parse_trace(fh)


class TrafficGenerator:
    """Packet source for one run.

    Synthetic modes inject Bernoulli traffic: each source endpoint injects
    with probability ``injection_rate`` per cycle, realised by drawing
    geometric gaps so idle cycles can be skipped.
    """

    def __init__(self, spec: TrafficSpec, fabric: Fabric, rng: np.random.Generator):
        self.spec = spec
        self.fabric = fabric
        self.rng = rng
        self._next_id = 0
        writers = {g for ch in fabric.channels for g in ch.sources}
        eps = fabric.endpoints
        srcs = spec.sources if spec.sources is not None else [e.id for e in eps if e.gateway in writers]
        dset = spec.destinations if spec.destinations is not None else [e.id for e in eps]
        self.targets = {}
        for s in srcs:
            sg = eps[s].gateway
            self.targets[s] = np.array([d for d in dset if d != s and (
                eps[d].gateway == sg or (sg, eps[d].gateway) in fabric.unicast_channel)], dtype=int)
        self.sources = [s for s in srcs if len(self.targets[s])]
        self._heap: list = []
        self._trace: deque = deque()
        if spec.mode is TrafficMode.TRACE:
            events = spec.trace if spec.trace is not None else load_trace(spec.trace_path)
            self._trace = deque(events)
        elif spec.injection_rate > 0:
            for s in self.sources:
                heapq.heappush(self._heap, (int(rng.geometric(spec.injection_rate)) - 1, s))

    @property
    def exhausted(self) -> bool:
        if self.spec.mode is TrafficMode.TRACE:
            return not self._trace
        return not self._heap

    def next_cycle(self) -> float:
        if self._trace:
            return self._trace[0].cycle
        if self._heap:
            return self._heap[0][0]
        return math.inf

    def _payload(self) -> int:
        return int.from_bytes(self.rng.bytes(64), "big")

    def _packet(self, cycle, src, dsts, kind) -> Packet:
        p = Packet(payload=self._payload(), src=src, dst_set=frozenset(dsts), comm_type=kind,
                   created_cycle=cycle, id=self._next_id)
        self._next_id += 1
        return p

    def _pick_unicast(self, src) -> int:
        cand = self.targets[src]
        spec = self.spec
        if spec.mode is TrafficMode.HOTSPOT and spec.hotspot in cand and self.rng.random() < spec.hotspot_fraction:
            return int(spec.hotspot)
        return int(cand[self.rng.integers(len(cand))])

    def _pick_multicast(self, src):
        fab = self.fabric
        sg = fab.endpoints[src].gateway
        cid = fab.multicast_channel.get(sg)
        if cid is None:
            return None
        reach = fab.channels[cid].reachable(sg)
        if len(reach) < 2:
            return None
        k = int(self.rng.integers(2, min(4, len(reach)) + 1))
        gws = self.rng.choice(len(reach), size=k, replace=False)
        by_gw = {}
        for e in fab.endpoints:
            by_gw.setdefault(e.gateway, []).append(e.id)
        return tuple(int(by_gw[reach[g]][self.rng.integers(len(by_gw[reach[g]]))]) for g in sorted(gws))

    def generate(self, cycle: int) -> list[Packet]:
        out = []
        if self.spec.mode is TrafficMode.TRACE:
            while self._trace and self._trace[0].cycle == cycle:
                ev = self._trace.popleft()
                out.append(self._packet(cycle, ev.src, ev.dsts, ev.comm_type))
            return out
        while self._heap and self._heap[0][0] == cycle:
            _, s = heapq.heappop(self._heap)
            dsts = None
            if self.spec.multicast_fraction and self.rng.random() < self.spec.multicast_fraction:
                dsts = self._pick_multicast(s)
            if dsts is None:
                out.append(self._packet(cycle, s, (self._pick_unicast(s),), CommType.UNICAST))
            else:
                out.append(self._packet(cycle, s, dsts, CommType.MULTICAST))
            heapq.heappush(self._heap, (cycle + int(self.rng.geometric(self.spec.injection_rate)), s))
        return out


def generate_traffic(spec: TrafficSpec, fabric: Fabric, cycles: int, seed: int = 0) -> list[Packet]:
    """All packets a generator produces over ``cycles`` cycles."""
    gen = TrafficGenerator(spec, fabric, np.random.default_rng(seed))
    out = []
    for c in range(cycles):
        out.extend(gen.generate(c))
    return out


# -- slots -----------------------------------------------------------------

class Phase(str, enum.Enum):
    RESERVATION = "reservation"
    DATA = "data"


@dataclass(frozen=True)
class SlotState:
    phase: Phase
    owner: int | None
    announced: frozenset = frozenset()
    on_reservation_waveguide: bool = False
    cycle: int = 0

    @property
    def idle(self) -> bool:
        return self.owner is None


def announce(ch: Channel, owner: int | None, targets: Iterable[int], comm_type: CommType | None,
             cycle: int = 0) -> SlotState:
    """Metadata wavelengths the slot winner asserts for its targets."""
    if owner is None:
        return SlotState(Phase.RESERVATION, None, frozenset(), ch.ramps is not None, cycle)
    lams = set()
    for g in targets:
        if ch.ramps is not None:
            sel, typ = ch.ramps.pair_for(g)
            lams.add(sel)
            if comm_type is CommType.MULTICAST:
                lams.add(typ)
        else:
            lams.add(ch.in_band_wavelength(g))
    return SlotState(Phase.RESERVATION, owner, frozenset(lams), ch.ramps is not None, cycle)


def observed_metadata(ch: Channel, slot: SlotState, gateway: int) -> Metadata | None:
    """What a destination's own detectors tell it about the coming data slot."""
    if slot.idle:
        return None
    if ch.ramps is not None:
        sel, typ = ch.ramps.pair_for(gateway)
        if sel not in slot.announced:
            return None
        kind = CommType.MULTICAST if typ in slot.announced else CommType.UNICAST
        return Metadata(gateway, kind)
    lam = ch.in_band_wavelength(gateway)
    if lam not in slot.announced:
        return None
    kind = CommType.MULTICAST if len(slot.announced) > 1 else CommType.UNICAST
    return Metadata(gateway, kind)


def decode_in_band(ch: Channel, slot: SlotState) -> tuple[tuple[int, ...], CommType] | None:
    """Full target list readable from an in-band reservation slot."""
    if slot.idle or slot.on_reservation_waveguide:
        return None
    targets = tuple(g for g in ch.destinations if ch.in_band_wavelength(g) in slot.announced)
    kind = CommType.MULTICAST if len(targets) > 1 else CommType.UNICAST
    return targets, kind


class SlotObservation(NamedTuple):
    cycle: int
    channel: Channel
    slot: SlotState
    wire: int
    plaintext: int
    truth: Metadata
    receivers: tuple
    secured: bool
    packet_id: int


@dataclass
class Leg:
    packet: "Flight"
    index: int
    channel: int
    from_gw: int
    targets: tuple[int, ...]
    ready: int


@dataclass
class Flight:
    packet: Packet
    measured: bool
    legs: list
    electrical_hops: int
    receivers: dict = field(default_factory=dict)  # endpoint -> delivery cycle
    secured_legs: int = 0
    energy_J: float = 0.0
    payload_ok: bool = True


class ChannelArbiter:
    """Rotating-token arbitration and slot timing for one channel."""

    def __init__(self, ch: Channel, packet_bits: int, encrypted: bool):
        self.ch = ch
        self.serialization = int(math.ceil(packet_bits / ch.n_wavelengths))
        self.cipher_stage = 1 if encrypted else 0
        self.encrypted = encrypted
        self.queues = {s: deque() for s in ch.sources}
        self.order = list(ch.sources)
        self.pointer = 0
        self.next_grant = 0
        self.pending = 0
        self.busy_cycles = 0

    def push(self, leg: Leg):
        self.queues[leg.from_gw].append(leg)
        self.pending += 1

    def reservation_phase(self, cycle: int) -> tuple[SlotState, Leg | None]:
        if cycle < self.next_grant or not self.pending:
            return announce(self.ch, None, (), None, cycle), None
        n = len(self.order)
        for k in range(n):
            src = self.order[(self.pointer + k) % n]
            q = self.queues[src]
            if q and q[0].ready <= cycle:
                leg = q.popleft()
                self.pending -= 1
                self.pointer = (self.pointer + k + 1) % n
                self.next_grant = cycle + self.serialization
                self.busy_cycles += self.serialization
                kind = leg.packet.packet.comm_type
                return announce(self.ch, src, leg.targets, kind, cycle), leg
        return announce(self.ch, None, (), None, cycle), None

    def earliest_ready(self) -> float:
        best = math.inf
        for q in self.queues.values():
            if q:
                best = min(best, q[0].ready)
        return max(best, self.next_grant)


def data_phase(ch: Channel, slot: SlotState, wire: int, keys: KeyRing | None,
               receivers: Iterable[int], encrypted: bool) -> dict[int, int]:
    """Each announced receiver reads its metadata, picks its key and recovers the payload."""
    out = {}
    for g in receivers:
        meta = observed_metadata(ch, slot, g)
        if meta is None:
            raise ProtocolViolation(f"gateway {g} received data on channel {ch.id} without metadata")
        if encrypted:
            out[g] = wire ^ select_key(keys.destination(ch.id, g), meta)
        else:
            out[g] = wire
    return out


# -- configuration and report ----------------------------------------------

@dataclass
class SimConfig:
    fabric: Fabric
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    clock_ghz: float = 5.0
    packet_bits: int = 512
    secured_channels: Iterable[int] | None = None
    pdes_enabled: bool = False
    ramps_enabled: bool = False
    warmup_cycles: int = 0
    measured_packets: int = 1000
    seed: int = 0
    pv_map: PvMap | None = None
    pv_params: PvParams = field(default_factory=PvParams)
    key_seed: int | None = None
    loss: LossParams = field(default_factory=LossParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    attackers: list = field(default_factory=list)
    stall_cycles: int = 200_000
    max_cycles: int = 50_000_000

    def __post_init__(self):
        if self.measured_packets <= 0:
            raise ValueError("measured_packets must be positive")
        ids = set(range(len(self.fabric.channels)))
        if self.secured_channels is not None:
            sc = set(self.secured_channels)
            if not sc <= ids:
                raise ValueError(f"secured channels {sorted(sc - ids)} not in fabric")
            self.secured_channels = frozenset(sc)

    def effective_secured(self) -> frozenset:
        if self.secured_channels is None:
            return frozenset(range(len(self.fabric.channels)))
        return self.secured_channels


def effective_fabric(cfg: SimConfig) -> Fabric:
    """The fabric as deployed: encryption flags and reservation waveguides applied."""
    chosen = cfg.effective_secured()
    fab = cfg.fabric
    if cfg.pdes_enabled:
        fab = secure(fab, chosen, ramps=cfg.ramps_enabled)
    elif cfg.ramps_enabled:
        from dataclasses import replace
        fab = replace(fab, channels=tuple(
            attach_ramps(c) if c.id in chosen and c.ramps is None else c for c in fab.channels))
    return fab


@dataclass
class DeliveredPacket:
    id: int
    src: int
    dsts: tuple
    comm_type: CommType
    created: int
    delivered: int
    legs: tuple  # (channel, encrypted) per traversal
    electrical_hops: int
    energy_J: float
    payload_ok: bool

    @property
    def latency(self) -> int:
        return self.delivered - self.created


@dataclass
class RunReport:
    avg_latency_cycles: float
    latency_histogram: dict
    packets_injected: int
    packets_delivered: int
    packets_in_flight: int
    measured_delivered: int
    empty_measurement: bool
    window_cycles: int
    dynamic_energy_J: float
    static_power_W: float
    static_energy_J: float
    total_energy_J: float
    edp_Js: float
    laser_photonic_W: float
    laser_electrical_W: float
    channel_utilization: dict
    integrity_failures: int
    mean_traversals: float
    clock_ghz: float
    end_cycle: int
    records: list = field(default_factory=list, repr=False)
    security: list = field(default_factory=list)

    def summary_row(self) -> dict:
        row = {
            "avg_latency_cycles": self.avg_latency_cycles,
            "packets_injected": self.packets_injected,
            "packets_delivered": self.packets_delivered,
            "measured_delivered": self.measured_delivered,
            "window_cycles": self.window_cycles,
            "dynamic_energy_J": self.dynamic_energy_J,
            "static_power_W": self.static_power_W,
            "static_energy_J": self.static_energy_J,
            "total_energy_J": self.total_energy_J,
            "edp_Js": self.edp_Js,
            "laser_photonic_W": self.laser_photonic_W,
            "laser_electrical_W": self.laser_electrical_W,
            "integrity_failures": self.integrity_failures,
            "mean_traversals": self.mean_traversals,
        }
        for sec in self.security:
            row.update(sec.as_row())
        return row


def run(cfg: SimConfig) -> RunReport:
    fab = effective_fabric(cfg)
    encrypted = {ch.id for ch in fab.channels if ch.secured}
    pv = cfg.pv_map
    if pv is None:
        pv = generate_pv_map(cfg.seed, DieSpec(fab.die.edge_mm, fab.die.grid_n), cfg.pv_params)
    keys = build_keystores(fab, pv, cfg.key_seed if cfg.key_seed is not None else cfg.seed,
                           channels=sorted(encrypted)) if encrypted else None
    rng = np.random.default_rng(cfg.seed)
    gen = TrafficGenerator(cfg.traffic, fab, rng)
    arbiters = [ChannelArbiter(ch, cfg.packet_bits, ch.id in encrypted) for ch in fab.channels]
    for a in cfg.attackers:
        a.bind(fab, keys, cfg.seed)
    hop = fab.electrical_hop_cycles
    eps = fab.endpoints
    events: list = []  # (cycle, seq, kind, payload)
    seq = 0
    injected = delivered = in_flight = 0
    measured_created = measured_done = 0
    records: list[DeliveredPacket] = []
    integrity_failures = 0
    last_progress = 0
    end_cycle = cfg.warmup_cycles
    t = 0

    def push(when, kind, obj):
        nonlocal seq
        heapq.heappush(events, (when, seq, kind, obj))
        seq += 1

    def launch(flight: Flight, index: int, when: int):
        leg = flight.legs[index]
        leg.ready = when
        push(when, "ready", leg)

    while True:
        # Injection.
        for p in gen.generate(t):
            injected += 1
            in_flight += 1
            measured = t >= cfg.warmup_cycles and measured_created < cfg.measured_packets
            if measured:
                measured_created += 1
            src_ep = eps[p.src]
            if p.comm_type is CommType.MULTICAST:
                sg = src_ep.gateway
                cid = fab.multicast_channel[sg]
                tg = tuple(sorted({eps[d].gateway for d in p.dst_set}))
                if any(g not in fab.channels[cid].reachable(sg) for g in tg):
                    raise FabricError(f"multicast {p.id} targets gateways off channel {cid}")
                hops = src_ep.access_hops + max(eps[d].access_hops for d in p.dst_set)
                flight = Flight(p, measured, [], hops)
                flight.legs.append(Leg(flight, 0, cid, sg, tg, 0))
            else:
                (dst,) = p.dst_set
                route = fab.route(p.src, dst)
                flight = Flight(p, measured, [], route.electrical_hops)
                for i, (cid, a, b) in enumerate(route.legs):
                    flight.legs.append(Leg(flight, i, cid, a, (b,), 0))
            if flight.legs:
                launch(flight, 0, t + src_ep.access_hops * hop)
            else:
                for d in p.dst_set:
                    flight.receivers[d] = t + flight.electrical_hops * hop
                push(t + flight.electrical_hops * hop, "deliver", flight)

        # Timed events due now.
        while events and events[0][0] <= t:
            _, _, kind, obj = heapq.heappop(events)
            if kind == "ready":
                arbiters[obj.channel].push(obj)
            else:
                in_flight -= 1
                delivered += 1
                last_progress = t
                rec = _finish(obj, cfg)
                if not obj.payload_ok:
                    integrity_failures += 1
                if obj.measured:
                    records.append(rec)
                    measured_done += 1
                    end_cycle = max(end_cycle, rec.delivered)

        # Arbitration and data slots.
        for arb in arbiters:
            if not arb.pending or t < arb.next_grant:
                continue
            slot, leg = arb.reservation_phase(t)
            if leg is None:
                continue
            _transmit(cfg, fab, keys, arb, slot, leg, t, push, launch)

        if measured_done >= cfg.measured_packets:
            break
        if in_flight == 0 and gen.exhausted:
            break
        if in_flight and t - last_progress > cfg.stall_cycles:
            raise SimulationStalled(
                f"no delivery for {cfg.stall_cycles} cycles at cycle {t} with {in_flight} packets in flight")
        if t > cfg.max_cycles:
            raise SimulationStalled(f"exceeded max_cycles={cfg.max_cycles}")

        nxt = min(gen.next_cycle(), events[0][0] if events else math.inf,
                  min((a.earliest_ready() for a in arbiters if a.pending), default=math.inf))
        if nxt is math.inf:
            break
        t = max(t + 1, int(nxt))

    return _report(cfg, fab, pv, arbiters, records, injected, delivered, in_flight,
                   integrity_failures, end_cycle)


def _transmit(cfg, fab, keys, arb: ChannelArbiter, slot: SlotState, leg: Leg, t, push, launch):
    ch = arb.ch
    flight = leg.packet
    p = flight.packet
    kind = p.comm_type
    target = leg.targets[0] if kind is CommType.UNICAST else -1
    truth = Metadata(target, kind)
    if arb.encrypted:
        key = select_key(keys.source(ch.id, leg.from_gw), truth)
        wire = p.payload ^ key
        flight.secured_legs += 1
    else:
        wire = p.payload
    start = t + 1 + arb.cipher_stage
    arrive = start + arb.serialization + ch.traversal_cycles
    done = arrive + arb.cipher_stage
    data_slot = SlotState(Phase.DATA, slot.owner, slot.announced, slot.on_reservation_waveguide, start)
    recovered = data_phase(ch, data_slot, wire, keys, leg.targets, arb.encrypted)
    if any(v != p.payload for v in recovered.values()):
        flight.payload_ok = False
    obs = SlotObservation(start, ch, slot, wire, p.payload, truth, leg.targets, arb.encrypted, p.id)
    for a in cfg.attackers:
        a.observe(obs)
    hops = flight.electrical_hops if leg.index == 0 else 0
    flight.energy_J += packet_energy(cfg.packet_bits, cfg.energy, arb.encrypted, 0)
    if hops:
        flight.energy_J += electrical_energy(cfg.packet_bits, cfg.energy, hops)
    if leg.index + 1 < len(flight.legs):
        launch(flight, leg.index + 1, done + fab.relay_cycles)
        return
    eps = fab.endpoints
    last = 0
    for d in p.dst_set:
        when = done + eps[d].access_hops * fab.electrical_hop_cycles
        flight.receivers[d] = when
        last = max(last, when)
    push(last, "deliver", flight)


def _finish(flight: Flight, cfg: SimConfig) -> DeliveredPacket:
    p = flight.packet
    if not flight.legs:
        flight.energy_J = electrical_energy(cfg.packet_bits, cfg.energy, flight.electrical_hops)
    return DeliveredPacket(
        id=p.id, src=p.src, dsts=tuple(sorted(p.dst_set)), comm_type=p.comm_type,
        created=p.created_cycle, delivered=max(flight.receivers.values()),
        legs=tuple((lg.channel, None) for lg in flight.legs), electrical_hops=flight.electrical_hops,
        energy_J=flight.energy_J, payload_ok=flight.payload_ok)


def _report(cfg, fab, pv, arbiters, records, injected, delivered, in_flight, integrity_failures,
            end_cycle) -> RunReport:
    enc = {a.ch.id: a.encrypted for a in arbiters}
    for r in records:
        r.legs = tuple((cid, enc[cid]) for cid, _ in r.legs)
    n = len(records)
    lat = [r.latency for r in records]
    avg = float(np.mean(lat)) if n else 0.0
    clock_hz = cfg.clock_ghz * 1e9
    window = max(0, end_cycle - cfg.warmup_cycles) if n else 0
    p_static = static_power(fab, pv, cfg.energy, cfg.loss)
    laser_ph, laser_el = fabric_laser_power(fab, cfg.loss)
    dyn = float(sum(r.energy_J for r in records))
    st = p_static * window / clock_hz
    total = dyn + st
    util = {a.ch.id: (a.busy_cycles / max(1, end_cycle)) for a in arbiters}
    rep = RunReport(
        avg_latency_cycles=avg,
        latency_histogram=dict(sorted(Counter(lat).items())),
        packets_injected=injected,
        packets_delivered=delivered,
        packets_in_flight=in_flight,
        measured_delivered=n,
        empty_measurement=n == 0,
        window_cycles=window,
        dynamic_energy_J=dyn,
        static_power_W=p_static,
        static_energy_J=st,
        total_energy_J=total,
        edp_Js=total * avg / clock_hz,
        laser_photonic_W=laser_ph,
        laser_electrical_W=laser_el,
        channel_utilization=util,
        integrity_failures=integrity_failures,
        mean_traversals=float(np.mean([len(r.legs) for r in records])) if n else 0.0,
        clock_ghz=cfg.clock_ghz,
        end_cycle=end_cycle,
        records=records,
    )
    rep.security = [a.report() for a in cfg.attackers]
    return rep
