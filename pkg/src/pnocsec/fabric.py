"""Photonic NoC topologies: gateways, channels, MR banks and reservation waveguides.

Three crossbar families are provided (Firefly-style SWMR, SwiftNoC-style MWMR
and LumiNoC-style row/column MWMR) plus a single generic channel. Builders
take a scale argument so the same code yields the full 256-core layouts and
small desk-sized variants.

Waveguides follow Manhattan serpentine routes over the die. Each bank of
rings sits at its gateway's tap on the route; the loss model only needs the
arc length, the bend count and the number of rings a signal passes.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .pvmap import DieSpec

DOUBLE_MRS_PER_RESERVATION = 64
MR_PITCH_MM = 0.025
CHANNEL_OFFSET_MM = 0.04
WAVEGUIDE_OFFSET_MM = 0.005


class FabricError(ValueError):
    """Structurally invalid topology."""


class ScalabilityError(FabricError):
    """Too many destinations for two metadata wavelengths each."""


class ChannelKind(str, enum.Enum):
    SWMR = "swmr"
    MWMR = "mwmr"


@dataclass(frozen=True)
class Gateway:
    id: int
    cluster: int
    position_mm: tuple[float, float]


@dataclass(frozen=True)
class Endpoint:
    """A traffic endpoint (core or concentrated node) behind a gateway."""
    id: int
    gateway: int
    access_hops: int


@dataclass(frozen=True)
class Tap:
    gateway: int
    arc_mm: float
    bends: int
    position_mm: tuple[float, float]


@dataclass(frozen=True)
class ReservationWaveguide:
    metadata_wavelengths: tuple[tuple[int, int], ...]
    destinations: tuple[int, ...]
    arc_mm: float
    position_mm: tuple[float, float]
    double_mr_count: int = DOUBLE_MRS_PER_RESERVATION

    @property
    def metadata_detector_count(self) -> int:
        return 2 * len(self.metadata_wavelengths)

    def pair_for(self, gateway: int) -> tuple[int, int]:
        return self.metadata_wavelengths[self.destinations.index(gateway)]


@dataclass(frozen=True)
class Channel:
    id: int
    kind: ChannelKind
    sources: tuple[int, ...]
    destinations: tuple[int, ...]
    source_taps: tuple[Tap, ...]
    dest_taps: tuple[Tap, ...]
    length_mm: float
    traversal_cycles: int
    waveguide_wavelengths: tuple[int, ...] = (64,)
    n_wavelengths: int = 64
    ramps_arc_mm: float = 0.0
    ramps_position_mm: tuple[float, float] = (0.0, 0.0)
    ramps: ReservationWaveguide | None = None
    secured: bool = False
    label: str = ""

    def __post_init__(self):
        if self.kind is ChannelKind.SWMR and len(self.sources) != 1:
            raise FabricError(f"SWMR channel {self.id} needs exactly one source")
        if not self.sources:
            raise FabricError(f"channel {self.id} has no sources")
        if self.ramps is not None and 2 * len(self.destinations) > self.n_wavelengths:
            raise ScalabilityError(
                f"channel {self.id}: {len(self.destinations)} destinations exceed "
                f"{self.n_wavelengths // 2} (two metadata wavelengths each)")

    @property
    def n_waveguides(self) -> int:
        return len(self.waveguide_wavelengths)

    def source_tap(self, gateway: int) -> Tap:
        return self.source_taps[self.sources.index(gateway)]

    def dest_tap(self, gateway: int) -> Tap:
        return self.dest_taps[self.destinations.index(gateway)]

    def reachable(self, source: int) -> tuple[int, ...]:
        """Destinations a source can address on this channel (never itself)."""
        return tuple(d for d in self.destinations if d != source)

    def rom_entries(self, source: int) -> int:
        return len(self.reachable(source)) + 1

    def in_band_wavelength(self, gateway: int) -> int:
        """Reservation selection wavelength when metadata rides the data waveguide."""
        return self.destinations.index(gateway)


@dataclass(frozen=True)
class Route:
    electrical_hops: int
    legs: tuple[tuple[int, int, int], ...]  # (channel, from gateway, to gateway)


@dataclass(frozen=True)
class Fabric:
    name: str
    die: DieSpec
    gateways: tuple[Gateway, ...]
    channels: tuple[Channel, ...]
    endpoints: tuple[Endpoint, ...]
    unicast_channel: dict = field(default_factory=dict, compare=False)
    multicast_channel: dict = field(default_factory=dict, compare=False)
    electrical_hop_cycles: int = 2
    relay_cycles: int = 1

    def channel(self, cid: int) -> Channel:
        return self.channels[cid]

    def gateway_of(self, endpoint: int) -> int:
        return self.endpoints[endpoint].gateway

    def route(self, src: int, dst: int) -> Route:
        """Unicast route between two endpoints."""
        a, b = self.endpoints[src], self.endpoints[dst]
        hops = a.access_hops + b.access_hops
        if a.gateway == b.gateway:
            return Route(hops, ())
        legs = []
        here = a.gateway
        for cid, nxt in self.unicast_channel[(a.gateway, b.gateway)]:
            legs.append((cid, here, nxt))
            here = nxt
        return Route(hops, tuple(legs))

    # -- structure ---------------------------------------------------------

    def audit(self) -> dict:
        per_channel = []
        for ch in self.channels:
            per_channel.append({
                "id": ch.id,
                "label": ch.label,
                "kind": ch.kind.value,
                "sources": len(ch.sources),
                "destinations": len(ch.destinations),
                "waveguides": ch.n_waveguides,
                "wavelengths": list(ch.waveguide_wavelengths),
                "secured": ch.secured,
                "ramps": ch.ramps is not None,
                "metadata_detectors": ch.ramps.metadata_detector_count if ch.ramps else 0,
                "double_mrs": ch.ramps.double_mr_count if ch.ramps else 0,
                "source_rom_entries": sorted({ch.rom_entries(s) for s in ch.sources}),
                "destination_rom_entries": 2,
                "length_mm": round(ch.length_mm, 3),
                "traversal_cycles": ch.traversal_cycles,
            })
        return {"name": self.name, "gateways": len(self.gateways),
                "endpoints": len(self.endpoints), "channels": per_channel}

    def to_json(self, indent: int | None = 2) -> str:
        doc = self.audit()
        doc["die"] = {"edge_mm": self.die.edge_mm, "grid_n": self.die.grid_n}
        doc["gateway_positions_mm"] = {g.id: list(g.position_mm) for g in self.gateways}
        doc["format"] = "pnocsec.fabric"
        doc["version"] = 1
        return json.dumps(doc, indent=indent)

    # -- ring placement ----------------------------------------------------

    def _bank(self, center, ch: Channel, waveguide: int, n: int) -> np.ndarray:
        j = np.arange(n) - (n - 1) / 2
        x = center[0] + j * MR_PITCH_MM
        y = np.full(n, center[1] + ch.id * CHANNEL_OFFSET_MM + waveguide * WAVEGUIDE_OFFSET_MM)
        edge = self.die.edge_mm
        return np.column_stack([np.clip(x, 0, edge), np.clip(y, 0, edge)])

    def detector_bank(self, cid: int, gateway: int, waveguide: int = 0) -> np.ndarray:
        ch = self.channels[cid]
        tap = ch.dest_tap(gateway)
        return self._bank(tap.position_mm, ch, waveguide, ch.waveguide_wavelengths[waveguide])

    def modulator_bank(self, cid: int, gateway: int, waveguide: int = 0) -> np.ndarray:
        ch = self.channels[cid]
        tap = ch.source_tap(gateway)
        # Offset from the detector bank of the same gateway.
        pos = (tap.position_mm[0], tap.position_mm[1] + CHANNEL_OFFSET_MM / 2)
        return self._bank(pos, ch, waveguide, ch.waveguide_wavelengths[waveguide])

    def mr_positions(self) -> dict[str, np.ndarray]:
        """Positions of every active ring, grouped by function."""
        groups: dict[str, list] = {"modulator": [], "detector": [], "metadata": [], "double": []}
        for ch in self.channels:
            for w in range(ch.n_waveguides):
                for s in ch.sources:
                    groups["modulator"].append(self.modulator_bank(ch.id, s, w))
                for d in ch.destinations:
                    groups["detector"].append(self.detector_bank(ch.id, d, w))
            if ch.ramps is not None:
                for d in ch.destinations:
                    x, y = ch.dest_tap(d).position_mm
                    y2 = min(y + CHANNEL_OFFSET_MM * 0.75, self.die.edge_mm)
                    groups["metadata"].append(np.array([[x, y2], [min(x + MR_PITCH_MM, self.die.edge_mm), y2]]))
                # A double MR switch is two coupled rings.
                n = 2 * ch.ramps.double_mr_count
                groups["double"].append(self._bank(ch.ramps.position_mm, ch, 0, n))
        return {k: (np.concatenate(v) if v else np.zeros((0, 2))) for k, v in groups.items()}


# -- RAMPS -------------------------------------------------------------------

def attach_ramps(ch: Channel) -> Channel:
    """Add a reservation waveguide with two metadata wavelengths per destination."""
    if ch.ramps is not None:
        raise FabricError(f"channel {ch.id} already has a reservation waveguide")
    if not ch.destinations:
        raise FabricError(f"channel {ch.id} has no destinations")
    if 2 * len(ch.destinations) > ch.n_wavelengths:
        raise ScalabilityError(
            f"channel {ch.id}: {len(ch.destinations)} destinations need "
            f"{2 * len(ch.destinations)} metadata wavelengths but the waveguide "
            f"carries {ch.n_wavelengths}; at most {ch.n_wavelengths // 2} destinations fit")
    pairs = tuple((2 * i, 2 * i + 1) for i in range(len(ch.destinations)))
    res = ReservationWaveguide(metadata_wavelengths=pairs, destinations=ch.destinations,
                               arc_mm=ch.ramps_arc_mm, position_mm=ch.ramps_position_mm)
    return replace(ch, ramps=res)


def secure(fabric: Fabric, channels=None, *, ramps: bool = True) -> Fabric:
    """Mark channels as encrypted and, optionally, give them reservation waveguides.

    ``channels=None`` secures every channel.
    """
    ids = set(range(len(fabric.channels))) if channels is None else set(channels)
    unknown = ids - set(range(len(fabric.channels)))
    if unknown:
        raise FabricError(f"unknown channel ids {sorted(unknown)}")
    out = []
    for ch in fabric.channels:
        if ch.id in ids:
            ch = replace(ch, secured=True)
            if ramps and ch.ramps is None:
                ch = attach_ramps(ch)
        out.append(ch)
    return replace(fabric, channels=tuple(out))


# -- geometry ----------------------------------------------------------------

def _manhattan_route(points):
    """Arc length and bend count at each waypoint of an x-then-y route."""
    arcs = [0.0]
    bends = [0]
    heading = None
    total = 0.0
    nb = 0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        for dx, dy in ((x1 - x0, 0.0), (0.0, y1 - y0)):
            if abs(dx) + abs(dy) < 1e-12:
                continue
            h = (np.sign(dx), np.sign(dy))
            if heading is not None and h != heading:
                # A reversal is two 90 degree turns.
                nb += 2 if (h[0] == -heading[0] and h[1] == -heading[1]) else 1
            heading = h
            total += abs(dx) + abs(dy)
        arcs.append(total)
        bends.append(nb)
    return arcs, bends


def _channel_from_route(cid, kind, writers, readers, positions, cycles, wavelengths,
                        label="", n_wavelengths=64):
    """Lay writers first, then readers, along one serpentine waveguide."""
    pts = [positions[g] for g in writers] + [positions[g] for g in readers]
    arcs, bends = _manhattan_route(pts)
    nw = len(writers)
    s_taps = tuple(Tap(g, arcs[i], bends[i], positions[g]) for i, g in enumerate(writers))
    d_taps = tuple(Tap(g, arcs[nw + i], bends[nw + i], positions[g]) for i, g in enumerate(readers))
    last_w = s_taps[-1]
    first_r = d_taps[0]
    # Double-MR switches sit between the writer and reader sections.
    ramps_arc = last_w.arc_mm + 0.5 * (first_r.arc_mm - last_w.arc_mm)
    ramps_pos = last_w.position_mm if first_r.arc_mm == last_w.arc_mm else (
        0.5 * (last_w.position_mm[0] + first_r.position_mm[0]),
        0.5 * (last_w.position_mm[1] + first_r.position_mm[1]))
    return Channel(id=cid, kind=kind, sources=tuple(writers), destinations=tuple(readers),
                   source_taps=s_taps, dest_taps=d_taps, length_mm=arcs[-1],
                   traversal_cycles=cycles, waveguide_wavelengths=tuple(wavelengths),
                   n_wavelengths=n_wavelengths, ramps_arc_mm=ramps_arc,
                   ramps_position_mm=ramps_pos, label=label)


def _grid_positions(n, edge, cols=None):
    """Cell centres of a near-square grid visited in serpentine order."""
    cols = cols or int(math.ceil(math.sqrt(n)))
    rows = int(math.ceil(n / cols))
    out = []
    for k in range(n):
        r, c = divmod(k, cols)
        if r % 2:
            c = cols - 1 - c
        out.append(((c + 0.5) * edge / cols, (r + 0.5) * edge / rows))
    return out


def _with_ramps(fabric: Fabric, ramps: bool) -> Fabric:
    if not ramps:
        return fabric
    return replace(fabric, channels=tuple(attach_ramps(c) for c in fabric.channels))


# -- builders ----------------------------------------------------------------

def build_firefly(scale: int = 8, *, cores_per_cluster: int = 4, waveguides: int = 8,
                  traversal_cycles: int = 8, die: DieSpec | None = None,
                  ramps: bool = False) -> Fabric:
    """SWMR crossbar: one channel per source cluster, read by every other cluster."""
    if scale < 2:
        raise FabricError("firefly needs at least two clusters")
    die = die or DieSpec()
    pos = dict(enumerate(_grid_positions(scale, die.edge_mm, cols=max(2, math.ceil(scale / 2)))))
    gateways = tuple(Gateway(i, i, pos[i]) for i in range(scale))
    channels = []
    for s in range(scale):
        readers = [(s + k) % scale for k in range(1, scale)]
        channels.append(_channel_from_route(s, ChannelKind.SWMR, [s], readers, pos,
                                            traversal_cycles, [64] * waveguides, label=f"C{s + 1}"))
    side = int(math.ceil(math.sqrt(cores_per_cluster)))
    endpoints = []
    for g in range(scale):
        for k in range(cores_per_cluster):
            r, c = divmod(k, side)
            endpoints.append(Endpoint(len(endpoints), g, r + c + 1))
    uni = {(a, b): ((a, b),) for a in range(scale) for b in range(scale) if a != b}
    fab = Fabric("firefly", die, gateways, tuple(channels), tuple(endpoints),
                 unicast_channel=uni, multicast_channel={g: g for g in range(scale)})
    return _with_ramps(fab, ramps)


def build_swiftnoc(scale: int = 32, *, n_channels: int = 16, traversal_cycles: int = 8,
                   die: DieSpec | None = None, ramps: bool = False) -> Fabric:
    """MWMR crossbar: every channel is written and read by every node."""
    if scale < 2:
        raise FabricError("swiftnoc needs at least two nodes")
    if n_channels < 1:
        raise FabricError("swiftnoc needs at least one channel")
    die = die or DieSpec()
    pos = dict(enumerate(_grid_positions(scale, die.edge_mm)))
    gateways = tuple(Gateway(i, i * 4 // scale, pos[i]) for i in range(scale))
    nodes = list(range(scale))
    channels = tuple(
        _channel_from_route(c, ChannelKind.MWMR, nodes, nodes, pos, traversal_cycles,
                            [64, 64, 64, 68], label=f"MWMR{c}")
        for c in range(n_channels))
    endpoints = tuple(Endpoint(i, i, 1) for i in range(scale))
    uni = {(a, b): ((b % n_channels, b),) for a in nodes for b in nodes if a != b}
    fab = Fabric("swiftnoc", die, gateways, channels, endpoints, unicast_channel=uni,
                 multicast_channel={g: g % n_channels for g in nodes})
    return _with_ramps(fab, ramps)


def build_luminoc(grid: int = 8, *, traversal_cycles: int = 4, die: DieSpec | None = None,
                  ramps: bool = False) -> Fabric:
    """Row and column MWMR channels over a grid of tiles.

    Channel ``r`` serves row ``r``; channel ``grid + c`` serves column ``c``.
    Tiles in different rows and columns relay through the tile that shares
    the source's row and the destination's column.
    """
    if grid < 2:
        raise FabricError("luminoc needs a grid of at least 2x2")
    die = die or DieSpec()
    cell = die.edge_mm / grid

    def tid(r, c):
        return r * grid + c

    pos = {tid(r, c): ((c + 0.5) * cell, (r + 0.5) * cell) for r in range(grid) for c in range(grid)}
    gateways = tuple(Gateway(t, t, pos[t]) for t in range(grid * grid))
    channels = []
    for r in range(grid):
        tiles = [tid(r, c) for c in range(grid)]
        channels.append(_channel_from_route(r, ChannelKind.MWMR, tiles, tiles[::-1], pos,
                                            traversal_cycles, [64] * 4, label=f"row{r}"))
    for c in range(grid):
        tiles = [tid(r, c) for r in range(grid)]
        channels.append(_channel_from_route(grid + c, ChannelKind.MWMR, tiles, tiles[::-1], pos,
                                            traversal_cycles, [64] * 4, label=f"col{c}"))
    uni = {}
    for a in range(grid * grid):
        ra, ca = divmod(a, grid)
        for b in range(grid * grid):
            if a == b:
                continue
            rb, cb = divmod(b, grid)
            if ra == rb:
                uni[(a, b)] = ((ra, b),)
            elif ca == cb:
                uni[(a, b)] = ((grid + ca, b),)
            else:
                uni[(a, b)] = ((ra, tid(ra, cb)), (grid + cb, b))
    endpoints = tuple(Endpoint(t, t, 1) for t in range(grid * grid))
    fab = Fabric("luminoc", die, gateways, tuple(channels), endpoints, unicast_channel=uni,
                 multicast_channel={t: t // grid for t in range(grid * grid)},
                 relay_cycles=1)
    return _with_ramps(fab, ramps)


def build_generic(n_sources: int = 2, n_destinations: int = 3, *, kind: str = "mwmr",
                  traversal_cycles: int = 8, wavelengths: int = 64, waveguides: int = 1,
                  die: DieSpec | None = None, ramps: bool = False) -> Fabric:
    """One channel with dedicated source and destination gateways.

    Gateways ``0..n_sources-1`` write, the rest read. Every gateway carries a
    single endpoint with the same id.
    """
    if n_sources < 1 or n_destinations < 0:
        raise FabricError("generic channel needs >= 1 source")
    die = die or DieSpec()
    n = n_sources + n_destinations
    pos = dict(enumerate(_grid_positions(n, die.edge_mm)))
    writers = list(range(n_sources))
    readers = list(range(n_sources, n))
    if not readers:
        raise FabricError("channel has no destinations")
    ch = _channel_from_route(0, ChannelKind(kind), writers, readers, pos, traversal_cycles,
                             [wavelengths] * waveguides, n_wavelengths=wavelengths, label="generic")
    gateways = tuple(Gateway(i, i, pos[i]) for i in range(n))
    endpoints = tuple(Endpoint(i, i, 1) for i in range(n))
    uni = {(a, b): ((0, b),) for a in writers for b in readers}
    fab = Fabric("generic", die, gateways, (ch,), endpoints, unicast_channel=uni,
                 multicast_channel={a: 0 for a in writers})
    return _with_ramps(fab, ramps)


BUILDERS = {
    "firefly": build_firefly,
    "swiftnoc": build_swiftnoc,
    "luminoc": build_luminoc,
    "generic": build_generic,
}


def build(name: str, *args, **kwargs) -> Fabric:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise FabricError(f"unknown fabric {name!r}; choose from {sorted(BUILDERS)}") from None
    return builder(*args, **kwargs)
