"""Snooping Hardware Trojans with tiered knowledge and decipher scoring.

An attacker is attached to a run as an observer. For every data slot it
sees the on-wire bits through a partially detuned detector ring (the tap
is non-destructive), infers whatever metadata its position allows and
tries to recover the plaintext with the keys it holds.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .cipher import CommType, KeyNotFoundError, Metadata, select_key
from .engine import SlotObservation, SlotState
from .fabric import Channel, Fabric
from .keyforge import KeyRing, KeyStore


class Strategy(str, enum.Enum):
    PASSIVE_SNOOP = "passive_snoop"
    METADATA_TAP = "metadata_tap"
    COORDINATED_ROM = "coordinated_rom"


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class AttackScenario:
    snooper_gateways: frozenset
    compromised_source_roms: frozenset = frozenset()
    metadata_visible: bool | None = None  # None: visible iff the channel has no reservation waveguide
    strategy: Strategy = Strategy.PASSIVE_SNOOP
    name: str = "attack"

    def __post_init__(self):
        object.__setattr__(self, "snooper_gateways", frozenset(self.snooper_gateways))
        object.__setattr__(self, "compromised_source_roms", frozenset(self.compromised_source_roms))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if not self.snooper_gateways:
            raise ScenarioError("a scenario needs at least one snooper gateway")

    @classmethod
    def from_dict(cls, d: dict) -> "AttackScenario":
        known = {"snooper_gateways", "compromised_source_roms", "metadata_visible", "strategy", "name"}
        extra = set(d) - known
        if extra:
            raise ScenarioError(f"unknown scenario fields: {sorted(extra)}")
        return cls(**d)


@dataclass
class SnoopEvent:
    cycle: int
    channel: int
    snooper: int
    packet_id: int
    observed_bits: int
    true_meta: Metadata
    attacker_meta: Metadata | None = None
    deciphered: bool = False
    secured: bool = False


@dataclass(frozen=True)
class SecurityReport:
    scenario: str
    strategy: Strategy
    packets_snooped: int
    packets_deciphered: int
    metadata_leaks: int
    legitimate_receptions: int
    by_comm_type: dict

    @property
    def decipher_rate(self) -> float:
        return self.packets_deciphered / self.packets_snooped if self.packets_snooped else 0.0

    def as_row(self) -> dict:
        p = f"{self.scenario}."
        return {p + "snooped": self.packets_snooped, p + "deciphered": self.packets_deciphered,
                p + "decipher_rate": self.decipher_rate, p + "metadata_leaks": self.metadata_leaks}

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "strategy": self.strategy.value,
                "packets_snooped": self.packets_snooped, "packets_deciphered": self.packets_deciphered,
                "decipher_rate": self.decipher_rate, "metadata_leaks": self.metadata_leaks,
                "legitimate_receptions": self.legitimate_receptions, "by_comm_type": self.by_comm_type}


def snoop(obs: SlotObservation, snooper: int) -> SnoopEvent:
    """Copy the on-wire bits of a data slot; the legitimate signal continues unaltered."""
    return SnoopEvent(cycle=obs.cycle, channel=obs.channel.id, snooper=snooper, packet_id=obs.packet_id,
                      observed_bits=obs.wire, true_meta=obs.truth, secured=obs.secured)


def metadata_visible(ch: Channel, scenario: AttackScenario) -> bool:
    if scenario.metadata_visible is not None:
        return bool(scenario.metadata_visible)
    return ch.ramps is None


def infer_metadata(snooper: int, ch: Channel, slot: SlotState, scenario: AttackScenario) -> Metadata | None:
    """Metadata a snooper can read off the reservation slot, or None when hidden."""
    if slot.idle or not metadata_visible(ch, scenario):
        return None
    if ch.ramps is not None:
        targets = [g for g in ch.destinations if ch.ramps.pair_for(g)[0] in slot.announced]
        multi = any(ch.ramps.pair_for(g)[1] in slot.announced for g in targets)
    else:
        targets = [g for g in ch.destinations if ch.in_band_wavelength(g) in slot.announced]
        multi = len(targets) > 1
    if not targets:
        return None
    if multi:
        return Metadata(-1, CommType.MULTICAST)
    return Metadata(targets[0], CommType.UNICAST)


def _pool(stores: list[KeyStore]) -> list[int]:
    seen, out = set(), []
    for st in stores:
        for k in st.all_keys():
            if k not in seen:
                seen.add(k)
                out.append(k)
    return out


def attempt_decipher(event: SnoopEvent, scenario: AttackScenario, stores: list[KeyStore],
                     plaintext: int, rng: np.random.Generator) -> SnoopEvent:
    """Score one snooped slot. Success means the exact payload was recovered."""
    if not event.secured:
        event.deciphered = event.observed_bits == plaintext
        return event
    if scenario.strategy is not Strategy.COORDINATED_ROM or not stores:
        event.deciphered = False
        return event
    if event.attacker_meta is not None:
        guess = None
        for st in stores:
            try:
                guess = select_key(st, event.attacker_meta)
                break
            except KeyNotFoundError:
                continue
        if guess is None:
            event.deciphered = False
            return event
    else:
        keys = _pool(stores)
        guess = keys[int(rng.integers(len(keys)))]
    event.deciphered = (event.observed_bits ^ guess) == plaintext
    return event


class Attacker:
    """Engine observer that runs one scenario during a simulation."""

    def __init__(self, scenario: AttackScenario, keep_events: bool = True):
        self.scenario = scenario
        self.keep_events = keep_events
        self.events: list[SnoopEvent] = []
        self._fab: Fabric | None = None
        self._stores: dict = {}
        self._rng = np.random.default_rng(0)
        self._counts = Counter()
        self._by_type = {k.value: Counter() for k in CommType}

    def bind(self, fab: Fabric, keys: KeyRing | None, seed: int):
        listening = {g for ch in fab.channels for g in ch.destinations}
        bad = self.scenario.snooper_gateways - listening
        if bad:
            raise ScenarioError(f"snoopers {sorted(bad)} have no detectors on any channel")
        self._fab = fab
        self._stores = {}
        if keys is not None:
            for ch in fab.channels:
                self._stores[ch.id] = [keys.source(ch.id, g) for g in sorted(self.scenario.compromised_source_roms)
                                       if ch.secured and g in ch.sources]
        self._rng = np.random.default_rng([seed, 0xA77AC])
        self.events.clear()
        self._counts.clear()
        for c in self._by_type.values():
            c.clear()

    def observe(self, obs: SlotObservation):
        ch = obs.channel
        for s in sorted(self.scenario.snooper_gateways):
            if s not in ch.destinations or s == obs.slot.owner:
                continue
            if s in obs.receivers:
                self._counts["legit"] += 1
                continue
            ev = snoop(obs, s)
            ev.attacker_meta = infer_metadata(s, ch, obs.slot, self.scenario)
            if ev.attacker_meta is not None and ev.secured:
                self._counts["leaks"] += 1
            attempt_decipher(ev, self.scenario, self._stores.get(ch.id, []), obs.plaintext, self._rng)
            self._counts["snooped"] += 1
            self._counts["deciphered"] += ev.deciphered
            bucket = self._by_type[obs.truth.comm_type.value]
            bucket["snooped"] += 1
            bucket["deciphered"] += ev.deciphered
            if self.keep_events:
                self.events.append(ev)

    def report(self) -> SecurityReport:
        return SecurityReport(
            scenario=self.scenario.name, strategy=self.scenario.strategy,
            packets_snooped=self._counts["snooped"], packets_deciphered=self._counts["deciphered"],
            metadata_leaks=self._counts["leaks"], legitimate_receptions=self._counts["legit"],
            by_comm_type={k: dict(v) for k, v in self._by_type.items()})
