"""Packet-level XOR encipherment with metadata-driven key selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .keyforge import KEY_BITS, KeyStore, Role

PAYLOAD_MASK = (1 << KEY_BITS) - 1


class CommType(str, enum.Enum):
    UNICAST = "unicast"
    MULTICAST = "multicast"


class KeyNotFoundError(KeyError):
    pass


class CipherStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class Metadata:
    target: int
    comm_type: CommType


@dataclass(frozen=True)
class Packet:
    payload: int
    src: int
    dst_set: frozenset
    comm_type: CommType
    created_cycle: int = 0
    delivered_cycle: int | None = None
    encrypted: bool = False
    id: int = 0

    def __post_init__(self):
        if not 0 <= self.payload <= PAYLOAD_MASK:
            raise ValueError("payload must be a 512-bit value")
        n = len(self.dst_set)
        if self.comm_type is CommType.UNICAST and n != 1:
            raise ValueError("unicast packets have exactly one destination")
        if self.comm_type is CommType.MULTICAST and n < 2:
            raise ValueError("multicast packets have at least two destinations")


def select_key(store: KeyStore, meta: Metadata) -> int:
    if meta.comm_type is CommType.MULTICAST:
        return store.multicast_entry.bits
    key = store.unicast_for(meta.target)
    if key is None:
        where = "source" if store.role is Role.SOURCE else "destination"
        raise KeyNotFoundError(f"{where} ROM of gateway {store.gateway} has no key for {meta.target}")
    return key.bits


def encrypt(p: Packet, key: int) -> Packet:
    if p.encrypted:
        raise CipherStateError(f"packet {p.id} is already encrypted")
    return replace(p, payload=p.payload ^ key, encrypted=True)


def decrypt(p: Packet, key: int) -> Packet:
    if not p.encrypted:
        raise CipherStateError(f"packet {p.id} is not encrypted")
    return replace(p, payload=p.payload ^ key, encrypted=False)
