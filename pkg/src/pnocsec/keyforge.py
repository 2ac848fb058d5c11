"""Keys derived from the resonance shifts of destination detector banks.

Each detector ring's shift is digitised to a signed 8-bit code. A
destination's 64 codes, concatenated in a per-destination permutation,
form its 512-bit unicast key. A channel's multicast key is the XOR of the
unicast keys of all its destinations. Keys are plain Python ints whose
byte 0 is the most significant byte.
"""

from __future__ import annotations

import enum
import functools
import json
import operator
from dataclasses import dataclass, field

import numpy as np

from .fabric import Fabric, FabricError
from .pvmap import PvMap, sample_shift

KEY_BITS = 512
CODES_PER_KEY = KEY_BITS // 8
FULL_SCALE_NM = 3.2
CODE_MAX = 127


class KeyStructureError(ValueError):
    pass


def quantize_error(shift_nm: float) -> int:
    """Signed 8-bit error code, linear over +/-3.2 nm with half-up rounding."""
    s = min(max(float(shift_nm), -FULL_SCALE_NM), FULL_SCALE_NM)
    return int(np.floor(s / FULL_SCALE_NM * CODE_MAX + 0.5))


def quantize_errors(shifts_nm) -> np.ndarray:
    s = np.clip(np.asarray(shifts_nm, dtype=float), -FULL_SCALE_NM, FULL_SCALE_NM)
    return np.floor(s / FULL_SCALE_NM * CODE_MAX + 0.5).astype(np.int8)


@dataclass(frozen=True)
class UnicastKey:
    bits: int
    owner: int
    permutation: tuple[int, ...]

    def hex(self) -> str:
        return key_hex(self.bits)


@dataclass(frozen=True)
class MulticastKey:
    bits: int
    waveguide: int

    def hex(self) -> str:
        return key_hex(self.bits)


class Role(str, enum.Enum):
    SOURCE = "source"
    DESTINATION = "destination"


@dataclass(frozen=True)
class KeyStore:
    """ROM contents of one gateway on one channel."""
    role: Role
    gateway: int
    channel: int
    unicast_entries: tuple[tuple[int, UnicastKey], ...]
    multicast_entry: MulticastKey

    @property
    def entries(self) -> int:
        return len(self.unicast_entries) + 1

    def unicast_for(self, dest: int) -> UnicastKey | None:
        for d, k in self.unicast_entries:
            if d == dest:
                return k
        return None

    def all_keys(self) -> list[int]:
        """Every key value in ROM order, multicast last."""
        return [k.bits for _, k in self.unicast_entries] + [self.multicast_entry.bits]


def key_hex(bits: int) -> str:
    return bits.to_bytes(KEY_BITS // 8, "big").hex()


def _check_permutation(permutation) -> tuple[int, ...]:
    perm = tuple(int(p) for p in permutation)
    if len(perm) != CODES_PER_KEY or sorted(perm) != list(range(CODES_PER_KEY)):
        raise KeyStructureError("permutation must be a bijection on 0..63")
    return perm


def derive_unicast_key(codes, permutation, owner: int = -1) -> UnicastKey:
    codes = [int(c) for c in codes]
    if len(codes) != CODES_PER_KEY:
        raise KeyStructureError(f"need {CODES_PER_KEY} error codes, got {len(codes)}")
    if any(c < -128 or c > 127 for c in codes):
        raise KeyStructureError("error codes must fit in a signed byte")
    perm = _check_permutation(permutation)
    raw = bytes(codes[p] & 0xFF for p in perm)
    return UnicastKey(int.from_bytes(raw, "big"), owner, perm)


def derive_multicast_key(keys, waveguide: int = -1) -> MulticastKey:
    keys = list(keys)
    if not keys:
        raise KeyStructureError("a multicast key needs at least one unicast key")
    return MulticastKey(functools.reduce(operator.xor, (k.bits for k in keys)), waveguide)


def design_permutation(seed: int, channel: int, dest: int) -> tuple[int, ...]:
    rng = np.random.default_rng([seed, channel, dest])
    return tuple(int(i) for i in rng.permutation(CODES_PER_KEY))


@dataclass
class KeyRing:
    """All ROMs of a fabric, indexed by (channel, gateway, role)."""
    stores: dict = field(default_factory=dict)
    unicast: dict = field(default_factory=dict)
    multicast: dict = field(default_factory=dict)

    def source(self, channel: int, gateway: int) -> KeyStore:
        return self.stores[(channel, gateway, Role.SOURCE)]

    def destination(self, channel: int, gateway: int) -> KeyStore:
        return self.stores[(channel, gateway, Role.DESTINATION)]

    def to_json(self, indent: int | None = 2) -> str:
        doc = {"format": "pnocsec.keys", "version": 1, "stores": []}
        for (ch, gw, role), st in sorted(self.stores.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)):
            doc["stores"].append({
                "channel": ch, "gateway": gw, "role": role.value,
                "unicast": [{"dest": d, "key": k.hex(), "permutation": list(k.permutation)}
                            for d, k in st.unicast_entries],
                "multicast": st.multicast_entry.hex(),
            })
        return json.dumps(doc, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "KeyRing":
        doc = json.loads(text)
        if doc.get("format") != "pnocsec.keys":
            raise ValueError("not a key file")
        ring = cls()
        for s in doc["stores"]:
            ch = s["channel"]
            mc = MulticastKey(int(s["multicast"], 16), ch)
            entries = tuple((e["dest"], UnicastKey(int(e["key"], 16), e["dest"], tuple(e["permutation"])))
                            for e in s["unicast"])
            role = Role(s["role"])
            ring.stores[(ch, s["gateway"], role)] = KeyStore(role, s["gateway"], ch, entries, mc)
            ring.multicast[ch] = mc
            for d, k in entries:
                ring.unicast[(ch, d)] = k
        return ring


def build_keystores(fabric: Fabric, pv: PvMap, seed: int, channels=None) -> KeyRing:
    """Forge every unicast/multicast key and fill the source and destination ROMs."""
    ring = KeyRing()
    ids = range(len(fabric.channels)) if channels is None else channels
    for cid in ids:
        ch = fabric.channels[cid]
        if not ch.destinations:
            raise FabricError(f"channel {cid} has no destinations")
        keys = {}
        for d in ch.destinations:
            pos = fabric.detector_bank(cid, d, 0)[:CODES_PER_KEY]
            codes = quantize_errors(sample_shift(pv, pos[:, 0], pos[:, 1]))
            keys[d] = derive_unicast_key(codes, design_permutation(seed, cid, d), owner=d)
            ring.unicast[(cid, d)] = keys[d]
        mc = derive_multicast_key(keys.values(), waveguide=cid)
        ring.multicast[cid] = mc
        for s in ch.sources:
            entries = tuple((d, keys[d]) for d in ch.reachable(s))
            ring.stores[(cid, s, Role.SOURCE)] = KeyStore(Role.SOURCE, s, cid, entries, mc)
        for d in ch.destinations:
            ring.stores[(cid, d, Role.DESTINATION)] = KeyStore(Role.DESTINATION, d, cid, ((d, keys[d]),), mc)
    return ring
