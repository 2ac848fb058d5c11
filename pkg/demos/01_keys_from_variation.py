"""Forge keys from a process-variation map and check they are unique.

Each destination's detector rings sit at slightly different resonances on
every die. Digitising those offsets gives a 512-bit key that nobody chose
and that differs from die to die.
"""

import numpy as np

from pnocsec import build_keystores, build_swiftnoc, generate_pv_map, secure
from pnocsec.keyforge import key_hex
from pnocsec.pvmap import summarize

fab = secure(build_swiftnoc())
pv = generate_pv_map(2024)
print("PV map:", {k: round(v, 3) if isinstance(v, float) else v for k, v in summarize(pv).items()})

ring = build_keystores(fab, pv, seed=2024, channels=[0])
ch = fab.channels[0]
for d in ch.destinations[:3]:
    print(f"gateway {d:2d} unicast key  {key_hex(ring.unicast[(0, d)].bits)[:32]}...")
print(f"channel 0 multicast key  {key_hex(ring.multicast[0].bits)[:32]}...")

# Same fabric, many dies: count distinct keys.
keys = set()
for seed in range(50):
    r = build_keystores(fab, generate_pv_map(seed), seed, channels=[0])
    keys |= {r.unicast[(0, d)].bits for d in ch.destinations}
print(f"{len(keys)} distinct keys out of {50 * len(ch.destinations)} forged")

# How far apart are two keys? Hamming distance in bits.
a, b = ring.unicast[(0, 0)].bits, ring.unicast[(0, 1)].bits
print("Hamming distance between two destinations:", bin(a ^ b).count("1"), "of 512")
