"""Latency and EDP cost of securing channels.

Each secured traversal adds one cycle to encrypt and one to decrypt. How
much that matters depends on how much of a packet's life is spent in the
photonic crossbar.
"""

from pnocsec import SimConfig, TrafficSpec, build_firefly, build_luminoc, build_swiftnoc, generate_pv_map, run

pv = generate_pv_map(0)


def pair(fab, rate, **kw):
    out = []
    for on in (False, True):
        out.append(run(SimConfig(fab, TrafficSpec(injection_rate=rate), pdes_enabled=on, ramps_enabled=on,
                                 warmup_cycles=300, measured_packets=4000, seed=1, pv_map=pv, **kw)))
    return out


print("full securing, uniform traffic")
for fab, rate in ((build_firefly(), 0.01), (build_swiftnoc(scale=8, n_channels=8), 0.01), (build_luminoc(), 0.005)):
    a, b = pair(fab, rate)
    print(f"  {fab.name:<9} latency {a.avg_latency_cycles:6.2f} -> {b.avg_latency_cycles:6.2f} cycles "
          f"(+{100 * (b.avg_latency_cycles / a.avg_latency_cycles - 1):.1f}%), "
          f"EDP +{100 * (b.edp_Js / a.edp_Js - 1):.1f}%, traversals/packet {a.mean_traversals:.2f}")

print("SwiftNoC, securing a subset of channels")
fab = build_swiftnoc(scale=8, n_channels=8)
base = None
for n in (0, 2, 4, 8):
    r = run(SimConfig(fab, TrafficSpec(injection_rate=0.03), secured_channels=range(n), pdes_enabled=True,
                      ramps_enabled=True, warmup_cycles=300, measured_packets=3000, seed=2, pv_map=pv))
    base = base or r
    print(f"  {n} secured: latency {r.avg_latency_cycles:6.2f} "
          f"(+{100 * (r.avg_latency_cycles / base.avg_latency_cycles - 1):.2f}%), EDP {r.edp_Js:.3e} J*s")
