"""Who can read a snooped packet?

Gateway 0 hosts a Trojan that taps every passing data slot. We give it
progressively more knowledge and count how often it recovers the exact
payload. Without encryption everything leaks. Encryption alone fails once
the attacker holds a source ROM and can read the in-band metadata. Moving
metadata onto a reservation waveguide leaves it guessing among its ROM
entries.
"""

from pnocsec import AttackScenario, Attacker, SimConfig, TrafficSpec, build_swiftnoc, generate_pv_map, run

fab = build_swiftnoc(scale=8, n_channels=8)
pv = generate_pv_map(11)
traffic = TrafficSpec(injection_rate=0.05, multicast_fraction=0.1)

scenarios = {
    "passive tap": AttackScenario({0}, strategy="passive_snoop", name="passive"),
    "metadata tap": AttackScenario({0}, strategy="metadata_tap", name="tap"),
    "stolen ROM": AttackScenario({0}, {0}, strategy="coordinated_rom", name="rom"),
}
configs = {"unencrypted": (False, False), "PDES": (True, False), "PDES + RAMPS": (True, True)}

print(f"{'network':<14}" + "".join(f"{k:>16}" for k in scenarios))
for label, (pdes, ramps) in configs.items():
    attackers = [Attacker(s, keep_events=False) for s in scenarios.values()]
    rep = run(SimConfig(fab, traffic, pdes_enabled=pdes, ramps_enabled=ramps, measured_packets=6000,
                        seed=3, pv_map=pv, attackers=attackers))
    print(f"{label:<14}" + "".join(f"{s.decipher_rate:>16.3f}" for s in rep.security))
print("(a stolen ROM holds 7 unicast keys + 1 multicast key, so blind guessing hits 1/8 = 0.125)")
