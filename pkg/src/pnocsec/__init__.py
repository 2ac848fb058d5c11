"""Security simulator for process-variation-keyed photonic network-on-chip encryption."""

__version__ = "0.1.0"

from .attacks import AttackScenario, Attacker, SecurityReport, SnoopEvent, Strategy
from .cipher import CommType, Metadata, Packet, decrypt, encrypt, select_key
from .engine import RunReport, SimConfig, TrafficSpec, run
from .fabric import Fabric, build, build_firefly, build_generic, build_luminoc, build_swiftnoc, secure
from .keyforge import build_keystores, derive_multicast_key, derive_unicast_key
from .photonics import EnergyParams, LossParams, load_profile, packet_energy, worst_case_loss
from .pvmap import DieSpec, PvMap, PvParams, generate_pv_map, remedy_tuning, sample_shift

__all__ = [
    "AttackScenario", "Attacker", "SecurityReport", "SnoopEvent", "Strategy",
    "CommType", "Metadata", "Packet", "decrypt", "encrypt", "select_key",
    "RunReport", "SimConfig", "TrafficSpec", "run",
    "Fabric", "build", "build_firefly", "build_generic", "build_luminoc", "build_swiftnoc", "secure",
    "build_keystores", "derive_multicast_key", "derive_unicast_key",
    "EnergyParams", "LossParams", "load_profile", "packet_energy", "worst_case_loss",
    "DieSpec", "PvMap", "PvParams", "generate_pv_map", "remedy_tuning", "sample_shift",
]
