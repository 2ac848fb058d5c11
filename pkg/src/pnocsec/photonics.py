"""Link budget, laser power and energy accounting.

Losses are stored as positive dB magnitudes; a larger number is more loss.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources

import numpy as np

from .fabric import Channel, Fabric
from .pvmap import PvMap, PvParams, sample_shift, tuning_power_uW

XOR_PASS_PJ = 0.241  # one 512-bit XOR, 11 nm FinFET cells


@dataclass(frozen=True)
class LossParams:
    propagation_db_per_cm: float = 0.274
    bending_db_per_90deg: float = 0.0085
    splitter_db: float = 0.2
    through_loss_single_mr_db: float = 0.002
    drop_loss_mr_db: float = 0.5
    through_loss_double_mr_db: float = 0.023
    detector_sensitivity_dbm: float = -26.0
    wallplug_efficiency: float = 0.03
    # Recorded for completeness; no equation here consumes them.
    mr_q_factor: float = 9000.0
    mr_radius_um: float = 5.0
    detector_responsivity_a_per_w: float = 0.8

    def __post_init__(self):
        if not 0 < self.wallplug_efficiency <= 1:
            raise ValueError("wallplug_efficiency must lie in (0, 1]")
        for f in ("propagation_db_per_cm", "bending_db_per_90deg", "splitter_db",
                  "through_loss_single_mr_db", "drop_loss_mr_db", "through_loss_double_mr_db"):
            if getattr(self, f) < 0:
                raise ValueError(f"{f} is a loss magnitude and must be >= 0")


@dataclass(frozen=True)
class EnergyParams:
    mod_det_pj_per_bit: float = 0.42
    tuning_circuit_pj_per_bit: float = 0.18
    serdes_pj_per_bit: float = 0.5
    receiver_pj_per_bit: float = 0.075
    mod_driver_pj_per_bit: float = 0.154
    dithering_uw_per_mr: float = 385.0
    electrical_router_pj_per_bit: float = 0.6
    xor_pass_pj: float = XOR_PASS_PJ

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")

    @property
    def photonic_pj_per_bit(self) -> float:
        return (self.mod_det_pj_per_bit + self.tuning_circuit_pj_per_bit + self.serdes_pj_per_bit
                + self.receiver_pj_per_bit + self.mod_driver_pj_per_bit)


@dataclass(frozen=True)
class PathDescriptor:
    length_cm: float = 0.0
    bends_90: int = 0
    splitters: int = 0
    through_mrs_single: int = 0
    through_mrs_double: int = 0
    drop_mrs: int = 0

    def __post_init__(self):
        if self.length_cm < 0 or min(self.bends_90, self.splitters, self.through_mrs_single,
                                     self.through_mrs_double, self.drop_mrs) < 0:
            raise ValueError("path lengths and counts must be non-negative")

    def __add__(self, other: "PathDescriptor") -> "PathDescriptor":
        return PathDescriptor(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))


def path_loss_db(path: PathDescriptor, lp: LossParams) -> float:
    return (path.length_cm * lp.propagation_db_per_cm
            + path.bends_90 * lp.bending_db_per_90deg
            + path.splitters * lp.splitter_db
            + path.through_mrs_single * lp.through_loss_single_mr_db
            + path.through_mrs_double * lp.through_loss_double_mr_db
            + path.drop_mrs * lp.drop_loss_mr_db)


def channel_path(ch: Channel, source: int, dest: int) -> PathDescriptor:
    """Optical path from a source's modulators to a destination's detector."""
    s = ch.source_tap(source)
    d = ch.dest_tap(dest)
    if d.arc_mm < s.arc_mm:
        raise ValueError(f"destination {dest} lies upstream of source {source} on channel {ch.id}")
    banks = sum(1 for t in ch.source_taps if s.arc_mm < t.arc_mm <= d.arc_mm and t is not s)
    banks += sum(1 for t in ch.dest_taps if s.arc_mm <= t.arc_mm and t.arc_mm <= d.arc_mm and t is not d)
    through_double = 0
    if ch.ramps is not None and s.arc_mm <= ch.ramps.arc_mm <= d.arc_mm:
        through_double = ch.ramps.double_mr_count
    return PathDescriptor(
        length_cm=(d.arc_mm - s.arc_mm) / 10.0,
        bends_90=d.bends - s.bends,
        splitters=int(math.ceil(math.log2(ch.n_waveguides))) if ch.n_waveguides > 1 else 0,
        through_mrs_single=banks * ch.n_wavelengths,
        through_mrs_double=through_double,
        drop_mrs=1,
    )


def channel_paths(ch: Channel):
    for s in ch.sources:
        for d in ch.reachable(s):
            yield s, d, channel_path(ch, s, d)


def channel_worst_loss(ch: Channel, lp: LossParams) -> tuple[int, float, PathDescriptor]:
    best = None
    for s, d, p in channel_paths(ch):
        loss = path_loss_db(p, lp)
        if best is None or loss > best[1]:
            best = (d, loss, p)
    return best


def worst_case_loss(fabric: Fabric, lp: LossParams) -> tuple[int, float]:
    """Destination gateway with the lossiest detector path, and that loss in dB."""
    worst = None
    for ch in fabric.channels:
        d, loss, _ = channel_worst_loss(ch, lp)
        if worst is None or loss > worst[1]:
            worst = (d, loss)
    return worst


def laser_power(worst_loss_db: float, lp: LossParams, n_wavelengths: int,
                n_waveguides: int = 1) -> tuple[float, float]:
    """Photonic and electrical laser power in W for worst-case provisioning."""
    if worst_loss_db < 0:
        raise ValueError("worst_loss_db must be >= 0")
    launch_dbm = lp.detector_sensitivity_dbm + worst_loss_db
    photonic = n_wavelengths * n_waveguides * 10 ** ((launch_dbm - 30.0) / 10.0)
    return photonic, photonic / lp.wallplug_efficiency


def fabric_laser_power(fabric: Fabric, lp: LossParams) -> tuple[float, float]:
    """Sum of per-channel laser power, each channel sized by its own worst path."""
    photonic = 0.0
    for ch in fabric.channels:
        _, loss, _ = channel_worst_loss(ch, lp)
        for n in ch.waveguide_wavelengths:
            photonic += laser_power(loss, lp, n, 1)[0]
    return photonic, photonic / lp.wallplug_efficiency


def packet_energy(bits: int, ep: EnergyParams, secured: bool, hops_electrical: int = 0) -> float:
    """Dynamic energy in J of one packet over one photonic traversal."""
    if bits <= 0:
        raise ValueError("packet must carry at least one bit")
    pj = bits * ep.photonic_pj_per_bit + hops_electrical * bits * ep.electrical_router_pj_per_bit
    if secured:
        pj += 2 * ep.xor_pass_pj
    return pj * 1e-12


def electrical_energy(bits: int, ep: EnergyParams, hops: int) -> float:
    return hops * bits * ep.electrical_router_pj_per_bit * 1e-12


def resonance_control_power(shifts_nm, ep: EnergyParams, params: PvParams | None = None) -> float:
    """Dithering plus PV remedy power in W for rings with the given shifts."""
    shifts = np.asarray(shifts_nm, dtype=float)
    tuning = tuning_power_uW(shifts, params).sum()
    return (shifts.size * ep.dithering_uw_per_mr + tuning) * 1e-6


def static_power(fabric: Fabric, pv: PvMap, ep: EnergyParams | None = None,
                 lp: LossParams | None = None) -> float:
    """Resonance control for every active ring plus electrical laser power, in W."""
    ep = ep or EnergyParams()
    lp = lp or LossParams()
    pos = np.concatenate(list(fabric.mr_positions().values()))
    shifts = sample_shift(pv, pos[:, 0], pos[:, 1])
    control = resonance_control_power(shifts, ep, pv.params)
    return control + fabric_laser_power(fabric, lp)[1]


# -- profiles --------------------------------------------------------------

_PROFILE_TYPES = {"loss": LossParams, "energy": EnergyParams}


def list_profiles() -> list[str]:
    root = resources.files("pnocsec") / "profiles"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_profile(name_or_path: str):
    """Load a named shipped profile or a JSON file into LossParams/EnergyParams."""
    root = resources.files("pnocsec") / "profiles"
    candidate = root / f"{name_or_path}.json"
    if candidate.is_file():
        doc = json.loads(candidate.read_text())
    else:
        with open(name_or_path) as fh:
            doc = json.load(fh)
    kind = doc.pop("kind")
    doc.pop("description", None)
    return _PROFILE_TYPES[kind](**doc)


def profile_dict(obj) -> dict:
    return asdict(obj)
