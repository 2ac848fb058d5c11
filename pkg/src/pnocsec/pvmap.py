"""Process-variation maps of microring resonance shifts.

A map is a spatially correlated Gaussian field over a square die. The
within-die (WID) part is split evenly between a systematic component with
spherical covariance and an uncorrelated per-sample component; a single
die-to-die (D2D) offset is added on top.
"""

from __future__ import annotations

import enum
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

FORMAT_VERSION = 1

# Tuning rates in uW per nm of correction.
INJECTION_UW_PER_NM = 216.0  # 130 uW/nm at 3 um radius, scaled to 5 um rings
HEATER_UW_PER_NM = 650.0


class PvParamError(ValueError):
    pass


class DieBoundsError(ValueError):
    pass


@dataclass(frozen=True)
class DieSpec:
    edge_mm: float = 20.0
    grid_n: int = 128

    def __post_init__(self):
        if not self.edge_mm > 0:
            raise PvParamError(f"edge_mm must be positive, got {self.edge_mm}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 2:
            raise PvParamError(f"grid_n must be an integer >= 2, got {self.grid_n}")

    @property
    def pitch_mm(self) -> float:
        return self.edge_mm / (self.grid_n - 1)


@dataclass(frozen=True)
class PvParams:
    sigma_d2d_nm: float = 1.01
    sigma_wid_nm: float = 0.61
    density: float = 0.5
    comb_start_nm: float = 1550.0
    channel_gap_nm: float = 0.8
    n_wavelengths: int = 64

    def __post_init__(self):
        if self.sigma_d2d_nm < 0 or self.sigma_wid_nm < 0:
            raise PvParamError("standard deviations must be non-negative")
        if not 0 < self.density <= 1:
            raise PvParamError(f"density must lie in (0, 1], got {self.density}")
        if not self.channel_gap_nm > 0:
            raise PvParamError("channel_gap_nm must be positive")
        if self.n_wavelengths < 1:
            raise PvParamError("n_wavelengths must be >= 1")

    @property
    def sigma_total_nm(self) -> float:
        return math.hypot(self.sigma_wid_nm, self.sigma_d2d_nm)

    def comb(self) -> np.ndarray:
        """Nominal DWDM channel wavelengths in nm."""
        return self.comb_start_nm + self.channel_gap_nm * np.arange(self.n_wavelengths)


@dataclass(frozen=True, eq=False)
class PvMap:
    field: np.ndarray
    d2d_offset_nm: float
    seed: int
    die: DieSpec
    params: PvParams

    def __eq__(self, other):
        if not isinstance(other, PvMap):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.d2d_offset_nm == other.d2d_offset_nm
            and self.die == other.die
            and self.params == other.params
            and np.array_equal(self.field, other.field)
        )

    def values(self) -> np.ndarray:
        """Field plus the die-wide offset, i.e. the shift at every grid node."""
        return self.field + self.d2d_offset_nm

    def tobytes(self) -> bytes:
        return self.field.tobytes() + np.float64(self.d2d_offset_nm).tobytes()


def spherical_covariance(h, range_mm: float, variance: float):
    """Spherical covariance model, zero beyond ``range_mm``."""
    r = np.minimum(np.asarray(h, dtype=float) / range_mm, 1.0)
    return variance * (1.0 - 1.5 * r + 0.5 * r**3)


def _embedding_size(n: int, range_cells: int) -> int:
    m = max(2 * (n - 1), n + range_cells)
    return 1 << int(math.ceil(math.log2(m)))


def correlated_field(rng: np.random.Generator, n: int, pitch: float,
                     range_mm: float, variance: float) -> np.ndarray:
    """Sample an ``n`` x ``n`` stationary Gaussian field by circulant embedding."""
    if variance == 0.0:
        return np.zeros((n, n))
    m = _embedding_size(n, int(math.ceil(range_mm / pitch)))
    k = np.arange(m)
    lag = np.minimum(k, m - k) * pitch
    h = np.hypot(lag[:, None], lag[None, :])
    base = spherical_covariance(h, range_mm, variance)
    eig = np.fft.fft2(base).real
    # Tiny negative eigenvalues come from the embedding, not the model.
    eig = np.clip(eig, 0.0, None)
    noise = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    full = np.fft.fft2(np.sqrt(eig / (m * m)) * noise)
    return full.real[:n, :n].copy()


def generate_pv_map(seed: int, die: DieSpec | None = None,
                    params: PvParams | None = None) -> PvMap:
    die = die or DieSpec()
    params = params or PvParams()
    rng = np.random.default_rng(seed)
    half_var = params.sigma_wid_nm**2 / 2.0
    range_mm = params.density * die.edge_mm
    systematic = correlated_field(rng, die.grid_n, die.pitch_mm, range_mm, half_var)
    random_part = rng.standard_normal((die.grid_n, die.grid_n)) * math.sqrt(half_var)
    d2d = float(rng.standard_normal() * params.sigma_d2d_nm)
    return PvMap(field=systematic + random_part, d2d_offset_nm=d2d, seed=int(seed),
                 die=die, params=params)


def sample_shift(pv: PvMap, x_mm, y_mm):
    """Bilinear interpolation of the map at die coordinates, offset included.

    Accepts scalars or equally shaped arrays. The first field axis is x.
    """
    x = np.asarray(x_mm, dtype=float)
    y = np.asarray(y_mm, dtype=float)
    edge = pv.die.edge_mm
    tol = 1e-9 * edge
    if np.any((x < -tol) | (x > edge + tol) | (y < -tol) | (y > edge + tol)):
        raise DieBoundsError(f"coordinates outside the {edge} mm die")
    n = pv.die.grid_n
    gx = np.clip(x / pv.die.pitch_mm, 0.0, n - 1)
    gy = np.clip(y / pv.die.pitch_mm, 0.0, n - 1)
    i0 = np.minimum(np.floor(gx).astype(int), n - 2)
    j0 = np.minimum(np.floor(gy).astype(int), n - 2)
    fx = gx - i0
    fy = gy - j0
    f = pv.field
    val = ((1 - fx) * (1 - fy) * f[i0, j0] + fx * (1 - fy) * f[i0 + 1, j0]
           + (1 - fx) * fy * f[i0, j0 + 1] + fx * fy * f[i0 + 1, j0 + 1])
    out = val + pv.d2d_offset_nm
    return float(out) if out.ndim == 0 else out


class TuningDirection(str, enum.Enum):
    RED_SHIFT_HEATER = "red_shift_heater"
    BLUE_SHIFT_INJECTION = "blue_shift_injection"
    NONE = "none"


@dataclass(frozen=True)
class TuningAction:
    direction: TuningDirection
    distance_nm: float
    power_uW: float


def lock_residual(shift_nm, gap_nm: float):
    """Offset of a resonance from its nearest comb channel.

    Equidistant cases stay on the ring's own channel, so the result lies in
    [-gap/2, gap/2] and keeps the sign of the original shift.
    """
    s = np.asarray(shift_nm, dtype=float)
    q = s / gap_nm
    n = np.sign(q) * np.ceil(np.abs(q) - 0.5)
    r = s - n * gap_nm
    return np.clip(r, -gap_nm / 2, gap_nm / 2)


def remedy_tuning(shift_nm: float, params: PvParams | None = None) -> TuningAction:
    params = params or PvParams()
    r = float(lock_residual(shift_nm, params.channel_gap_nm))
    if r > 0:
        return TuningAction(TuningDirection.BLUE_SHIFT_INJECTION, r, INJECTION_UW_PER_NM * r)
    if r < 0:
        return TuningAction(TuningDirection.RED_SHIFT_HEATER, -r, HEATER_UW_PER_NM * -r)
    return TuningAction(TuningDirection.NONE, 0.0, 0.0)


def tuning_power_uW(shifts_nm, params: PvParams | None = None) -> np.ndarray:
    """Vectorised remedy power for many rings; matches :func:`remedy_tuning`."""
    params = params or PvParams()
    r = lock_residual(shifts_nm, params.channel_gap_nm)
    return np.where(r > 0, INJECTION_UW_PER_NM * r, HEATER_UW_PER_NM * -r)


# -- persistence -----------------------------------------------------------

def save_pv_map(pv: PvMap, path) -> None:
    meta = {
        "format": "pnocsec.pvmap",
        "version": FORMAT_VERSION,
        "seed": pv.seed,
        "d2d_offset_nm": pv.d2d_offset_nm,
        "die": asdict(pv.die),
        "params": asdict(pv.params),
    }
    np.savez(path, field=pv.field, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8))


def load_pv_map(path) -> PvMap:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        field = np.array(data["field"])
    if meta.get("format") != "pnocsec.pvmap":
        raise ValueError(f"{path} is not a PV map file")
    if meta["version"] > FORMAT_VERSION:
        raise ValueError(f"unsupported PV map version {meta['version']}")
    return PvMap(field=field, d2d_offset_nm=meta["d2d_offset_nm"], seed=meta["seed"],
                 die=DieSpec(**meta["die"]), params=PvParams(**meta["params"]))


def summarize(pv: PvMap) -> dict:
    v = pv.values()
    return {
        "seed": pv.seed,
        "grid": pv.die.grid_n,
        "edge_mm": pv.die.edge_mm,
        "d2d_offset_nm": pv.d2d_offset_nm,
        "min_nm": float(v.min()),
        "max_nm": float(v.max()),
        "mean_nm": float(v.mean()),
        "std_nm": float(v.std()),
    }


def pv_map_bytes(pv: PvMap) -> bytes:
    buf = io.BytesIO()
    save_pv_map(pv, buf)
    return buf.getvalue()
