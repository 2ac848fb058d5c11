"""Experiment specs: PV-map sweeps, secured-channel sweeps and attack batteries.

A spec is one YAML (or JSON) document::

    name: sensitivity.desk
    fabric: {builder: swiftnoc, scale: 8, n_channels: 8}
    pv: {n_maps: 3, base_seed: 100}
    profiles: {loss: loss_default, energy: energy_default}
    sim:
      pdes_enabled: true
      ramps_enabled: true
      measured_packets: 2000
      traffic: {mode: synthetic_uniform, injection_rate: 0.02}
    sweep:
      - {label: s0, secured_count: 0}
      - {label: s2, secured_count: 2}
    attacks: []
    output: sensitivity

Outputs land in ``<output root>/<output>`` where the root is the
``PNOCSEC_OUTPUT`` environment variable or the current directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .attacks import AttackScenario, Attacker, ScenarioError
from .engine import RunReport, SimConfig, TrafficSpec, run
from .fabric import BUILDERS, FabricError, build
from .photonics import EnergyParams, LossParams, load_profile, profile_dict
from .pvmap import DieSpec, PvParams, generate_pv_map

CSV_SCHEMA_VERSION = 1
CSV_BASE_COLUMNS = [
    "schema_version", "experiment", "point", "pv_seed", "sim_seed", "secured_channels",
    "pdes_enabled", "ramps_enabled", "avg_latency_cycles", "packets_injected", "packets_delivered",
    "measured_delivered", "window_cycles", "dynamic_energy_J", "static_power_W", "static_energy_J",
    "total_energy_J", "edp_Js", "laser_photonic_W", "laser_electrical_W", "integrity_failures",
    "mean_traversals",
]
OUTPUT_ENV = "PNOCSEC_OUTPUT"


class SpecError(ValueError):
    """Validation failure; ``problems`` holds (field path, message) pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.problems))


class ExperimentFailed(RuntimeError):
    def __init__(self, msg, outputs):
        super().__init__(msg)
        self.outputs = outputs


_SIM_KEYS = {"clock_ghz", "packet_bits", "pdes_enabled", "ramps_enabled", "warmup_cycles",
             "measured_packets", "seed", "traffic", "stall_cycles", "max_cycles", "secured_channels"}
_TRAFFIC_KEYS = {f.name for f in fields(TrafficSpec)}


@dataclass
class ExperimentSpec:
    name: str
    fabric: dict
    n_maps: int = 1
    base_seed: int = 0
    pv_params: dict = field(default_factory=dict)
    loss_profile: str | None = None
    energy_profile: str | None = None
    sim: dict = field(default_factory=dict)
    sweep: list = field(default_factory=list)
    attacks: list = field(default_factory=list)
    output: str = "results"
    workers: int = 1
    document: dict = field(default_factory=dict, repr=False)

    def loss(self) -> LossParams:
        return load_profile(self.loss_profile) if self.loss_profile else LossParams()

    def energy(self) -> EnergyParams:
        return load_profile(self.energy_profile) if self.energy_profile else EnergyParams()


def _check_keys(d, allowed, path, problems):
    for k in d:
        if k not in allowed:
            problems.append((f"{path}.{k}", "unknown field"))


def parse_spec(doc: dict) -> ExperimentSpec:
    problems = []
    if not isinstance(doc, dict):
        raise SpecError([("$", "spec must be a mapping")])
    _check_keys(doc, {"name", "fabric", "pv", "profiles", "sim", "sweep", "attacks", "output", "workers"},
                "$", problems)
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        problems.append(("$.name", "required non-empty string"))
    fab = doc.get("fabric")
    if not isinstance(fab, dict) or fab.get("builder") not in BUILDERS:
        problems.append(("$.fabric.builder", f"must be one of {sorted(BUILDERS)}"))
    pv = doc.get("pv", {}) or {}
    _check_keys(pv, {"n_maps", "base_seed", "params"}, "$.pv", problems)
    n_maps = pv.get("n_maps", 1)
    if not isinstance(n_maps, int) or n_maps < 1:
        problems.append(("$.pv.n_maps", "must be an integer >= 1"))
    pv_params = pv.get("params", {}) or {}
    try:
        PvParams(**pv_params)
    except (TypeError, ValueError) as e:
        problems.append(("$.pv.params", str(e)))
    prof = doc.get("profiles", {}) or {}
    _check_keys(prof, {"loss", "energy"}, "$.profiles", problems)
    for kind, typ in (("loss", LossParams), ("energy", EnergyParams)):
        if prof.get(kind):
            try:
                if not isinstance(load_profile(prof[kind]), typ):
                    problems.append((f"$.profiles.{kind}", f"profile is not a {kind} profile"))
            except (OSError, KeyError, TypeError, ValueError) as e:
                problems.append((f"$.profiles.{kind}", f"cannot load: {e}"))
    sim = doc.get("sim", {}) or {}
    _check_keys(sim, _SIM_KEYS, "$.sim", problems)
    _check_keys(sim.get("traffic", {}) or {}, _TRAFFIC_KEYS, "$.sim.traffic", problems)
    sweep = doc.get("sweep")
    if not isinstance(sweep, list) or not sweep:
        problems.append(("$.sweep", "must be a non-empty list of override mappings"))
        sweep = []
    for i, pt in enumerate(sweep):
        if not isinstance(pt, dict):
            problems.append((f"$.sweep[{i}]", "must be a mapping"))
            continue
        _check_keys(pt, _SIM_KEYS | {"label", "secured_count"}, f"$.sweep[{i}]", problems)
    attacks = doc.get("attacks", []) or []
    for i, a in enumerate(attacks):
        try:
            AttackScenario.from_dict(dict(a))
        except (ScenarioError, TypeError, ValueError) as e:
            problems.append((f"$.attacks[{i}]", str(e)))
    if problems:
        raise SpecError(problems)
    spec = ExperimentSpec(
        name=name, fabric=dict(fab), n_maps=n_maps, base_seed=int(pv.get("base_seed", 0)),
        pv_params=dict(pv_params), loss_profile=prof.get("loss"), energy_profile=prof.get("energy"),
        sim=dict(sim), sweep=[dict(p) for p in sweep], attacks=[dict(a) for a in attacks],
        output=str(doc.get("output", name)), workers=int(doc.get("workers", 1)),
        document=json.loads(json.dumps(doc)))
    # Building every sweep point once surfaces bad overrides before any run starts.
    try:
        fabric = build_fabric(spec)
    except (FabricError, TypeError, ValueError) as e:
        raise SpecError([("$.fabric", str(e))]) from None
    for i, pt in enumerate(spec.sweep):
        try:
            make_config(spec, fabric, pt, None)
        except (TypeError, ValueError) as e:
            problems.append((f"$.sweep[{i}]", str(e)))
    if problems:
        raise SpecError(problems)
    return spec


def load_spec(path) -> ExperimentSpec:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SpecError([("$", f"unparseable spec: {e}")]) from None
    return parse_spec(doc)


def build_fabric(spec: ExperimentSpec):
    kw = {k: v for k, v in spec.fabric.items() if k != "builder"}
    return build(spec.fabric["builder"], **kw)


def point_label(pt: dict, i: int) -> str:
    return str(pt.get("label", f"p{i}"))


def make_config(spec: ExperimentSpec, fabric, point: dict, pv_map) -> SimConfig:
    merged = {**spec.sim, **{k: v for k, v in point.items() if k not in ("label", "secured_count")}}
    traffic = TrafficSpec(**{**spec.sim.get("traffic", {}), **point.get("traffic", {})})
    merged.pop("traffic", None)
    if "secured_count" in point:
        n = int(point["secured_count"])
        if not 0 <= n <= len(fabric.channels):
            raise ValueError(f"secured_count {n} outside 0..{len(fabric.channels)}")
        merged["secured_channels"] = range(n)
    return SimConfig(fabric=fabric, traffic=traffic, pv_map=pv_map, pv_params=PvParams(**spec.pv_params),
                     loss=spec.loss(), energy=spec.energy(), **merged)


def _run_job(args):
    spec, i_map, i_pt = args
    fabric = build_fabric(spec)
    pv_seed = spec.base_seed + i_map
    pv = generate_pv_map(pv_seed, DieSpec(fabric.die.edge_mm, fabric.die.grid_n), PvParams(**spec.pv_params))
    cfg = make_config(spec, fabric, spec.sweep[i_pt], pv)
    cfg.attackers = [Attacker(AttackScenario.from_dict(dict(a)), keep_events=False) for a in spec.attacks]
    rep = run(cfg)
    return i_map, i_pt, pv_seed, cfg, rep


def _row(spec, label, pv_seed, cfg: SimConfig, rep: RunReport) -> dict:
    row = {
        "schema_version": CSV_SCHEMA_VERSION, "experiment": spec.name, "point": label,
        "pv_seed": pv_seed, "sim_seed": cfg.seed,
        "secured_channels": " ".join(str(c) for c in sorted(cfg.effective_secured())) if cfg.pdes_enabled else "",
        "pdes_enabled": cfg.pdes_enabled, "ramps_enabled": cfg.ramps_enabled,
    }
    row.update(rep.summary_row())
    return row


def aggregate(rows: list[dict], numeric: list[str]) -> dict:
    """Mean and min-max band of each numeric column per sweep point, across PV maps."""
    out = {}
    for r in rows:
        out.setdefault(r["point"], []).append(r)
    agg = {}
    for point, rs in out.items():
        agg[point] = {"n_maps": len(rs)}
        for col in numeric:
            v = np.array([float(r[col]) for r in rs])
            agg[point][col] = {"mean": float(v.mean()), "min": float(v.min()), "max": float(v.max())}
    return agg


def output_dir(spec: ExperimentSpec, root=None) -> Path:
    base = Path(root if root is not None else os.environ.get(OUTPUT_ENV, "."))
    return base / spec.output


def run_experiment(spec: ExperimentSpec, root=None) -> dict:
    """Run every (PV map x sweep point) job and write CSV, JSON, aggregate and manifest files."""
    out = output_dir(spec, root)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(spec, m, p) for m in range(spec.n_maps) for p in range(len(spec.sweep))]
    results, failure = [], None
    try:
        if spec.workers > 1:
            with ProcessPoolExecutor(spec.workers) as pool:
                for r in pool.map(_run_job, jobs):
                    results.append(r)
        else:
            for j in jobs:
                results.append(_run_job(j))
    except Exception as e:  # partial results are still written below
        failure = e
    results.sort(key=lambda r: (r[1], r[0]))
    rows, full = [], []
    for i_map, i_pt, pv_seed, cfg, rep in results:
        label = point_label(spec.sweep[i_pt], i_pt)
        rows.append(_row(spec, label, pv_seed, cfg, rep))
        full.append({"point": label, "pv_seed": pv_seed, "report": report_to_dict(rep)})
    extra = sorted({k for r in rows for k in r} - set(CSV_BASE_COLUMNS))
    columns = CSV_BASE_COLUMNS + extra
    paths = {"csv": out / "runs.csv", "json": out / "runs.json",
             "aggregate": out / "aggregate.json", "manifest": out / "manifest.json"}
    with open(paths["csv"], "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        w.writerows(rows)
    paths["json"].write_text(json.dumps(full, indent=1, sort_keys=True))
    numeric = [c for c in columns if c not in ("schema_version", "experiment", "point", "pv_seed", "sim_seed",
                                               "secured_channels", "pdes_enabled", "ramps_enabled")]
    paths["aggregate"].write_text(json.dumps(aggregate(rows, numeric), indent=1, sort_keys=True))
    paths["manifest"].write_text(json.dumps(manifest(spec, results, paths, failure), indent=1, sort_keys=True))
    if failure is not None:
        raise ExperimentFailed(f"{type(failure).__name__}: {failure}", paths) from failure
    return paths


def report_to_dict(rep: RunReport) -> dict:
    d = rep.summary_row()
    d["latency_histogram"] = {str(k): v for k, v in rep.latency_histogram.items()}
    d["channel_utilization"] = {str(k): v for k, v in rep.channel_utilization.items()}
    d["empty_measurement"] = rep.empty_measurement
    d["packets_in_flight"] = rep.packets_in_flight
    d["end_cycle"] = rep.end_cycle
    d["security"] = [s.to_dict() for s in rep.security]
    return d


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest(spec: ExperimentSpec, results, paths, failure) -> dict:
    return {
        "experiment": spec.name,
        "spec_document": spec.document,
        "resolved": {k: v for k, v in asdict(spec).items() if k != "document"},
        "package_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "pv_seeds": sorted({r[2] for r in results}) or [spec.base_seed + m for m in range(spec.n_maps)],
        "sim_seeds": sorted({r[3].seed for r in results}),
        "profiles": {"loss": profile_dict(spec.loss()), "energy": profile_dict(spec.energy())},
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "completed_runs": len(results),
        "planned_runs": spec.n_maps * len(spec.sweep),
        "failure": None if failure is None else f"{type(failure).__name__}: {failure}",
        "outputs": {k: {"file": p.name, "sha256": _sha256(p)} for k, p in paths.items() if k != "manifest"},
    }
