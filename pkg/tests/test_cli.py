import csv
import hashlib
import io
import json
from pathlib import Path

import pytest
import yaml

from pnocsec.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main
from pnocsec.experiment import SpecError, load_spec, parse_spec, run_experiment

ROOT = Path(__file__).resolve().parents[1]
EXP = ROOT / "experiments"


def call(*argv):
    out = io.StringIO()
    return main(list(argv), out), out.getvalue()


def small_spec(**over):
    doc = {
        "name": "t",
        "fabric": {"builder": "swiftnoc", "scale": 8, "n_channels": 8},
        "pv": {"n_maps": 2, "base_seed": 1},
        "sim": {"pdes_enabled": True, "ramps_enabled": True, "measured_packets": 200, "seed": 2,
                "traffic": {"injection_rate": 0.03}},
        "sweep": [{"label": "a", "secured_count": 0}, {"label": "b", "secured_count": 8}],
        "output": "t",
    }
    doc.update(over)
    return doc


def test_profiles_list():
    rc, out = call("profiles", "list")
    assert rc == EXIT_OK and "loss_default" in out


def test_inspect_builtin_firefly():
    rc, out = call("inspect", "firefly")
    assert rc == EXIT_OK
    assert "metadata_detectors=14" in out and "worst-case loss node" in out


def test_inspect_artifacts(tmp_path):
    keys, pvm = tmp_path / "k.json", tmp_path / "m.npz"
    rc, _ = call("inspect", "firefly:8", "--keys-out", str(keys), "--pvmap-out", str(pvm))
    assert rc == EXIT_OK
    rc, out = call("inspect", str(keys))
    assert rc == EXIT_OK
    hexes = [l.split()[-1] for l in out.splitlines() if l.strip().startswith("unicast[")]
    assert hexes and all(len(h) == 128 for h in hexes)
    rc, out = call("inspect", str(pvm))
    assert rc == EXIT_OK and "std_nm" in out and "min_nm" in out


def test_inspect_missing():
    rc, _ = call("inspect", "/nope/nothing.json")
    assert rc == EXIT_VALIDATION


def test_bad_verb():
    assert call("frobnicate")[0] == EXIT_VALIDATION


def test_empty_sweep_rejected():
    with pytest.raises(SpecError) as e:
        parse_spec(small_spec(sweep=[]))
    assert ("$.sweep" in [p for p, _ in e.value.problems])


def test_field_paths_in_diagnostics():
    doc = small_spec(pv={"n_maps": 0})
    doc["sweep"][1]["colour"] = "red"
    with pytest.raises(SpecError) as e:
        parse_spec(doc)
    paths = [p for p, _ in e.value.problems]
    assert "$.pv.n_maps" in paths and "$.sweep[1].colour" in paths


def test_run_validation_exit(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text(yaml.safe_dump(small_spec(sweep=[])))
    assert call("run", str(p), "--output", str(tmp_path))[0] == EXIT_VALIDATION
    assert call("run", str(tmp_path / "missing.yaml"))[0] == EXIT_VALIDATION


def test_run_outputs_and_regeneration(tmp_path, monkeypatch):
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump(small_spec()))
    monkeypatch.setenv("PNOCSEC_OUTPUT", str(tmp_path / "a"))
    rc, _ = call("run", str(p))
    assert rc == EXIT_OK
    out = tmp_path / "a" / "t"
    rows = list(csv.DictReader(open(out / "runs.csv")))
    assert [r["point"] for r in rows] == ["a", "a", "b", "b"]
    assert rows[0]["schema_version"] == "1"
    agg = json.loads((out / "aggregate.json").read_text())
    lat = agg["b"]["avg_latency_cycles"]
    assert lat["min"] <= lat["mean"] <= lat["max"]
    man = json.loads((out / "manifest.json").read_text())
    assert man["pv_seeds"] == [1, 2] and man["completed_runs"] == 4
    # Re-running from the manifest's spec document reproduces every output byte for byte.
    run_experiment(parse_spec(man["spec_document"]), tmp_path / "b")
    for key, f in (("csv", "runs.csv"), ("json", "runs.json"), ("aggregate", "aggregate.json")):
        assert (out / f).read_bytes() == (tmp_path / "b" / "t" / f).read_bytes()
        assert man["outputs"][key]["sha256"] == hashlib.sha256((out / f).read_bytes()).hexdigest()


def test_parallel_matches_serial(tmp_path):
    spec = parse_spec(small_spec())
    run_experiment(spec, tmp_path / "s")
    spec.workers = 2
    run_experiment(spec, tmp_path / "p")
    assert (tmp_path / "s/t/runs.csv").read_bytes() == (tmp_path / "p/t/runs.csv").read_bytes()


def test_midsweep_failure_keeps_partial(tmp_path):
    doc = small_spec()
    doc["sweep"].append({"label": "jam", "stall_cycles": 2, "traffic": {"injection_rate": 1.0},
                         "measured_packets": 100000})
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump(doc))
    rc, _ = call("run", str(p), "--output", str(tmp_path))
    assert rc == EXIT_RUNTIME
    man = json.loads((tmp_path / "t" / "manifest.json").read_text())
    assert man["failure"] and man["completed_runs"] >= 2
    assert (tmp_path / "t" / "runs.csv").exists()


def test_shipped_sensitivity_monotone(tmp_path):
    paths = run_experiment(load_spec(EXP / "sensitivity.desk.yaml"), tmp_path)
    agg = json.loads(paths["aggregate"].read_text())
    order = ["secured_0", "secured_1", "secured_2", "secured_4"]
    lat = [agg[k]["avg_latency_cycles"]["mean"] for k in order]
    assert lat == sorted(lat) and lat[0] < lat[-1]
    rows = list(csv.DictReader(open(paths["csv"])))
    for seed in {r["pv_seed"] for r in rows}:
        sub = {r["point"]: r for r in rows if r["pv_seed"] == seed}
        edp = [float(sub[k]["edp_Js"]) for k in order]
        assert edp == sorted(edp)


def test_shipped_lattice(tmp_path):
    paths = run_experiment(load_spec(EXP / "security.lattice.yaml"), tmp_path)
    rows = {r["point"]: r for r in csv.DictReader(open(paths["csv"]))}
    assert float(rows["baseline"]["rom.decipher_rate"]) == 1.0
    assert float(rows["pdes_only"]["rom.decipher_rate"]) == 1.0
    assert float(rows["pdes_ramps"]["passive.decipher_rate"]) == 0.0
    n = int(rows["pdes_ramps"]["rom.snooped"])
    rate = float(rows["pdes_ramps"]["rom.decipher_rate"])
    assert n >= 10_000 and abs(rate - 1 / 8) < 3 * (1 / 8 * 7 / 8 / n) ** 0.5
