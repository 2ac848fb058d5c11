"""Command line: ``pnocsec run <spec>``, ``pnocsec inspect <artifact>``, ``pnocsec profiles list``.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import ExperimentFailed, SpecError, load_spec, output_dir, run_experiment
from .fabric import BUILDERS, Fabric, FabricError, build, secure
from .keyforge import KeyRing, build_keystores
from .photonics import LossParams, list_profiles, load_profile, profile_dict, worst_case_loss
from .pvmap import DieSpec, generate_pv_map, load_pv_map, save_pv_map, summarize

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _parse_builtin(text: str):
    """``firefly`` or ``firefly:8`` style builtin fabric names; None if not one."""
    name, _, arg = text.partition(":")
    if name not in BUILDERS or (arg and not arg.isdigit()):
        return None
    return build(name, int(arg)) if arg else build(name)


def describe_fabric(fab: Fabric, lp: LossParams, out) -> None:
    plain = fab
    sec = secure(fab) if not any(c.ramps for c in fab.channels) else fab
    audit = sec.audit()
    print(f"fabric {fab.name}: {audit['gateways']} gateways, {audit['endpoints']} endpoints, "
          f"{len(audit['channels'])} channels", file=out)
    for c in audit["channels"]:
        print(f"  ch{c['id']:<3} {c['kind']:<4} src={c['sources']:<3} dst={c['destinations']:<3} "
              f"wg={c['waveguides']} len={c['length_mm']:.1f}mm "
              f"metadata_detectors={c['metadata_detectors']} double_mrs={c['double_mrs']} "
              f"source_rom={c['source_rom_entries']} dest_rom={c['destination_rom_entries']}", file=out)
    g0, l0 = worst_case_loss(plain, lp)
    g1, l1 = worst_case_loss(sec, lp)
    print(f"worst-case loss node: gateway {g0} at {l0:.3f} dB without reservation waveguide, "
          f"gateway {g1} at {l1:.3f} dB with it (delta {l1 - l0:.3f} dB)", file=out)


def describe_keys(ring: KeyRing, out) -> None:
    for (ch, gw, role), st in sorted(ring.stores.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2].value)):
        print(f"ch{ch} gateway {gw} {role.value} ROM ({st.entries} entries)", file=out)
        for d, k in st.unicast_entries:
            print(f"  unicast[{d}]  {k.hex()}", file=out)
        print(f"  multicast   {st.multicast_entry.hex()}", file=out)


def describe_pvmap(pv, out) -> None:
    for k, v in summarize(pv).items():
        print(f"{k}: {v}", file=out)


def cmd_inspect(args, out) -> int:
    target = args.artifact
    fab = _parse_builtin(target)
    lp = load_profile(args.loss) if args.loss else LossParams()
    if fab is not None:
        describe_fabric(fab, lp, out)
        if args.keys_out or args.pvmap_out:
            pv = generate_pv_map(args.pv_seed, DieSpec(fab.die.edge_mm, fab.die.grid_n))
            if args.pvmap_out:
                save_pv_map(pv, args.pvmap_out)
            if args.keys_out:
                Path(args.keys_out).write_text(build_keystores(secure(fab), pv, args.pv_seed).to_json())
        return EXIT_OK
    path = Path(target)
    if not path.is_file():
        print(f"error: no such artifact or builtin fabric: {target}", file=sys.stderr)
        return EXIT_VALIDATION
    if path.suffix == ".npz":
        describe_pvmap(load_pv_map(path), out)
        return EXIT_OK
    doc = json.loads(path.read_text())
    fmt = doc.get("format")
    if fmt == "pnocsec.keys":
        describe_keys(KeyRing.from_json(path.read_text()), out)
    elif fmt == "pnocsec.fabric":
        print(json.dumps({k: v for k, v in doc.items() if k != "gateway_positions_mm"}, indent=2), file=out)
    else:
        print(f"error: unrecognised artifact format {fmt!r}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_run(args, out) -> int:
    try:
        spec = load_spec(args.spec)
    except FileNotFoundError:
        print(f"error: spec file not found: {args.spec}", file=sys.stderr)
        return EXIT_VALIDATION
    except SpecError as e:
        for p, m in e.problems:
            print(f"invalid spec: {p}: {m}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.workers is not None:
        spec.workers = args.workers
    try:
        paths = run_experiment(spec, args.output)
    except ExperimentFailed as e:
        print(f"error: {e}; partial results in {output_dir(spec, args.output)}", file=sys.stderr)
        return EXIT_RUNTIME
    for k, p in paths.items():
        print(f"{k}: {p}", file=out)
    return EXIT_OK


def cmd_profiles(args, out) -> int:
    for name in list_profiles():
        obj = load_profile(name)
        print(f"{name} ({type(obj).__name__})", file=out)
        if args.verbose:
            for k, v in profile_dict(obj).items():
                print(f"  {k} = {v}", file=out)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pnocsec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", help="run an experiment spec")
    r.add_argument("spec")
    r.add_argument("--output", help="output root (default: $PNOCSEC_OUTPUT or cwd)")
    r.add_argument("--workers", type=int)
    r.set_defaults(fn=cmd_run)
    i = sub.add_parser("inspect", help="dump a fabric, key file, PV map or builtin fabric (e.g. firefly:8)")
    i.add_argument("artifact")
    i.add_argument("--loss", help="loss profile name or path")
    i.add_argument("--pv-seed", type=int, default=0)
    i.add_argument("--keys-out", help="for builtin fabrics: write the forged key file here")
    i.add_argument("--pvmap-out", help="for builtin fabrics: write the PV map here")
    i.set_defaults(fn=cmd_inspect)
    p = sub.add_parser("profiles", help="parameter profiles")
    psub = p.add_subparsers(dest="action", required=True)
    pl = psub.add_parser("list")
    pl.add_argument("-v", "--verbose", action="store_true")
    pl.set_defaults(fn=cmd_profiles)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_VALIDATION if e.code else EXIT_OK
    try:
        return args.fn(args, out)
    except (FabricError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main_exit():
    sys.exit(main())
