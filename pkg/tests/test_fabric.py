import json

import pytest

from pnocsec.fabric import (DOUBLE_MRS_PER_RESERVATION, ChannelKind, FabricError, ScalabilityError,
                            attach_ramps, build, build_firefly, build_generic, build_luminoc,
                            build_swiftnoc, secure)


@pytest.mark.parametrize("name,meta,rom", [("firefly", 14, 8), ("swiftnoc", 64, 32), ("luminoc", 16, 8)])
def test_full_scale_structure(name, meta, rom):
    fab = secure(build(name))
    for ch in fab.channels:
        assert ch.ramps.metadata_detector_count == meta
        assert ch.ramps.double_mr_count == DOUBLE_MRS_PER_RESERVATION
        assert {ch.rom_entries(s) for s in ch.sources} == {rom}
    audit = fab.audit()
    assert all(c["destination_rom_entries"] == 2 for c in audit["channels"])


def test_metadata_pairs_are_disjoint():
    ch = secure(build_swiftnoc()).channels[0]
    pairs = [ch.ramps.pair_for(d) for d in ch.destinations]
    flat = [w for p in pairs for w in p]
    assert len(set(flat)) == len(flat) == 64
    assert pairs[0] == (0, 1)


def test_ramps_scalability_limit():
    ok = build_generic(1, 32)
    attach_ramps(ok.channels[0])
    big = build_generic(1, 33)
    with pytest.raises(ScalabilityError, match="at most 32"):
        attach_ramps(big.channels[0])


def test_double_attach_and_unknown_channel():
    fab = secure(build_generic())
    with pytest.raises(FabricError):
        attach_ramps(fab.channels[0])
    with pytest.raises(FabricError):
        secure(fab, [5])


def test_swmr_needs_one_writer():
    with pytest.raises(FabricError):
        build_generic(2, 2, kind="swmr")


def test_secure_subset_only():
    fab = secure(build_swiftnoc(scale=8, n_channels=8), [1, 3], ramps=False)
    assert [c.secured for c in fab.channels] == [i in (1, 3) for i in range(8)]
    assert all(c.ramps is None for c in fab.channels)


def test_reachable_excludes_self():
    ch = build_swiftnoc(scale=8, n_channels=8).channels[2]
    assert ch.kind is ChannelKind.MWMR
    assert 4 not in ch.reachable(4) and len(ch.reachable(4)) == 7


def test_firefly_routes():
    fab = build_firefly()
    assert len(fab.endpoints) == 32
    same = [e.id for e in fab.endpoints if e.gateway == 0]
    assert fab.route(same[0], same[1]).legs == ()
    other = next(e.id for e in fab.endpoints if e.gateway == 3)
    r = fab.route(same[0], other)
    assert r.legs == ((0, 0, 3),)
    assert r.electrical_hops == fab.endpoints[same[0]].access_hops + fab.endpoints[other].access_hops


def test_luminoc_routes():
    fab = build_luminoc()
    g = 8
    row = fab.route(0, 5)
    assert len(row.legs) == 1 and row.legs[0][0] == 0
    cross = fab.route(0, 2 * g + 3)   # row 0 col 0 -> row 2 col 3
    assert len(cross.legs) == 2
    (c1, a1, b1), (c2, a2, b2) = cross.legs
    assert (a1, b1) == (0, 3) and c1 == 0
    assert c2 == g + 3 and (a2, b2) == (3, 2 * g + 3)
    col = fab.route(0, 2 * g)
    assert len(col.legs) == 1 and col.legs[0][0] == g


def test_mr_inventory_oracle():
    fab = secure(build_generic(2, 3, waveguides=2))
    ch = fab.channels[0]
    pos = fab.mr_positions()
    per_wg = sum(ch.waveguide_wavelengths)
    assert len(pos["modulator"]) == len(ch.sources) * per_wg
    assert len(pos["detector"]) == len(ch.destinations) * per_wg
    assert len(pos["metadata"]) == 2 * len(ch.destinations)
    assert len(pos["double"]) == 2 * DOUBLE_MRS_PER_RESERVATION
    edge = fab.die.edge_mm
    for arr in pos.values():
        assert ((arr >= 0) & (arr <= edge)).all()


def test_banks_differ_across_channels():
    fab = build_swiftnoc(scale=8, n_channels=8)
    a = fab.detector_bank(0, 3)
    b = fab.detector_bank(1, 3)
    assert a.shape == (64, 2) and not (a == b).all()


def test_json_export():
    doc = json.loads(secure(build_firefly()).to_json())
    assert doc["format"] == "pnocsec.fabric"
    assert doc["channels"][0]["metadata_detectors"] == 14


def test_taps_ordered_along_waveguide():
    for fab in (build_firefly(), build_swiftnoc(), build_luminoc()):
        for ch in fab.channels:
            arcs = [t.arc_mm for t in ch.source_taps + ch.dest_taps]
            assert arcs == sorted(arcs)
            assert ch.length_mm >= arcs[-1] - arcs[0]
