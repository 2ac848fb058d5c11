import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnocsec.fabric import build, build_generic, secure
from pnocsec.photonics import (XOR_PASS_PJ, EnergyParams, LossParams, PathDescriptor, channel_path,
                               electrical_energy, fabric_laser_power, laser_power, list_profiles,
                               load_profile, packet_energy, path_loss_db, static_power, worst_case_loss)
from pnocsec.pvmap import DieSpec, generate_pv_map, remedy_tuning, sample_shift

LP = LossParams()


def test_path_loss_hand_sum():
    p = PathDescriptor(length_cm=2.0, bends_90=4, splitters=3, through_mrs_single=100,
                       through_mrs_double=64, drop_mrs=1)
    want = 2 * 0.274 + 4 * 0.0085 + 3 * 0.2 + 100 * 0.002 + 64 * 0.023 + 0.5
    assert path_loss_db(p, LP) == pytest.approx(want, abs=1e-12)


counts = st.integers(0, 500)


@given(st.floats(0, 50), counts, counts, counts, counts, counts)
def test_path_loss_additive(length, b, s, t, d, r):
    a = PathDescriptor(length, b, s, t, d, r)
    one = PathDescriptor(1.0, 1, 1, 1, 1, 1)
    assert path_loss_db(a + one, LP) == pytest.approx(path_loss_db(a, LP) + path_loss_db(one, LP), rel=1e-12)
    assert path_loss_db(a, LP) >= 0


def test_negative_path_rejected():
    with pytest.raises(ValueError):
        PathDescriptor(length_cm=-1)
    with pytest.raises(ValueError):
        LossParams(splitter_db=-0.1)
    with pytest.raises(ValueError):
        LossParams(wallplug_efficiency=0)


def test_laser_power_dbm_conversion():
    # -26 dBm + 6 dB = -20 dBm = 10 uW per wavelength
    ph, el = laser_power(6.0, LP, n_wavelengths=64, n_waveguides=2)
    assert ph == pytest.approx(128 * 1e-5, rel=1e-12)
    assert el == pytest.approx(ph / 0.03, rel=1e-12)
    ph10, el10 = laser_power(6.0, load_profile("loss_wallplug10"), 64, 2)
    assert ph10 == ph and el10 == pytest.approx(ph / 0.10)


@given(st.floats(0, 30), st.floats(0, 10))
def test_laser_power_monotone(loss, extra):
    assert laser_power(loss + extra, LP, 64)[0] >= laser_power(loss, LP, 64)[0]


@pytest.mark.parametrize("name", ["firefly", "swiftnoc", "luminoc"])
def test_ramps_delta_is_double_mr_count(name):
    plain = build(name)
    sec = secure(plain)
    g0, l0 = worst_case_loss(plain, LP)
    g1, l1 = worst_case_loss(sec, LP)
    assert l1 - l0 == pytest.approx(64 * LP.through_loss_double_mr_db, abs=1e-9)
    assert g0 == g1


def test_path_counts_generic():
    fab = secure(build_generic(2, 3))
    ch = fab.channels[0]
    s0, s1 = ch.sources
    d_last = ch.destinations[-1]
    p = channel_path(ch, s0, d_last)
    # s1 modulators and the first two detector banks are passed on the way
    assert p.through_mrs_single == 3 * 64
    assert p.through_mrs_double == 64
    assert p.drop_mrs == 1 and p.splitters == 0
    assert channel_path(ch, s1, ch.destinations[0]).through_mrs_single == 0


def test_packet_energy_values():
    assert packet_energy(512, EnergyParams(), False) == pytest.approx(512 * 1.329e-12, rel=1e-12)
    d = packet_energy(512, EnergyParams(), True) - packet_energy(512, EnergyParams(), False)
    assert d == pytest.approx(2 * XOR_PASS_PJ * 1e-12, rel=1e-9)
    assert packet_energy(512, EnergyParams(), False, 3) == pytest.approx(
        packet_energy(512, EnergyParams(), False) + electrical_energy(512, EnergyParams(), 3))
    with pytest.raises(ValueError):
        packet_energy(0, EnergyParams(), False)


def test_static_power_bruteforce():
    fab = secure(build_generic(2, 3))
    pv = generate_pv_map(4, DieSpec(grid_n=33))
    ep = EnergyParams()
    total_uw = 0.0
    for arr in fab.mr_positions().values():
        for x, y in arr:
            total_uw += ep.dithering_uw_per_mr + remedy_tuning(sample_shift(pv, x, y)).power_uW
    want = total_uw * 1e-6 + fabric_laser_power(fab, LP)[1]
    assert static_power(fab, pv, ep, LP) == pytest.approx(want, rel=1e-12)


def test_profiles_shipped():
    names = list_profiles()
    assert {"loss_default", "loss_wallplug10", "energy_default"} <= set(names)
    assert load_profile("loss_default") == LossParams()
    assert load_profile("energy_default") == EnergyParams()


def test_profile_from_path(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"kind": "loss", "splitter_db": 0.3}')
    assert load_profile(str(p)).splitter_db == 0.3
