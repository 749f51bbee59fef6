"""Propagation, capacity, CQI quantization, and synthetic trace checks."""

import math

import numpy as np
import pytest

from seamesh.channel import (CQI_MAX, MESH_3P5GHZ, MMWAVE_CELL, CqiTrace,
                             RadioParams, TraceParams, capacity_bps,
                             cqi_lower_edge_db, gain_matrix,
                             generate_cqi_trace, pathloss_db, sinr_to_cqi)


def test_pathloss_reference_and_slope():
    # At 1 m only the reference loss remains; two decades at exponent 2.7
    # add exactly 54 dB.
    assert pathloss_db(1.0, MESH_3P5GHZ) == pytest.approx(43.3)
    assert pathloss_db(100.0, MESH_3P5GHZ) == pytest.approx(97.3)
    assert pathloss_db(10.0, MMWAVE_CELL) == pytest.approx(81.4)


def test_pathloss_monotone_in_distance():
    d = np.linspace(1.0, 1500.0, 200)
    pl = np.array([pathloss_db(x, MESH_3P5GHZ) for x in d])
    assert (np.diff(pl) > 0).all()


def test_pathloss_rejects_sub_reference_distance():
    with pytest.raises(ValueError):
        pathloss_db(0.5, MESH_3P5GHZ)


def test_gain_matrix_matches_scalar_pathloss():
    pos = np.array([[0.0, 0.0], [300.0, 400.0], [10.0, 0.0]])
    g = gain_matrix(pos, MESH_3P5GHZ)
    want = 10.0 ** (-pathloss_db(500.0, MESH_3P5GHZ) / 10.0)
    assert g[0, 1] == pytest.approx(want, rel=1e-12)
    assert g[1, 0] == pytest.approx(want, rel=1e-12)
    # sub-metre separations clamp to the 1 m reference
    pos2 = np.array([[0.0, 0.0], [0.1, 0.0]])
    g2 = gain_matrix(pos2, MESH_3P5GHZ)
    assert g2[0, 1] == pytest.approx(10.0 ** (-4.33), rel=1e-12)


def test_capacity_shannon_point():
    # log2(1 + 15) = 4 bits/s/Hz
    assert capacity_bps(15.0, 100e6) == pytest.approx(4e8)
    assert capacity_bps(0.0, 100e6) == 0.0


def test_noise_power_scales_with_bandwidth():
    n1 = MESH_3P5GHZ.noise_power_w()
    wide = RadioParams(**{**MESH_3P5GHZ.__dict__, "bandwidth_hz": 20e6})
    assert wide.noise_power_w() == pytest.approx(2 * n1)


def test_cqi_quantization_points():
    assert sinr_to_cqi(-10.0) == 0
    assert sinr_to_cqi(0.0) == 3
    assert sinr_to_cqi(40.0) == CQI_MAX
    # lower edge is inclusive: exactly 2c - 6 dB maps to c
    for c in range(CQI_MAX + 1):
        assert sinr_to_cqi(float(cqi_lower_edge_db(c))) == c


def test_cqi_edges_are_2db_apart():
    edges = cqi_lower_edge_db(np.arange(16))
    assert np.allclose(np.diff(edges), 2.0)


def test_trace_deterministic_and_consistent():
    tp = TraceParams()
    a = generate_cqi_trace(500, tp, seed=7)
    b = generate_cqi_trace(500, tp, seed=7)
    assert np.array_equal(a.sinr_db, b.sinr_db)
    assert np.array_equal(a.cqi, b.cqi)
    c = generate_cqi_trace(500, tp, seed=8)
    assert not np.array_equal(a.sinr_db, c.sinr_db)
    # the stored cqi must be the quantization of the stored sinr
    assert np.array_equal(a.cqi, sinr_to_cqi(a.sinr_db))


def test_trace_is_quiet_with_randomness_removed():
    tp = TraceParams(speed_mps=0.0, shadow_sigma_db=0.0,
                     block_p_enter=0.0, block_p_exit=1.0)
    tr = generate_cqi_trace(200, tp, seed=0)
    assert np.allclose(tr.sinr_db, tr.sinr_db[0])


def test_blockage_stationary_fraction():
    # Static UE, no shadowing, near-instant blockage transitions: the
    # fraction of slots attenuated by ~depth estimates the chain's
    # stationary probability 0.00625 / (0.00625 + 0.025) = 0.2.
    tp = TraceParams(speed_mps=0.0, shadow_sigma_db=0.0,
                     block_tau_slots=1e-9)
    tr = generate_cqi_trace(100_000, tp, seed=3)
    clear_level = tr.sinr_db.max()
    frac = float(np.mean(tr.sinr_db < clear_level - tp.block_depth_db / 2))
    assert abs(frac - 0.2) < 0.02


def test_blockage_ramps_limit_slot_steps():
    # With the 5-slot lag a single slot can move at most
    # depth * (1 - exp(-1/tau)) ~ 3.63 dB of attenuation.
    tp = TraceParams(speed_mps=0.0, shadow_sigma_db=0.0)
    tr = generate_cqi_trace(50_000, tp, seed=11)
    biggest = np.abs(np.diff(tr.sinr_db)).max()
    cap = tp.block_depth_db * (1.0 - math.exp(-1.0 / tp.block_tau_slots))
    assert biggest <= cap + 1e-9


def test_trace_params_validation():
    with pytest.raises(ValueError):
        TraceParams(block_tau_slots=0.0)


def test_trace_shuttle_turns_around():
    # Long horizon sweeps the lane repeatedly, so both the near-pass peak
    # and the far-end trough appear more than once.
    tp = TraceParams(speed_mps=10.0, shadow_sigma_db=0.0,
                     block_p_enter=0.0, block_p_exit=1.0)
    tr = generate_cqi_trace(10_000, tp, seed=0)
    peaks = np.flatnonzero(tr.sinr_db >= tr.sinr_db.max() - 0.01)
    assert peaks.max() - peaks.min() > 1000


def test_trace_csv_round_trip(tmp_path):
    tr = generate_cqi_trace(64, TraceParams(), seed=5)
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    back = CqiTrace.from_csv(path)
    assert np.array_equal(tr.cqi, back.cqi)
    assert np.array_equal(tr.sinr_db, back.sinr_db)


def test_trace_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("slot,snr,cqi\n0,1.0,3\n")
    with pytest.raises(ValueError):
        CqiTrace.from_csv(path)
