import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispersive_interface.errors import InsideBand
from dispersive_interface.interface import (InterfaceMode, NoMode, decay_fit, decaying_states,
                                            find_interface_mode, impedance_sum_root, impedances,
                                            interface_candidates, interior_samples, mode_profile,
                                            scan_wronskian, wronskian)
from dispersive_interface.materials import apply_sigma_perturbation
from dispersive_interface.perturb import common_gaps
from dispersive_interface.spectrum import sign_changes

from conftest import DECAY, GAP1, OMEGA_M, WINDOW, make_fixture


def _same_cells():
    s = make_fixture()
    return s.with_cells(s.cell_a, s.cell_a)


def test_inside_band_rejected(fixture_structure):
    with pytest.raises(InsideBand):
        decaying_states(fixture_structure, 0.5)


def test_edge_limits(fixture_structure):
    lo, hi = GAP1
    near_lo = [impedances(fixture_structure, lo + d) for d in (1e-6, 1e-8)]
    near_hi = [impedances(fixture_structure, hi - d) for d in (1e-6, 1e-8)]
    # A's lower-edge mode has u(0) = 0 ... seen from the left Z- blows up, B's Z+ vanishes
    assert abs(near_lo[1].z_minus) > 9 * abs(near_lo[0].z_minus) > 1e2
    assert abs(near_lo[1].z_plus) < abs(near_lo[0].z_plus) / 9 < 1e-2
    assert abs(near_hi[1].z_plus) > 9 * abs(near_hi[0].z_plus) > 1e2
    assert abs(near_hi[1].z_minus) < abs(near_hi[0].z_minus) / 9 < 1e-2


def test_identical_cells_matched_impedance():
    s = _same_cells()
    for w in interior_samples(*GAP1, 16):
        p = impedances(s, w)
        assert p.z_minus == pytest.approx(p.z_plus, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99))
def test_impedance_sum_equals_scaled_wronskian(t):
    s = make_fixture()
    w = GAP1[0] + t * (GAP1[1] - GAP1[0])
    st_ = decaying_states(s, w)
    p = impedances(s, w)
    assert p.total == pytest.approx(-wronskian(st_) / (st_.left[1] * st_.right[1]), rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(-1.0, 1.0).filter(lambda v: abs(v) > 1e-3))
def test_wronskian_gauge(t, scale):
    # a rescaled reference flips or keeps the sign of the states but not the zero set
    s = make_fixture()
    w = GAP1[0] + t * (GAP1[1] - GAP1[0])
    base = decaying_states(s, w)
    ref = type(base)(w, scale * base.left, scale * base.right, base.lambda_a, base.lambda_b)
    again = decaying_states(s, w, ref)
    assert abs(abs(wronskian(again)) - abs(wronskian(base))) < 1e-12


def test_fixture_mode(fixture_structure, fixture_gap):
    res = find_interface_mode(fixture_structure, fixture_gap)
    assert isinstance(res, InterfaceMode)
    assert res.omega_m == pytest.approx(OMEGA_M, rel=1e-12)
    assert res.residual_determinant < 1e-10
    assert res.unique and res.bulk_a.value + res.bulk_b.value == 0
    assert res.decay_a == pytest.approx(DECAY, rel=1e-10)
    assert res.decay_b == pytest.approx(DECAY, rel=1e-10)


def test_single_sign_change(fixture_structure, fixture_gap):
    vals, _ = scan_wronskian(fixture_structure, interior_samples(fixture_gap.lower, fixture_gap.upper, 256))
    assert len(sign_changes(vals)) == 1


def test_impedance_root_agrees(fixture_structure, fixture_gap):
    w = find_interface_mode(fixture_structure, fixture_gap).omega_m
    assert abs(impedance_sum_root(fixture_structure, fixture_gap) - w) < 1e-10


def test_same_index_no_mode():
    s = _same_cells()
    res = find_interface_mode(s, common_gaps(s, WINDOW)[0])
    assert isinstance(res, NoMode)
    assert abs(res.index_sum) == 2


def test_impedance_monotone(fixture_structure, fixture_gap):
    pairs = [impedances(fixture_structure, w) for w in interior_samples(fixture_gap.lower, fixture_gap.upper, 64)]
    assert np.all(np.diff([p.z_plus for p in pairs]) < 0)
    assert np.all(np.diff([p.z_minus for p in pairs]) < 0)


def test_profile_decay(fixture_structure):
    prof = mode_profile(fixture_structure, OMEGA_M, 12)
    st_ = decaying_states(fixture_structure, OMEGA_M)
    assert decay_fit(prof, "right") == pytest.approx(abs(st_.lambda_b), rel=1e-2)
    assert decay_fit(prof, "left") == pytest.approx(abs(st_.lambda_a), rel=1e-2)
    assert np.all(np.diff(np.abs(prof["u"][12:])) < 0)


def test_profile_zero_cells(fixture_structure):
    prof = mode_profile(fixture_structure, OMEGA_M, 0)
    st_ = decaying_states(fixture_structure, OMEGA_M)
    assert list(prof["n"]) == [0]
    assert prof["u"][0] == pytest.approx(st_.right[0], rel=1e-14)


def test_profile_dense_matches_boundaries(fixture_structure):
    prof = mode_profile(fixture_structure, OMEGA_M, 4, n_per_cell=16)
    xs, us = prof["x_fine"], prof["u_fine"]
    for x, u in zip(prof["x"], prof["u"]):
        j = int(np.argmin(np.abs(xs - x)))
        assert abs(xs[j] - x) < 1e-12
        assert us[j] == pytest.approx(u, rel=1e-9, abs=1e-12)


def test_asymmetric_candidates():
    p = apply_sigma_perturbation(make_fixture(), 0.02)
    gap = common_gaps(p, WINDOW)[0]
    res = find_interface_mode(p, gap)
    assert isinstance(res, InterfaceMode)
    assert res.candidates == tuple(interface_candidates(p, gap))
    assert gap.lower < res.omega_m < gap.upper
