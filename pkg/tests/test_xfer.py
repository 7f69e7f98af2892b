import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispersive_interface.errors import InsideBand
from dispersive_interface.materials import Materials, PermittivityModel, UnitCell
from dispersive_interface.xfer import (cell_transfer_matrix, discriminant, eigen_system, sample_cell,
                                       segment_matrix)

from conftest import EPS1, EPS2, make_fixture


def test_segment_zero_frequency():
    # C(0) = 1 and l S(0) = l: a free shear, not the identity
    assert np.array_equal(segment_matrix(0.3, 2.0, 0.0), [[1.0, 0.3], [0.0, 1.0]])


def test_segment_quarter_period():
    t = segment_matrix(0.5, 1.0, math.pi)
    assert np.allclose(t, [[0.0, 1 / math.pi], [-math.pi, 0.0]], atol=1e-15)


def test_segment_evanescent():
    t = segment_matrix(1.0, -1.0, 1.0)
    assert np.allclose(t, [[math.cosh(1), math.sinh(1)], [math.sinh(1), math.cosh(1)]], rtol=1e-15)


@settings(max_examples=500, deadline=None)
@given(st.floats(1e-9, 1.0), st.floats(-4.0, 4.0), st.floats(0.0, 2.0), st.floats(0.5, 2.0))
def test_segment_unimodular(length, eps, omega, mu0):
    assert abs(np.linalg.det(segment_matrix(length, eps, omega, mu0)) - 1.0) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e-6, 1e-6), st.floats(0.1, 1.0))
def test_series_branch_continuous(eps, length):
    # the Taylor branch near zero argument agrees with the closed form just outside it
    w = 1.0
    a = segment_matrix(length, eps, w)
    b = segment_matrix(length, eps + math.copysign(1e-3, eps or 1.0), w)
    assert np.allclose(a, b, atol=2e-3)


def test_homogeneous_cell_collapses():
    m = Materials(PermittivityModel(2.5), PermittivityModel(2.5))
    cell = UnitCell.from_pairs([(0.3, 1), (0.4, 2), (0.3, 1)])
    for w in (0.1, 1.3, 4.0):
        assert np.allclose(cell_transfer_matrix(cell, m, w), segment_matrix(1.0, 2.5, w), atol=1e-13)
        assert discriminant(cell, m, w) == pytest.approx(2 * math.cos(math.sqrt(2.5) * w), abs=1e-12)


def test_fixture_cells_unimodular():
    s = make_fixture()
    m = s.materials
    for w in np.linspace(0.01, 0.98, 97):
        for c in (s.cell_a, s.cell_b):
            assert abs(np.linalg.det(cell_transfer_matrix(c, m, w)) - 1.0) < 1e-12


def test_first_band_trace_bounded():
    s = make_fixture()
    assert abs(discriminant(s.cell_a, s.materials, 0.5)) <= 2.0


def test_reversed_cell_same_trace():
    m = Materials(EPS1, EPS2)
    cell = UnitCell.from_pairs([(0.2, 1), (0.5, 2), (0.3, 1)])
    for w in (0.3, 0.8, 1.2):
        assert discriminant(cell, m, w) == pytest.approx(discriminant(cell.reversed(), m, w), abs=1e-12)


def test_cell_matrix_propagates_solution():
    # the cell matrix maps (u, u') at 0 to (u, u') at 1, consistent with dense sampling
    s = make_fixture()
    t = cell_transfer_matrix(s.cell_a, s.materials, 0.7)
    u, du = sample_cell(s.cell_a, s.materials, 0.7, np.array([0.3, -1.1]), np.array([0.0, 1.0]))
    assert np.allclose(t @ [0.3, -1.1], [u[1], du[1]], atol=1e-12)


def test_eigen_system_diagonal():
    es = eigen_system(np.array([[2.0, 0.0], [0.0, 0.5]]))
    assert es.lambda1 == pytest.approx(0.5) and es.lambda2 == pytest.approx(2.0)
    assert es.trace == pytest.approx(2.5)
    with pytest.raises(InsideBand):
        eigen_system(np.array([[1.0, 1.0], [0.0, 1.0]]))


unimodular_gap = st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)).filter(
    lambda t: abs(t[0]) > 1e-3)


@settings(max_examples=500, deadline=None)
@given(unimodular_gap)
def test_eigen_system_invariants(abc):
    a, b, c = abc
    d = (1 + b * c) / a
    t = np.array([[a, b], [c, d]])
    if abs(a + d) <= 2.0 + 1e-6:
        return
    es = eigen_system(t)
    assert abs(es.lambda1 * es.lambda2 - 1.0) < 1e-9
    assert abs(es.lambda1 + es.lambda2 - (a + d)) < 1e-9 * max(1.0, abs(a + d))
    assert abs(es.lambda1) < 1 < abs(es.lambda2)
    for v, lam in ((es.v1, es.lambda1), (es.v2, es.lambda2)):
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
        first = v[np.flatnonzero(np.abs(v) > 0)[0]]
        assert first > 0
        assert np.allclose(t @ v, lam * v, atol=1e-8 * max(1.0, abs(lam)) * np.abs(t).max())
