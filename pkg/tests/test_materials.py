import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispersive_interface.errors import PoleProximity, SigmaOutOfRange
from dispersive_interface.materials import (Layer, Materials, PermittivityModel, Structure, UnitCell,
                                            apply_sigma_perturbation, eval_permittivity, is_mirror_symmetric,
                                            permittivity_derivative, sigma_bound, symmetric_pair)

from conftest import make_fixture

M = PermittivityModel(1.0, 2.0, 1.0)


def test_permittivity_values():
    assert eval_permittivity(M, 0.0) == 3.0
    assert eval_permittivity(M, math.sqrt(2)) == pytest.approx(-1.0, abs=1e-12)


def test_permittivity_pole():
    assert M.pole == 1.0
    with pytest.raises(PoleProximity):
        eval_permittivity(M, 1.0)
    assert PermittivityModel(2.0).pole is None


def test_derivative_values():
    assert permittivity_derivative(M, 0.0) == 0.0
    assert permittivity_derivative(M, 2.0) == pytest.approx(8 / 9, rel=1e-14)
    with pytest.raises(PoleProximity):
        permittivity_derivative(PermittivityModel(1, 2, 1, "inverse_sq_increasing", 0.5), 1.0)


def test_perturbation_terms():
    w = 0.7
    dec = M.perturbed("inverse_sq_decreasing", 0.3)
    inc = M.perturbed("inverse_sq_increasing", 0.3)
    base = eval_permittivity(M, w)
    assert eval_permittivity(dec, w) == pytest.approx(base - 0.3 / w**2, rel=1e-14)
    assert eval_permittivity(inc, w) == pytest.approx(base + 0.3 / w**2, rel=1e-14)


def test_model_validation():
    with pytest.raises(ValueError):
        PermittivityModel(1.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        PermittivityModel(pert_kind="cubic")


models = st.builds(PermittivityModel, st.floats(0.1, 5), st.floats(0, 5), st.floats(0, 2),
                   st.sampled_from(["none", "inverse_sq_decreasing", "inverse_sq_increasing"]),
                   st.floats(0, 1))


@settings(max_examples=200, deadline=None)
@given(models, st.floats(0.05, 3.0))
def test_derivative_matches_finite_difference(model, w):
    p = model.pole
    if p is not None and abs(w - p) < 0.05:
        return
    h = 1e-6 * max(1.0, w)
    fd = (eval_permittivity(model, w + h) - eval_permittivity(model, w - h)) / (2 * h)
    d = permittivity_derivative(model, w)
    assert abs(fd - d) <= 1e-5 * max(1.0, abs(d))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 5), st.floats(0.01, 2), st.floats(0.01, 3))
def test_unperturbed_derivative_nonnegative(alpha, beta, w):
    model = PermittivityModel(1.0, alpha, beta)
    if abs(w - model.pole) < 1e-3:
        return
    assert permittivity_derivative(model, w) >= 0.0


def test_mirror_symmetry_examples():
    assert is_mirror_symmetric(UnitCell.from_pairs([(0.1, 1), (0.25, 2), (0.3, 1), (0.25, 2), (0.1, 1)]))
    assert not is_mirror_symmetric(UnitCell.from_pairs([(0.5, 1), (0.5, 2)]))
    assert is_mirror_symmetric(UnitCell.from_pairs([(1.0, 1)]))


def test_cell_validation():
    with pytest.raises(ValueError):
        UnitCell.from_pairs([(0.5, 1), (0.4, 2)])
    with pytest.raises(ValueError):
        UnitCell.from_pairs([(0.5, 1), (0.5, 3)])
    with pytest.raises(ValueError):
        Layer(-0.1, 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 1.0), st.sampled_from([1, 2])), min_size=1, max_size=6))
def test_palindrome_is_symmetric(raw):
    total = sum(l for l, _ in raw) * 2
    pairs = [(l / total, s) for l, s in raw]
    cell = UnitCell.from_pairs(pairs + pairs[::-1])
    assert is_mirror_symmetric(cell)
    assert abs(cell.lengths.sum() - 1.0) <= 1e-12


def test_symmetric_pair_layout():
    a, b = symmetric_pair(0.1, 0.15, 0.25)
    assert np.allclose(a.lengths, [0.1, 0.25, 0.3, 0.25, 0.1])
    assert np.allclose(b.lengths, [0.15, 0.25, 0.2, 0.25, 0.15])
    assert a.species == b.species == (1, 2, 1, 2, 1)


def test_sigma_perturbation():
    s = make_fixture()
    assert sigma_bound(s) == pytest.approx(0.15)
    assert apply_sigma_perturbation(s, 0.0) is s
    p = apply_sigma_perturbation(s, 0.05)
    assert np.allclose(p.cell_a.lengths, [0.1, 0.25, 0.25, 0.25, 0.15], atol=1e-12)
    # B's first species-1 layer gives sigma to its middle one; length is conserved
    assert np.allclose(p.cell_b.lengths, [0.1, 0.25, 0.25, 0.25, 0.15], atol=1e-12)
    for c in (p.cell_a, p.cell_b):
        assert abs(c.lengths.sum() - 1.0) <= 1e-12
    assert not is_mirror_symmetric(p.cell_a)
    with pytest.raises(SigmaOutOfRange):
        apply_sigma_perturbation(s, 0.2)


def test_sigma_max_drops_empty_layer():
    p = apply_sigma_perturbation(make_fixture(), 0.15)
    assert p.cell_b.species[0] == 2
    assert abs(p.cell_b.lengths.sum() - 1.0) <= 1e-12


def test_materials_dispatch():
    m = Materials(PermittivityModel(2.0), PermittivityModel(3.0), 1.5)
    assert m.eps(1, 0.4) == 2.0 and m.eps(2, 0.4) == 3.0
    s = Structure(*symmetric_pair(0.1, 0.15, 0.25), PermittivityModel(2.0), PermittivityModel(3.0))
    assert s.mirror_symmetric
