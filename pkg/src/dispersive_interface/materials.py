"""Dispersive permittivities, layered unit cells and the glued A|B structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import PoleProximity, SigmaOutOfRange

ETA_POLE = 1e-6
LENGTH_TOL = 1e-12

PERT_KINDS = ("none", "inverse_sq_decreasing", "inverse_sq_increasing")
# inverse_sq_decreasing adds -1/w^2 (eps keeps increasing in w),
# inverse_sq_increasing adds +1/w^2 (can break monotonicity).
_PERT_SIGN = {"none": 0.0, "inverse_sq_decreasing": -1.0, "inverse_sq_increasing": 1.0}


@dataclass(frozen=True)
class PermittivityModel:
    """eps(w) = eps0 + alpha / (1 - beta w^2) + delta * f(w), with f in {0, -1/w^2, +1/w^2}."""

    eps0: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    pert_kind: str = "none"
    pert_delta: float = 0.0

    def __post_init__(self):
        if self.pert_kind not in PERT_KINDS:
            raise ValueError(f"unknown perturbation kind {self.pert_kind!r}")
        for name in ("eps0", "alpha", "beta", "pert_delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def pole(self) -> float | None:
        return 1.0 / math.sqrt(self.beta) if self.beta > 0 else None

    @property
    def pert_active(self) -> bool:
        return self.pert_kind != "none" and self.pert_delta != 0.0

    def perturbed(self, kind: str, delta: float) -> "PermittivityModel":
        return replace(self, pert_kind=kind, pert_delta=delta)

    def __call__(self, omega):
        return eval_permittivity(self, omega)


def _check_poles(model: PermittivityModel, omega):
    w = np.asarray(omega, dtype=float)
    denom = 1.0 - model.beta * w * w
    if np.any(np.abs(denom) <= ETA_POLE):
        raise PoleProximity(f"omega={omega!r} within {ETA_POLE:g} of pole {model.pole}")
    if model.pert_active and np.any(np.abs(w) <= ETA_POLE):
        raise PoleProximity("perturbation term 1/omega^2 is singular at omega=0")
    return w, denom


def eval_permittivity(model: PermittivityModel, omega):
    w, denom = _check_poles(model, omega)
    eps = model.eps0 + model.alpha / denom
    if model.pert_active:
        eps = eps + model.pert_delta * _PERT_SIGN[model.pert_kind] / (w * w)
    return eps if np.ndim(eps) else float(eps)


def permittivity_derivative(model: PermittivityModel, omega):
    """Analytic d(eps)/d(omega), perturbation term included."""
    w, denom = _check_poles(model, omega)
    d = 2.0 * model.alpha * model.beta * w / (denom * denom)
    if model.pert_active:
        d = d - 2.0 * model.pert_delta * _PERT_SIGN[model.pert_kind] / (w * w * w)
    return d if np.ndim(d) else float(d)


@dataclass(frozen=True)
class Layer:
    length: float
    species: int

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"layer length must be positive, got {self.length}")
        if self.species not in (1, 2):
            raise ValueError(f"species must be 1 or 2, got {self.species}")


@dataclass(frozen=True)
class UnitCell:
    layers: tuple[Layer, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("a unit cell needs at least one layer")
        total = math.fsum(layer.length for layer in self.layers)
        if abs(total - 1.0) > LENGTH_TOL:
            raise ValueError(f"layer lengths sum to {total!r}, expected 1")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]], label: str = "") -> "UnitCell":
        return cls(tuple(Layer(float(l), int(s)) for l, s in pairs), label)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([layer.length for layer in self.layers])

    @property
    def species(self) -> tuple[int, ...]:
        return tuple(layer.species for layer in self.layers)

    @property
    def boundaries(self) -> np.ndarray:
        """Layer interface positions, 0 and 1 included."""
        return np.concatenate([[0.0], np.cumsum(self.lengths)])

    def as_pairs(self) -> list[tuple[float, int]]:
        return [(layer.length, layer.species) for layer in self.layers]

    def reversed(self) -> "UnitCell":
        return UnitCell(tuple(reversed(self.layers)), self.label)


def is_mirror_symmetric(cell: UnitCell) -> bool:
    rev = cell.layers[::-1]
    return all(
        a.species == b.species and abs(a.length - b.length) <= LENGTH_TOL
        for a, b in zip(cell.layers, rev)
    )


@dataclass(frozen=True)
class Materials:
    eps1: PermittivityModel
    eps2: PermittivityModel
    mu0: float = 1.0

    def model(self, species: int) -> PermittivityModel:
        return self.eps1 if species == 1 else self.eps2

    def eps(self, species: int, omega):
        return eval_permittivity(self.model(species), omega)

    def poles(self) -> list[float]:
        return sorted({m.pole for m in (self.eps1, self.eps2) if m.pole is not None})

    def perturbed(self, kind: str, delta: float) -> "Materials":
        # the same perturbation function is applied to both species
        return Materials(self.eps1.perturbed(kind, delta), self.eps2.perturbed(kind, delta), self.mu0)


@dataclass(frozen=True)
class Structure:
    """Cell A repeated on x < 0, cell B on x > 0, interface at x0 = 0."""

    cell_a: UnitCell
    cell_b: UnitCell
    eps1: PermittivityModel
    eps2: PermittivityModel
    mu0: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def materials(self) -> Materials:
        return Materials(self.eps1, self.eps2, self.mu0)

    def with_perturbation(self, kind: str, delta: float) -> "Structure":
        return replace(self, eps1=self.eps1.perturbed(kind, delta), eps2=self.eps2.perturbed(kind, delta))

    def with_cells(self, cell_a: UnitCell, cell_b: UnitCell) -> "Structure":
        return replace(self, cell_a=cell_a, cell_b=cell_b)

    @property
    def mirror_symmetric(self) -> bool:
        return is_mirror_symmetric(self.cell_a) and is_mirror_symmetric(self.cell_b)


def symmetric_pair(theta1: float, theta2: float, width: float) -> tuple[UnitCell, UnitCell]:
    """Cells A = (t1, w, 2 t2, w, t1) and B = (t2, w, 2 t1, w, t2), species 1-2-1-2-1."""
    a = UnitCell.from_pairs([(theta1, 1), (width, 2), (2 * theta2, 1), (width, 2), (theta1, 1)], "A")
    b = UnitCell.from_pairs([(theta2, 1), (width, 2), (2 * theta1, 1), (width, 2), (theta2, 1)], "B")
    return a, b


def _species1_indices(cell: UnitCell) -> list[int]:
    return [i for i, layer in enumerate(cell.layers) if layer.species == 1]


def _middle_position(n_species1: int) -> int:
    # 1-based floor((N + 2) / 2) with N = number of species-2 layers = n_species1 - 1
    return (n_species1 + 1) // 2 - 1


def sigma_bound(structure: Structure) -> float:
    """Largest sigma keeping every shrunk layer non-negative."""
    ia = _species1_indices(structure.cell_a)
    ib = _species1_indices(structure.cell_b)
    if len(ia) < 2 or len(ib) < 2:
        raise SigmaOutOfRange("symmetry perturbation needs at least two species-1 layers per cell")
    shrink_a = structure.cell_a.layers[ia[_middle_position(len(ia))]].length
    shrink_b = structure.cell_b.layers[ib[0]].length
    return min(shrink_a, shrink_b)


def _rebuild(lengths: list[float], species: tuple[int, ...], label: str) -> UnitCell:
    kept = [(l, s) for l, s in zip(lengths, species) if l > LENGTH_TOL]
    merged: list[list] = []
    for l, s in kept:
        if merged and merged[-1][1] == s:
            merged[-1][0] += l
        else:
            merged.append([l, s])
    total = math.fsum(l for l, _ in merged)
    return UnitCell(tuple(Layer(l / total, s) for l, s in merged), label)


def apply_sigma_perturbation(structure: Structure, sigma: float) -> Structure:
    """Break mirror symmetry by moving length sigma between species-1 layers.

    Cell A: last species-1 layer grows, middle one shrinks.  Cell B: first
    species-1 layer shrinks, middle one grows.  Layers shrunk to zero length
    are dropped.
    """
    bound = sigma_bound(structure)
    if sigma < 0 or sigma > bound + LENGTH_TOL:
        raise SigmaOutOfRange(f"sigma={sigma} outside [0, {bound}]")
    if sigma == 0:
        return structure
    a, b = structure.cell_a, structure.cell_b
    ia, ib = _species1_indices(a), _species1_indices(b)
    la, lb = list(a.lengths), list(b.lengths)
    la[ia[-1]] += sigma
    la[ia[_middle_position(len(ia))]] -= sigma
    lb[ib[0]] -= sigma
    lb[ib[_middle_position(len(ib))]] += sigma
    return structure.with_cells(_rebuild(la, a.species, a.label), _rebuild(lb, b.species, b.label))
