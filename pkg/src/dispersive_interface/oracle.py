"""Finite-difference reference solver, independent of the transfer matrices.

The operator -(1/mu0) (eps^{-1} u')' is discretised in flux form on a grid
aligned with the layer boundaries: nodes sit on every boundary, each layer of
length l gets ceil(l N) equal intervals, and an interval inside a layer of
permittivity eps carries the weight 1 / (eps h).  With the lumped mass
mu0 (h_left + h_right) / 2 this gives K(w) u = w^2 M u, K Hermitian and
tridiagonal (periodic with a Bloch twist for the cell problem).

The nonlinear problem is solved by counting: for real eps with eps' >= 0 the
number of eigenvalues of (K(w), M) below w^2 is nondecreasing in w and jumps by
one at each self-consistent frequency.  Zeros of eps make 1/eps jump from -inf
to +inf and the count with it, so scan windows are cut there as at poles.  Counts come from the inertia of
K(w) - w^2 M (Sylvester), computed by an O(n) LDL^H recursion.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import BranchCrossing
from .materials import Materials, Structure, UnitCell
from .spectrum import split_window

N_ORACLE = 2000
N_SCAN = 48
ROOT_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    h: np.ndarray  # interval lengths
    species: np.ndarray  # species of each interval
    x: np.ndarray  # node positions, len(h) + 1


@dataclass(frozen=True)
class DiscreteOperator:
    N: int
    kappa: float
    omega_probe: float
    matrix: np.ndarray  # M^{-1/2} K M^{-1/2}, Hermitian


def cell_grid(cell: UnitCell, N: int, origin: float = 0.0) -> Grid:
    hs, sp = [], []
    for layer in cell.layers:
        n = max(1, math.ceil(layer.length * N - 1e-9))
        hs.append(np.full(n, layer.length / n))
        sp.append(np.full(n, layer.species))
    h = np.concatenate(hs)
    return Grid(h, np.concatenate(sp), origin + np.concatenate([[0.0], np.cumsum(h)]))


def _weights(grid: Grid, materials: Materials, omega: float) -> np.ndarray:
    eps = np.empty_like(grid.h)
    for s in (1, 2):
        sel = grid.species == s
        if np.any(sel):
            eps[sel] = materials.eps(s, omega)
    return 1.0 / (eps * grid.h)


def _periodic_parts(grid, materials, omega, kappa):
    """Diagonal, superdiagonal, corner of K and the lumped mass, periodic case."""
    w = _weights(grid, materials, omega)
    n = len(w)
    diag = w + np.roll(w, 1)
    mass = materials.mu0 * 0.5 * (grid.h + np.roll(grid.h, 1))
    off = -w[:-1].astype(complex)
    # K[0, n-1]: the wrap-around interval links node n-1 to node n = e^{i kappa} node 0
    corner = -w[-1] * cmath.exp(-1j * kappa)
    if n == 1:
        raise ValueError("grid too coarse")
    return diag, off, corner, mass


def negative_count(diag, off, corner=0.0) -> int:
    """Number of negative eigenvalues of a Hermitian (periodic) tridiagonal matrix.

    ``off[j]`` = A[j, j+1] and ``corner`` = A[0, n-1].  LDL^H without pivoting;
    exact zero pivots are nudged, which does not change the count generically.
    """
    a = [float(v) for v in diag]
    b = list(off)
    n = len(a)
    tiny = 1e-300
    neg = 0
    f = corner
    last = a[n - 1]
    for j in range(n - 2):
        d = a[j] or tiny
        if d < 0:
            neg += 1
        bj = b[j]
        a[j + 1] -= (bj.real * bj.real + bj.imag * bj.imag) / d if isinstance(bj, complex) else bj * bj / d
        if f:
            last -= abs(f) ** 2 / d
            f = -bj.conjugate() * f / d if isinstance(bj, complex) else -bj * f / d
    if n >= 2:
        d = a[n - 2] or tiny
        if d < 0:
            neg += 1
        e = b[n - 2] + f
        last -= abs(e) ** 2 / d
    if (last or tiny) < 0:
        neg += 1
    return neg


def bloch_count(cell, materials, kappa, omega, grid: Grid) -> int:
    diag, off, corner, mass = _periodic_parts(grid, materials, omega, kappa)
    return negative_count(diag - omega * omega * mass, off, corner)


def bloch_operator(cell: UnitCell, materials: Materials, kappa: float, omega: float,
                   N: int = N_ORACLE) -> DiscreteOperator:
    """Dense symmetrised Bloch operator, for inspection and tests."""
    grid = cell_grid(cell, N)
    diag, off, corner, mass = _periodic_parts(grid, materials, omega, kappa)
    n = len(diag)
    k = np.diag(diag.astype(complex)) + np.diag(off, 1) + np.diag(off.conj(), -1)
    k[0, n - 1] += corner
    k[n - 1, 0] += np.conj(corner)
    s = 1.0 / np.sqrt(mass)
    return DiscreteOperator(N, kappa, omega, s[:, None] * k * s[None, :])


def _roots_from_counts(count, lo, hi, c_lo, c_hi, rtol):
    """Frequencies in (lo, hi] where count() steps up, one entry per unit step."""
    if c_hi < c_lo:
        raise BranchCrossing(f"eigenvalue count decreases on [{lo:.12g}, {hi:.12g}]: "
                             "eps not monotone here, refine the scan")
    if c_hi == c_lo:
        return []
    if hi - lo <= rtol * max(1.0, abs(hi)):
        return [0.5 * (lo + hi)] * (c_hi - c_lo)
    mid = 0.5 * (lo + hi)
    c_mid = count(mid)
    return (_roots_from_counts(count, lo, mid, c_lo, c_mid, rtol)
            + _roots_from_counts(count, mid, hi, c_mid, c_hi, rtol))


def _eps_zero_splits(window, materials, species, n=512):
    """Cut sub-windows at zeros of eps, where 1/eps and hence the count jump."""
    out = []
    for lo, hi in split_window(window, materials):
        cuts = [lo]
        ws = np.linspace(lo, hi, n + 1)
        for s in species:
            e = materials.eps(s, ws)
            for i in np.flatnonzero(np.sign(e[:-1]) * np.sign(e[1:]) < 0):
                z = brentq(lambda w: materials.eps(s, w), ws[i], ws[i + 1], xtol=1e-15)
                cuts.append(z)
        cuts = sorted(set(cuts)) + [hi]
        gap = 1e-9 * max(1.0, hi)
        for a, b in zip(cuts[:-1], cuts[1:]):
            a2 = a if a == lo else a + gap
            b2 = b if b == hi else b - gap
            if b2 > a2:
                out.append((a2, b2))
    return out


def _scan_roots(count, window, materials, n_scan, rtol, species=(1, 2)):
    roots = []
    for lo, hi in _eps_zero_splits(window, materials, species):
        ws = np.linspace(lo, hi, n_scan + 1)
        cs = [count(w) for w in ws]
        for i in range(n_scan):
            roots.extend(_roots_from_counts(count, ws[i], ws[i + 1], cs[i], cs[i + 1], rtol))
    return roots


def oracle_band_frequencies(cell: UnitCell, materials: Materials, kappa: float, omega_window,
                            N: int = N_ORACLE, n_scan: int = N_SCAN, rtol: float = ROOT_RTOL) -> list[float]:
    """Self-consistent Bloch frequencies w with w^2 an eigenvalue at eps(w), in the window."""
    if N < 2:
        raise ValueError("N must be at least 2")
    grid = cell_grid(cell, N)
    count = lambda w: bloch_count(cell, materials, kappa, w, grid)
    return _scan_roots(count, omega_window, materials, n_scan, rtol, set(cell.species))


# -- finite interface structure ------------------------------------------------

@dataclass(frozen=True)
class FiniteStructure:
    grid: Grid
    n_cells_per_side: int


@dataclass(frozen=True)
class OracleRoot:
    omega: float
    score: float
    cell_energy: np.ndarray  # energy per cell, left to right


def finite_structure(structure: Structure, n_cells_per_side: int, N_per_cell: int) -> FiniteStructure:
    parts = []
    for k in range(n_cells_per_side, 0, -1):
        parts.append(cell_grid(structure.cell_a, N_per_cell, -float(k)))
    for k in range(n_cells_per_side):
        parts.append(cell_grid(structure.cell_b, N_per_cell, float(k)))
    h = np.concatenate([p.h for p in parts])
    sp = np.concatenate([p.species for p in parts])
    x = -n_cells_per_side + np.concatenate([[0.0], np.cumsum(h)])
    return FiniteStructure(Grid(h, sp, x), n_cells_per_side)


def _clamped_parts(fs: FiniteStructure, materials: Materials, omega: float):
    """Interior-node tridiagonal K and lumped mass with u = 0 at both ends."""
    g = fs.grid
    w = _weights(g, materials, omega)
    diag = w[:-1] + w[1:]
    off = -w[1:-1]
    mass = materials.mu0 * 0.5 * (g.h[:-1] + g.h[1:])
    return diag, off, mass


def _clamped_count(fs, materials, omega):
    diag, off, mass = _clamped_parts(fs, materials, omega)
    return negative_count(diag - omega * omega * mass, off)


def cell_energies(fs: FiniteStructure, u_interior: np.ndarray, mu0: float = 1.0) -> np.ndarray:
    """int mu0 |u|^2 over each cell (trapezoid on the grid), clamped ends included."""
    g = fs.grid
    u = np.concatenate([[0.0], u_interior, [0.0]])
    seg = 0.5 * mu0 * g.h * (np.abs(u[:-1]) ** 2 + np.abs(u[1:]) ** 2)
    mids = 0.5 * (g.x[:-1] + g.x[1:])
    cells = np.floor(mids).astype(int) + fs.n_cells_per_side
    return np.bincount(cells, weights=seg, minlength=2 * fs.n_cells_per_side)


def localization_score(energy: np.ndarray) -> float:
    """Interface localisation in [0, 1].

    The participation length P = (sum e)^2 / sum e^2 of the cell energies is
    compared with 2L/3, the value of any standing-wave envelope sin^2 in a
    clamped box of L cells, and weighted by the energy fraction within L/4
    cells of the interface, so states bound to the outer walls score low.
    """
    e = np.asarray(energy, dtype=float)
    L = len(e)
    p = e.sum() ** 2 / np.sum(e * e)
    centre = np.arange(L) - L / 2 + 0.5
    frac = e[np.abs(centre) <= L / 4].sum() / e.sum()
    return float(max(0.0, 1.0 - p / (2.0 * L / 3.0)) * frac)


def oracle_finite_interface(structure: Structure, n_cells_per_side: int, omega_window,
                            N_per_cell: int = 400, n_scan: int = N_SCAN,
                            rtol: float = ROOT_RTOL) -> list[OracleRoot]:
    """Self-consistent frequencies of the clamped 2n-cell A|B structure, with scores."""
    fs = finite_structure(structure, n_cells_per_side, N_per_cell)
    m = structure.materials
    count = lambda w: _clamped_count(fs, m, w)
    species = set(structure.cell_a.species) | set(structure.cell_b.species)
    roots = _scan_roots(count, omega_window, m, n_scan, rtol, species)
    out = []
    for w in roots:
        diag, off, mass = _clamped_parts(fs, m, w)
        s = 1.0 / np.sqrt(mass)
        # eigenvalue of the symmetrised pencil closest to w^2
        vals, vecs = eigh_tridiagonal(diag * s * s, off * s[:-1] * s[1:], select="v",
                                      select_range=(w * w * (1 - 1e-6), w * w * (1 + 1e-6)))
        if len(vals) == 0:
            out.append(OracleRoot(w, float("nan"), np.array([])))
            continue
        v = vecs[:, np.argmin(np.abs(vals - w * w))]
        e = cell_energies(fs, v * s, m.mu0)
        out.append(OracleRoot(w, localization_score(e), e))
    return out
