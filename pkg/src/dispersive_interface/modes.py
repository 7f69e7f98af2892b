"""Bloch modes, band-edge symmetry, bulk indices and Zak phases."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousSymmetry, DegenerateEdge, NonConvergent, NotOnBand
from .materials import Materials, UnitCell, is_mirror_symmetric
from .roots import bisect_vec
from .spectrum import Band, BandGap
from .xfer import cell_transfer_matrix, discriminant, eigenvector, sample_cell

N_GRID = 1024
N_KAPPA_ZAK = 201
DISPERSION_TOL = 1e-8
SYMMETRY_TOL = 1e-6
ZAK_STABILITY = 1e-3


@dataclass(frozen=True)
class BlochMode:
    kappa: float
    omega: float
    grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    norm: float
    state0: np.ndarray  # (u(0+), u'(0+)) after normalisation
    floquet_residual: float


@dataclass(frozen=True)
class EdgeSymmetry:
    kappa_edge: float
    classification: str  # "symmetric" | "antisymmetric"
    u_at_0: float
    du_at_0: float
    reflection_residual: float


@dataclass(frozen=True)
class BulkIndex:
    gap_index: int
    value: int


@dataclass(frozen=True)
class ZakPhase:
    band_index: int
    theta: float
    classified: float | None
    residual: float


def inner(f, g, grid, mu0=1.0) -> complex:
    """<f, g> = int_0^1 mu0 f conj(g) dx, trapezoidal."""
    return complex(np.trapezoid(mu0 * f * np.conj(g), grid))


def _is_edge_kappa(kappa: float) -> bool:
    return min(abs(kappa), abs(abs(kappa) - math.pi)) < 1e-12


def _build(cell, materials, kappa, omega, state0, grid, multiplier):
    u, du = sample_cell(cell, materials, omega, state0, grid)
    norm = math.sqrt(np.trapezoid(materials.mu0 * np.abs(u) ** 2, grid))
    u, du, state0 = u / norm, du / norm, np.asarray(state0) / norm
    t = cell_transfer_matrix(cell, materials, omega)
    resid = float(np.linalg.norm(t @ state0 - multiplier * state0) / np.linalg.norm(state0))
    final_norm = math.sqrt(np.trapezoid(materials.mu0 * np.abs(u) ** 2, grid))
    return BlochMode(float(kappa), float(omega), grid, u, du, final_norm, state0, resid)


def bloch_mode(cell: UnitCell, materials: Materials, kappa: float, omega: float,
               n_grid: int = N_GRID) -> BlochMode:
    """Quasi-periodic mode u(x+1) = e^{i kappa} u(x) sampled on [0, 1]."""
    f = discriminant(cell, materials, omega)
    if abs(2.0 * math.cos(kappa) - f) >= DISPERSION_TOL:
        raise NotOnBand(f"|2cos(kappa) - f(omega)| = {abs(2 * math.cos(kappa) - f):.3e}")
    if _is_edge_kappa(kappa):
        raise DegenerateEdge("kappa at a band edge; use edge_mode")
    t = cell_transfer_matrix(cell, materials, omega)
    lam = cmath.exp(1j * kappa)
    v = eigenvector(t.astype(complex), lam)
    grid = np.linspace(0.0, 1.0, n_grid)
    return _build(cell, materials, kappa, omega, v, grid, lam)


def _edge_state(t: np.ndarray, sign: float) -> np.ndarray:
    m = t - sign * np.eye(2)
    if np.linalg.norm(m) < 1e-9 * max(1.0, np.linalg.norm(t)):
        raise DegenerateEdge("two-dimensional edge eigenspace (gap closed)")
    r1 = np.array([m[0, 1], -m[0, 0]])
    r2 = np.array([m[1, 1], -m[1, 0]])
    v = r1 if np.linalg.norm(r1) >= np.linalg.norm(r2) else r2
    return v / np.linalg.norm(v)


def edge_mode(cell: UnitCell, materials: Materials, kappa_edge: float, omega_edge: float,
              n_grid: int = N_GRID) -> BlochMode:
    """Real (anti)periodic mode at a band edge; sign fixed by max |u| > 0."""
    sign = 1.0 if abs(kappa_edge) < 1e-12 else -1.0
    f = discriminant(cell, materials, omega_edge)
    if abs(f - 2.0 * sign) >= DISPERSION_TOL:
        raise NotOnBand(f"|f(omega) - {2 * sign:+.0f}| = {abs(f - 2 * sign):.3e}")
    t = cell_transfer_matrix(cell, materials, omega_edge)
    v = _edge_state(t, sign)
    grid = np.linspace(0.0, 1.0, n_grid)
    mode = _build(cell, materials, abs(kappa_edge), omega_edge, v, grid, sign)
    if mode.u[np.argmax(np.abs(mode.u))] < 0:
        mode = BlochMode(mode.kappa, mode.omega, grid, -mode.u, -mode.du, mode.norm,
                         -mode.state0, mode.floquet_residual)
    return mode


def reflection_residual(mode: BlochMode, sign: float) -> float:
    """max_x |u(x) - sign u(1 - x)| relative to sup |u|."""
    u = mode.u
    return float(np.max(np.abs(u - sign * u[::-1])) / np.max(np.abs(u)))


def classify_edge_symmetry(mode: BlochMode, tol: float = SYMMETRY_TOL) -> EdgeSymmetry:
    """Symmetric or antisymmetric edge mode, from which of u(0), u'(0) vanishes."""
    u0 = abs(mode.u[0])
    du0 = abs(mode.du[0])
    u_zero = u0 < tol * np.max(np.abs(mode.u))
    du_zero = du0 < tol * np.max(np.abs(mode.du))
    if u_zero == du_zero:
        raise AmbiguousSymmetry(f"|u(0)|={u0:.3e}, |u'(0)|={du0:.3e}")
    at_zero = abs(mode.kappa) < 1e-12
    symmetric = du_zero if at_zero else u_zero
    sign = 1.0 if symmetric else -1.0
    resid = reflection_residual(mode, sign)
    if resid >= tol:
        raise AmbiguousSymmetry(f"reflection residual {resid:.3e} contradicts the u(0)/u'(0) test")
    return EdgeSymmetry(0.0 if at_zero else math.pi, "symmetric" if symmetric else "antisymmetric",
                        float(u0), float(du0), resid)


def bulk_index(gap: BandGap, lower_edge_mode: BlochMode, gap_index: int = 0) -> BulkIndex:
    """+1 when the mode at the gap's lower edge is symmetric, -1 otherwise."""
    if abs(lower_edge_mode.omega - gap.lower) > 1e-9 * max(1.0, gap.lower):
        raise ValueError("mode frequency does not match the gap's lower edge")
    sym = classify_edge_symmetry(lower_edge_mode)
    return BulkIndex(gap_index, 1 if sym.classification == "symmetric" else -1)


def gap_bulk_index(cell: UnitCell, materials: Materials, gap: BandGap, gap_index: int = 0,
                   n_grid: int = N_GRID) -> BulkIndex:
    mode = edge_mode(cell, materials, gap.lower_kappa, gap.lower, n_grid)
    return bulk_index(gap, mode, gap_index)


def band_omegas(cell: UnitCell, materials: Materials, band: Band, kappas) -> np.ndarray:
    """omega_n(kappa) on a band, using omega_n(-kappa) = omega_n(kappa)."""
    if not band.complete:
        raise ValueError(f"band {band.index} is clipped by the scan window")
    k = np.abs(np.asarray(kappas, dtype=float))
    w = bisect_vec(lambda x: discriminant(cell, materials, x),
                   np.full(k.shape, band.lower), np.full(k.shape, band.upper), 2.0 * np.cos(k))
    w0, wpi = band.omega_at_kappa0, band.omega_at_kappa_pi
    if w0 is None or wpi is None:
        raise ValueError(f"band {band.index} does not run from kappa 0 to pi (touching bands?)")
    w = np.where(k < 1e-12, w0, w)
    w = np.where(np.abs(k - math.pi) < 1e-12, wpi, w)
    return w


def loop_modes(cell: UnitCell, materials: Materials, band: Band, n_kappa: int = N_KAPPA_ZAK,
               n_grid: int = N_GRID) -> tuple[np.ndarray, list[BlochMode]]:
    """Modes on kappa = -pi .. pi (n_kappa points); the last equals the first."""
    kappas = np.linspace(-math.pi, math.pi, n_kappa)
    omegas = band_omegas(cell, materials, band, kappas)
    modes: list[BlochMode | None] = [None] * (n_kappa - 1)
    pending = []
    for j in range(n_kappa - 1):
        k, w = kappas[j], omegas[j]
        if _is_edge_kappa(k):
            try:
                modes[j] = edge_mode(cell, materials, abs(k), w, n_grid)
            except DegenerateEdge:
                pending.append(j)
        else:
            modes[j] = bloch_mode(cell, materials, k, w, n_grid)
    # degenerate edges: inside the 2D eigenspace take the neighbour's state,
    # which maximises the overlap with it
    for j in pending:
        nb = modes[j + 1] if j == 0 else modes[j - 1]
        grid = np.linspace(0.0, 1.0, n_grid)
        sign = 1.0 if abs(kappas[j]) < 1e-12 else -1.0
        modes[j] = _build(cell, materials, abs(kappas[j]), omegas[j], nb.state0, grid, sign)
    return kappas, modes


def wilson_phase(fields: list[np.ndarray], grid: np.ndarray, mu0: float = 1.0,
                 dkappa: float = 0.0) -> float:
    """-Im log prod <w_j, w_{j+1}> over a closed loop, reduced to [0, 2 pi).

    With dkappa = 0 the links use the quasi-periodic fields themselves.  A
    nonzero dkappa applies the factor e^{i dkappa x} to every link, which is
    the loop over the cell-periodic parts e^{-i kappa x} u(x).
    """
    twist = np.exp(1j * dkappa * grid)
    total = 0.0
    n = len(fields)
    for j in range(n):
        total += cmath.phase(inner(fields[j] * twist, fields[(j + 1) % n], grid, mu0))
    return (-total) % (2 * math.pi)


def _classify(theta: float) -> tuple[float, float]:
    d0 = min(theta, 2 * math.pi - theta)
    dpi = abs(theta - math.pi)
    return (0.0, d0) if d0 <= dpi else (math.pi, dpi)


def circular_distance(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _loop_phase(cell, materials, band, n_kappa, n_grid, periodic):
    kappas, modes = loop_modes(cell, materials, band, n_kappa, n_grid)
    dk = kappas[1] - kappas[0] if periodic else 0.0
    return wilson_phase([m.u for m in modes], modes[0].grid, materials.mu0, dk)


def zak_phase(cell: UnitCell, materials: Materials, band: Band, n_kappa: int = N_KAPPA_ZAK,
              n_grid: int = N_GRID, check_convergence: bool = True,
              periodic: bool = True) -> ZakPhase:
    """Discrete Wilson-loop Zak phase of one band.

    ``periodic`` selects the loop over cell-periodic parts (origin at the cell
    start, so a homogeneous medium gives 0).  With ``periodic=False`` the
    quasi-periodic modes enter directly; for mirror-symmetric cells the two
    differ by exactly pi.

    Raises NonConvergent when the (2 n_kappa - 1)-point loop moves the phase by
    more than 1e-3.  ``classified`` is None for cells without mirror symmetry.
    """
    theta = _loop_phase(cell, materials, band, n_kappa, n_grid, periodic)
    if check_convergence:
        theta2 = _loop_phase(cell, materials, band, 2 * n_kappa - 1, n_grid, periodic)
        if circular_distance(theta, theta2) > ZAK_STABILITY:
            raise NonConvergent(f"Zak phase moved {circular_distance(theta, theta2):.3e} on grid doubling")
    label, resid = _classify(theta)
    return ZakPhase(band.index, theta, label if is_mirror_symmetric(cell) else None, resid)
