"""Band edges, band samples and band gaps from the discriminant f(w)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import UnpairedEdge, WindowAtPole
from .materials import ETA_POLE, Materials, UnitCell
from .roots import bisect_vec, refine, sign_changes
from .xfer import discriminant

N_SCAN = 4000
N_KAPPA = 64
EDGE_TOL = 1e-12


class DegenerateWarning(UserWarning):
    """Two bands touch; the zero-width gap is dropped."""


@dataclass(frozen=True)
class Band:
    """Band between two frequencies; ``kappa_lower``/``kappa_upper`` are 0 or pi
    at true band edges and None where the scan window clips the band."""

    index: int
    lower: float
    upper: float
    kappa_lower: float | None
    kappa_upper: float | None
    samples: np.ndarray = field(repr=False)  # (n, 2) rows (kappa, omega), kappa ascending
    window: int = 0

    @property
    def complete(self) -> bool:
        return self.kappa_lower is not None and self.kappa_upper is not None

    def _at(self, kappa):
        if self.kappa_lower == kappa:
            return self.lower
        if self.kappa_upper == kappa:
            return self.upper
        return None

    @property
    def omega_at_kappa0(self) -> float | None:
        return self._at(0.0)

    @property
    def omega_at_kappa_pi(self) -> float | None:
        return self._at(math.pi)


@dataclass(frozen=True)
class BandGap:
    lower: float
    upper: float
    material: str = ""
    lower_kappa: float = 0.0  # quasimomentum of the band edge at ``lower``
    upper_kappa: float = 0.0

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class GapIntersection:
    lower: float
    upper: float
    gap_a: BandGap
    gap_b: BandGap
    lower_from: str  # which material supplies the edge: "A", "B" or "both"
    upper_from: str

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


def _excluded_points(materials: Materials) -> list[tuple[float, float]]:
    """Frequency intervals around the permittivity poles that are never sampled."""
    out = []
    for model in (materials.eps1, materials.eps2):
        if model.pole is not None:
            p = model.pole
            out.append((p * math.sqrt(1.0 - 2 * ETA_POLE), p * math.sqrt(1.0 + 2 * ETA_POLE)))
        if model.pert_active:
            out.append((-2 * ETA_POLE, 2 * ETA_POLE))
    return sorted(out)


def split_window(window, materials: Materials) -> list[tuple[float, float]]:
    """Cut the scan window around the poles of both species."""
    lo, hi = map(float, window)
    if not hi > lo:
        raise ValueError(f"empty window {window}")
    pieces = [(lo, hi)]
    for a, b in _excluded_points(materials):
        nxt = []
        for x, y in pieces:
            if b <= x or a >= y:
                nxt.append((x, y))
                continue
            if a > x:
                nxt.append((x, a))
            if b < y:
                nxt.append((b, y))
        pieces = nxt
    pieces = [(x, y) for x, y in pieces if y - x > 1e-9 * max(1.0, abs(y))]
    if not pieces:
        raise WindowAtPole(f"window {window} lies entirely within a pole neighbourhood")
    return pieces


def _edge_kappa(fval: float) -> float | None:
    if abs(fval - 2.0) < 1e-10:
        return 0.0
    if abs(fval + 2.0) < 1e-10:
        return math.pi
    return None


def band_edges(cell: UnitCell, materials: Materials, lo: float, hi: float, n_scan: int = N_SCAN):
    """Sorted (omega, kappa) pairs where f crosses +2 (kappa 0) or -2 (kappa pi)."""
    w = np.linspace(lo, hi, n_scan)
    f = discriminant(cell, materials, w)
    edges = []
    for level, kappa in ((2.0, 0.0), (-2.0, math.pi)):
        g = f - level
        for i in sign_changes(g):
            root = refine(lambda x: discriminant(cell, materials, x) - level, w[i], w[i + 1], EDGE_TOL)
            edges.append((root, kappa))
    return sorted(edges)


def _kappa_samples(cell, materials, lower, upper, k_lo, k_hi, n_kappa):
    """Rows (kappa, omega) with 2 cos kappa = f(omega), kappa ascending."""
    fn = lambda w: discriminant(cell, materials, w)
    f_lo, f_hi = fn(lower), fn(upper)
    ka = k_lo if k_lo is not None else math.acos(np.clip(f_lo / 2, -1, 1))
    kb = k_hi if k_hi is not None else math.acos(np.clip(f_hi / 2, -1, 1))
    k0, k1 = min(ka, kb), max(ka, kb)
    kappas = np.linspace(k0, k1, n_kappa)
    targets = 2.0 * np.cos(kappas)
    lo = np.full(n_kappa, lower)
    hi = np.full(n_kappa, upper)
    omegas = bisect_vec(fn, lo, hi, targets)
    # endpoints are the band edges themselves
    at_lo = np.isclose(kappas, ka, rtol=0, atol=1e-15)
    at_hi = np.isclose(kappas, kb, rtol=0, atol=1e-15)
    omegas[at_lo] = lower
    omegas[at_hi] = upper
    return np.column_stack([kappas, omegas])


def scan_bands(cell: UnitCell, materials: Materials, omega_window, n_scan: int = N_SCAN,
               n_kappa: int = N_KAPPA) -> list[Band]:
    """Bands inside the window, indexed by order of appearance."""
    bands: list[Band] = []
    for wi, (lo, hi) in enumerate(split_window(omega_window, materials)):
        edges = band_edges(cell, materials, lo, hi, n_scan)
        f_lo = discriminant(cell, materials, lo)
        f_hi = discriminant(cell, materials, hi)
        pts = [(lo, _edge_kappa(f_lo))] + [e for e in edges if lo < e[0] < hi] + [(hi, _edge_kappa(f_hi))]
        pts = _dedupe(pts)
        kinds = []
        for (x, _), (y, _) in zip(pts[:-1], pts[1:]):
            kinds.append(abs(discriminant(cell, materials, 0.5 * (x + y))) <= 2.0)
        for j in range(1, len(kinds)):
            if kinds[j] == kinds[j - 1]:
                raise UnpairedEdge(
                    f"consecutive {'bands' if kinds[j] else 'gaps'} near omega={pts[j][0]:.12g}; "
                    f"a band is narrower than the scan step, raise n_scan (now {n_scan})"
                )
        for j, in_band in enumerate(kinds):
            if not in_band:
                continue
            (x, kx), (y, ky) = pts[j], pts[j + 1]
            samples = _kappa_samples(cell, materials, x, y, kx, ky, n_kappa)
            bands.append(Band(len(bands) + 1, x, y, kx, ky, samples, wi))
    return bands


def _dedupe(pts):
    out = [pts[0]]
    for x, k in pts[1:]:
        if abs(x - out[-1][0]) <= EDGE_TOL * max(1.0, abs(x)):
            if out[-1][1] is None:
                out[-1] = (out[-1][0], k)
            continue
        out.append((x, k))
    return out


def band_gaps(bands: list[Band], material: str = "") -> list[BandGap]:
    """Gaps between consecutive bands of the same pole-free sub-window."""
    gaps = []
    for b0, b1 in zip(bands[:-1], bands[1:]):
        if b0.window != b1.window:
            continue
        width = b1.lower - b0.upper
        if width <= EDGE_TOL * max(1.0, b1.lower):
            warnings.warn(f"bands {b0.index} and {b1.index} touch at {b0.upper:.12g}", DegenerateWarning)
            continue
        gaps.append(BandGap(b0.upper, b1.lower, material, b0.kappa_upper, b1.kappa_lower))
    return gaps


def intersect_gaps(gaps_a: list[BandGap], gaps_b: list[BandGap]) -> list[GapIntersection]:
    out = []
    for ga in gaps_a:
        for gb in gaps_b:
            lo, hi = max(ga.lower, gb.lower), min(ga.upper, gb.upper)
            if hi <= lo:
                continue
            lo_from = "both" if ga.lower == gb.lower else ("A" if ga.lower > gb.lower else "B")
            hi_from = "both" if ga.upper == gb.upper else ("A" if ga.upper < gb.upper else "B")
            out.append(GapIntersection(lo, hi, ga, gb, lo_from, hi_from))
    return sorted(out, key=lambda g: g.lower)


def material_gaps(cell: UnitCell, materials: Materials, omega_window, n_scan: int = N_SCAN,
                  label: str | None = None) -> list[BandGap]:
    bands = scan_bands(cell, materials, omega_window, n_scan, n_kappa=2)
    return band_gaps(bands, cell.label if label is None else label)
