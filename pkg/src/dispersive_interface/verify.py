"""Invariant suite run by the ``verify`` command.

Every check returns a plain dict (name, passed, numbers) so the report is
deterministic and serialisable.  Failures inside a check are recorded, never
raised.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DispersiveError
from .interface import (NoMode, decay_fit, find_interface_mode, impedance_sum_root,
                        impedances, interior_samples, mode_profile)
from .materials import Structure
from .modes import classify_edge_symmetry, edge_mode, zak_phase
from .spectrum import band_gaps, intersect_gaps, scan_bands, split_window
from .xfer import cell_transfer_matrix, segment_matrix

SEED = 20240601


def _check(name, fn):
    try:
        out = fn()
    except (DispersiveError, ValueError, ArithmeticError) as exc:
        return {"name": name, "passed": False, "error": f"{type(exc).__name__}: {exc}"}
    out = dict(out)
    out["name"] = name
    return out


def check_unimodularity(structure: Structure, window, n: int = 200) -> dict:
    rng = np.random.default_rng(SEED)
    # |sqrt(eps) w l| <= 4: beyond that cosh^2 ~ 1e3 and the absolute det error
    # is set by rounding, not by the formula
    lengths = rng.uniform(1e-9, 1.0, 1000)
    eps = np.concatenate([rng.uniform(-4.0, 4.0, 900), rng.uniform(-1e-10, 1e-10, 100)])
    omegas = rng.uniform(1e-9, 2.0, 1000)
    worst = max(abs(np.linalg.det(segment_matrix(l, e, w, structure.mu0)) - 1.0)
                for l, e, w in zip(lengths, eps, omegas))
    m = structure.materials
    for lo, hi in split_window(window, m):
        for w in np.linspace(lo, hi, n):
            for cell in (structure.cell_a, structure.cell_b):
                worst = max(worst, abs(np.linalg.det(cell_transfer_matrix(cell, m, w)) - 1.0))
    return {"passed": bool(worst < 1e-12), "max_det_error": float(worst), "tol": 1e-12}


def check_band_monotonicity(bands_by_cell: dict) -> dict:
    bad = []
    for label, bands in bands_by_cell.items():
        for b in bands:
            if not b.complete:
                continue
            d = np.diff(b.samples[1:-1, 1])
            if not (np.all(d > 0) or np.all(d < 0)):
                bad.append(f"{label}:{b.index}")
    n = sum(len(v) for v in bands_by_cell.values())
    return {"passed": not bad, "n_bands": n, "non_monotone": bad}


def check_edge_dichotomy(structure: Structure, gaps_by_cell: dict) -> dict:
    if not structure.mirror_symmetric:
        return {"passed": True, "skipped": "cells are not mirror-symmetric"}
    m = structure.materials
    rows = []
    cells = {"A": structure.cell_a, "B": structure.cell_b}
    for label, gaps in gaps_by_cell.items():
        for g in gaps:
            for kappa, omega in ((g.lower_kappa, g.lower), (g.upper_kappa, g.upper)):
                sym = classify_edge_symmetry(edge_mode(cells[label], m, kappa, omega))
                rows.append({"material": label, "omega": omega, "kappa": kappa,
                             "classification": sym.classification,
                             "reflection_residual": sym.reflection_residual})
    return {"passed": True, "edges": rows}


def _strictly_decreasing(nums, dens) -> bool:
    vals = np.where(dens != 0, nums / np.where(dens == 0, 1.0, dens), np.nan)
    for i in range(len(vals) - 1):
        same_branch = np.sign(dens[i]) == np.sign(dens[i + 1]) and dens[i] != 0
        if same_branch and not vals[i + 1] < vals[i]:
            return False
    return True


def check_impedance_monotonicity(structure: Structure, common, n: int = 64) -> dict:
    rows = []
    ok = True
    for k, g in enumerate(common):
        pairs = [impedances(structure, w) for w in interior_samples(g.lower, g.upper, n)]
        zp = _strictly_decreasing(np.array([p.plus_num for p in pairs]), np.array([p.plus_den for p in pairs]))
        zm = _strictly_decreasing(np.array([p.minus_num for p in pairs]), np.array([p.minus_den for p in pairs]))
        ok = ok and zp and zm
        rows.append({"gap": k, "z_plus_decreasing": zp, "z_minus_decreasing": zm})
    return {"passed": ok, "gaps": rows}


def check_interface(structure: Structure, common, n_cells: int = 12) -> dict:
    rows = []
    ok = True
    for k, g in enumerate(common):
        row = {"gap": k, "lower": g.lower, "upper": g.upper}
        res = find_interface_mode(structure, g)
        if isinstance(res, NoMode):
            row.update(mode=False, index_sum=res.index_sum, reason=res.reason)
            rows.append(row)
            continue
        row.update(mode=True, omega_m=res.omega_m, W=res.residual_determinant,
                   decay_a=res.decay_a, decay_b=res.decay_b)
        passed = res.residual_determinant < 1e-10
        if structure.mirror_symmetric:
            z_root = impedance_sum_root(structure, g)
            row["impedance_root_diff"] = abs(z_root - res.omega_m)
            passed = passed and row["impedance_root_diff"] < 1e-10
        prof = mode_profile(structure, res.omega_m, n_cells)
        fa, fb = decay_fit(prof, "left"), decay_fit(prof, "right")
        row["decay_fit_a"], row["decay_fit_b"] = fa, fb
        row["decay_rel_err"] = max(abs(math.log(fa) / math.log(res.decay_a) - 1.0),
                                   abs(math.log(fb) / math.log(res.decay_b) - 1.0))
        passed = passed and row["decay_rel_err"] < 0.01
        row["passed"] = bool(passed)
        ok = ok and passed
        rows.append(row)
    return {"passed": ok, "gaps": rows}


def check_zak(structure: Structure, bands_by_cell: dict, n_kappa: int, n_grid: int) -> dict:
    m = structure.materials
    cells = {"A": structure.cell_a, "B": structure.cell_b}
    rows = []
    ok = True
    for label, bands in bands_by_cell.items():
        complete = [b for b in bands if b.complete and b.omega_at_kappa0 is not None
                    and b.omega_at_kappa_pi is not None]
        if not complete:
            rows.append({"material": label, "skipped": "no complete band in the window"})
            continue
        z = zak_phase(cells[label], m, complete[0], n_kappa, n_grid)
        row = {"material": label, "band": z.band_index, "theta": z.theta,
               "classified": z.classified, "residual": z.residual}
        if z.classified is not None:
            row["passed"] = bool(z.residual < 1e-2 * math.pi)
            ok = ok and row["passed"]
        rows.append(row)
    return {"passed": ok, "bands": rows}


def check_oracle_bands(structure: Structure, bands_by_cell: dict, N: int, n_kappa: int = 8) -> dict:
    from .modes import band_omegas
    from .oracle import oracle_band_frequencies

    m = structure.materials
    cells = {"A": structure.cell_a, "B": structure.cell_b}
    worst = 0.0
    kappas = np.linspace(0.1, math.pi - 0.1, n_kappa)
    for label, bands in bands_by_cell.items():
        for b in [b for b in bands if b.complete][:2]:
            w_tm = band_omegas(cells[label], m, b, kappas)
            for k, w in zip(kappas, w_tm):
                lo, hi = max(b.lower - 0.02 * b.upper, 1e-9), b.upper + 0.02 * b.upper
                roots = oracle_band_frequencies(cells[label], m, float(k), (lo, hi), N)
                if not roots:
                    return {"passed": False, "error": f"oracle found no root near {w:.12g}"}
                worst = max(worst, min(abs(r - w) / w for r in roots))
    return {"passed": bool(worst < 1e-3), "max_rel_diff": worst, "N": N, "tol": 1e-3}


def run_suite(structure: Structure, window, n_scan: int, n_kappa: int, zak_kappa: int, zak_grid: int,
              oracle: bool = False, oracle_N: int = 2000) -> dict:
    m = structure.materials
    bands_by_cell, gaps_by_cell = {}, {}
    for label, cell in (("A", structure.cell_a), ("B", structure.cell_b)):
        bands_by_cell[label] = scan_bands(cell, m, window, n_scan, n_kappa)
        gaps_by_cell[label] = band_gaps(bands_by_cell[label], label)
    common = intersect_gaps(gaps_by_cell["A"], gaps_by_cell["B"])
    checks = [
        _check("unimodularity", lambda: check_unimodularity(structure, window)),
        _check("band_monotonicity", lambda: check_band_monotonicity(bands_by_cell)),
        _check("edge_dichotomy", lambda: check_edge_dichotomy(structure, gaps_by_cell)),
        _check("impedance_monotonicity", lambda: check_impedance_monotonicity(structure, common)),
        _check("interface_modes", lambda: check_interface(structure, common)),
        _check("zak_quantization", lambda: check_zak(structure, bands_by_cell, zak_kappa, zak_grid)),
    ]
    if oracle:
        checks.append(_check("oracle_bands", lambda: check_oracle_bands(structure, bands_by_cell, oracle_N)))
    return {"checks": checks, "n_common_gaps": len(common), "all_passed": all(c["passed"] for c in checks)}
