"""Command-line front end.

Exit codes: 0 success (NoMode and empty gap intersections included),
1 computation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, load_config
from .errors import ConfigError, DispersiveError
from .interface import (NoMode, decay_fit, find_interface_mode, impedances, interior_samples,
                        mode_profile, wronskian, decaying_states)
from .materials import is_mirror_symmetric
from .spectrum import band_gaps, intersect_gaps, scan_bands

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# -- serialisation helpers ---------------------------------------------------

def _gap_dict(g) -> dict:
    return {"material": g.material, "lower": g.lower, "upper": g.upper, "width": g.width,
            "lower_kappa": g.lower_kappa, "upper_kappa": g.upper_kappa}


def _common_dict(k, g) -> dict:
    return {"index": k, "lower": g.lower, "upper": g.upper, "width": g.width, "midpoint": g.midpoint,
            "lower_from": g.lower_from, "upper_from": g.upper_from}


def _structure_dict(s) -> dict:
    def model(m):
        return {"eps0": m.eps0, "alpha": m.alpha, "beta": m.beta, "pert_kind": m.pert_kind,
                "delta": m.pert_delta}

    return {"cell_a": [[l, sp] for l, sp in s.cell_a.as_pairs()],
            "cell_b": [[l, sp] for l, sp in s.cell_b.as_pairs()],
            "eps1": model(s.eps1), "eps2": model(s.eps2), "mu0": s.mu0}


def _bands_and_gaps(cfg: RunConfig, structure):
    m = structure.materials
    out = {}
    for label, cell in (("A", structure.cell_a), ("B", structure.cell_b)):
        bands = scan_bands(cell, m, cfg.window, cfg.n_scan, cfg.kappa_points)
        out[label] = (bands, band_gaps(bands, label))
    common = intersect_gaps(out["A"][1], out["B"][1])
    return out, common


def _pick_gap(cfg, common):
    if cfg.gap_index < len(common):
        return common[cfg.gap_index]
    return None


# -- commands ----------------------------------------------------------------

def cmd_bands(cfg, args, out: Path) -> int:
    s = cfg.effective_structure()
    data, common = _bands_and_gaps(cfg, s)
    rows = []
    for label, (bands, _) in data.items():
        for b in bands:
            for kappa, omega in b.samples:
                rows.append((label, b.index, kappa, omega))
    io.write_csv(out / "bands.csv", ["material", "band", "kappa", "omega"], rows)
    _write_gaps(out, data, common, s)
    return EXIT_OK


def _edge_labels(cell, m, k, g) -> dict:
    """Edge symmetry and bulk index of one gap; empty for cells without mirror symmetry."""
    from .modes import bulk_index, classify_edge_symmetry, edge_mode

    if not is_mirror_symmetric(cell):
        return {}
    try:
        lower = edge_mode(cell, m, g.lower_kappa, g.lower)
        upper = edge_mode(cell, m, g.upper_kappa, g.upper)
        return {"lower_symmetry": classify_edge_symmetry(lower).classification,
                "upper_symmetry": classify_edge_symmetry(upper).classification,
                "bulk_index": bulk_index(g, lower, k).value}
    except (DispersiveError, ValueError) as exc:
        return {"symmetry_error": f"{type(exc).__name__}: {exc}"}


def _write_gaps(out, data, common, structure):
    cells = {"A": structure.cell_a, "B": structure.cell_b}
    report = {
        "gaps": [dict(_gap_dict(g), index=k, **_edge_labels(cells[label], structure.materials, k, g))
                 for label in ("A", "B") for k, g in enumerate(data[label][1])],
        "common_gaps": [_common_dict(k, g) for k, g in enumerate(common)],
    }
    io.write_json(out / "gaps.json", report)


def cmd_gaps(cfg, args, out: Path) -> int:
    s = cfg.effective_structure()
    data, common = _bands_and_gaps(cfg, s)
    _write_gaps(out, data, common, s)
    return EXIT_OK


def cmd_zak(cfg, args, out: Path) -> int:
    from .modes import zak_phase

    s = cfg.effective_structure()
    m = s.materials
    rows = []
    for label, cell in (("A", s.cell_a), ("B", s.cell_b)):
        if not is_mirror_symmetric(cell):
            warnings.warn(f"cell {label} is not mirror-symmetric; Zak phase left unclassified")
        bands = scan_bands(cell, m, cfg.window, cfg.n_scan, 2)
        for b in bands:
            row = {"material": label, "band": b.index, "lower": b.lower, "upper": b.upper}
            try:
                z = zak_phase(cell, m, b, cfg.zak_kappa_points, cfg.zak_grid)
                row.update(theta=z.theta, classified=z.classified, residual=z.residual)
            except (DispersiveError, ValueError) as exc:
                row.update(error=f"{type(exc).__name__}: {exc}")
            rows.append(row)
    io.write_json(out / "zak.json", {"kappa_points": cfg.zak_kappa_points, "grid": cfg.zak_grid,
                                     "bands": rows})
    return EXIT_OK


def cmd_impedance(cfg, args, out: Path) -> int:
    s = cfg.effective_structure()
    _, common = _bands_and_gaps(cfg, s)
    rows = []
    for k, g in enumerate(common):
        for w in interior_samples(g.lower, g.upper, cfg.impedance_samples):
            p = impedances(s, w)
            rows.append((k, w, p.z_minus, p.z_plus, p.total, wronskian(decaying_states(s, w))))
    io.write_csv(out / "impedance.csv", ["gap", "omega", "z_minus", "z_plus", "z_sum", "W"], rows)
    return EXIT_OK


def _bulk(b):
    return None if b is None else b.value


def _mode_report(cfg, s, common):
    report = {"structure": _structure_dict(s), "common_gaps": [_common_dict(k, g) for k, g in enumerate(common)]}
    gap = _pick_gap(cfg, common)
    if gap is None:
        report.update(status="no_common_gap", reason=f"{len(common)} common gaps in the window, "
                      f"gap_index {cfg.gap_index} requested")
        return report, None
    res = find_interface_mode(s, gap)
    report["gap_index"] = cfg.gap_index
    if isinstance(res, NoMode):
        report.update(status="no_mode", reason=res.reason, index_sum=res.index_sum,
                      bulk_a=_bulk(res.bulk_a), bulk_b=_bulk(res.bulk_b))
        return report, None
    report.update(status="mode", omega_m=res.omega_m, residual_determinant=res.residual_determinant,
                  residual_impedance=res.residual_impedance, decay_a=res.decay_a, decay_b=res.decay_b,
                  bulk_a=_bulk(res.bulk_a), bulk_b=_bulk(res.bulk_b), unique=res.unique,
                  candidates=list(res.candidates))
    if cfg.n_cells >= 10:
        prof = mode_profile(s, res.omega_m, cfg.n_cells)
        report["decay_fit_a"] = decay_fit(prof, "left")
        report["decay_fit_b"] = decay_fit(prof, "right")
    return report, res


def _oracle_check(cfg, s, res) -> dict:
    from .oracle import oracle_finite_interface

    g = res.gap
    roots = oracle_finite_interface(s, cfg.oracle_cells, (g.lower, g.upper), cfg.oracle_N_per_cell)
    best = max(roots, key=lambda r: r.score, default=None)
    if best is None:
        return {"found": False, "n_cells_per_side": cfg.oracle_cells}
    return {"found": True, "omega": best.omega, "score": best.score,
            "relative_residual": abs(best.omega - res.omega_m) / res.omega_m,
            "n_cells_per_side": cfg.oracle_cells, "N_per_cell": cfg.oracle_N_per_cell}


def _write_profile(path, s, omega_m, n_cells, n_per_cell):
    prof = mode_profile(s, omega_m, n_cells, n_per_cell)
    if n_per_cell > 0:
        rows = zip(prof["x_fine"], prof["u_fine"], prof["du_fine"])
    else:
        rows = zip(prof["x"], prof["u"], prof["du"])
    io.write_csv(path, ["x", "u", "du"], rows)


def cmd_interface(cfg, args, out: Path) -> int:
    s = cfg.effective_structure()
    _, common = _bands_and_gaps(cfg, s)
    report, res = _mode_report(cfg, s, common)
    if res is not None:
        if args.oracle:
            report["oracle"] = _oracle_check(cfg, s, res)
        _write_profile(out / "profile.csv", s, res.omega_m, cfg.n_cells, cfg.n_per_cell)
    io.write_json(out / "interface.json", report)
    return EXIT_OK


def cmd_profile(cfg, args, out: Path) -> int:
    s = cfg.effective_structure()
    _, common = _bands_and_gaps(cfg, s)
    gap = _pick_gap(cfg, common)
    if gap is None:
        print(f"no common gap with index {cfg.gap_index}", file=sys.stderr)
        return EXIT_OK
    res = find_interface_mode(s, gap)
    if isinstance(res, NoMode):
        print(f"no interface mode: {res.reason}", file=sys.stderr)
        return EXIT_OK
    _write_profile(out / "profile.csv", s, res.omega_m, cfg.n_cells, max(cfg.n_per_cell, 1))
    return EXIT_OK


SWEEP_HEADER = ["param", "status", "gap_lower", "gap_upper", "gap_width", "omega_m", "residual_determinant",
                "decay_a", "decay_b", "n_candidates", "eps_monotone", "message"]


def _sweep_rows(records):
    for r in records:
        yield (r.param, r.status, r.gap_lower, r.gap_upper, r.gap_width, r.omega_m, r.residual_determinant,
               r.decay_a, r.decay_b, len(r.candidates), r.eps_monotone, r.message)


def cmd_sweep_delta(cfg, args, out: Path) -> int:
    from .perturb import default_delta_grid, sweep_delta

    kind = args.kind or cfg.pert_kind
    if kind == "none":
        raise ConfigError("perturbation.kind", "sweep-delta needs a perturbation kind (or --kind)")
    grid = cfg.delta_grid if cfg.delta_grid is not None else default_delta_grid(cfg.delta_points)
    recs = sweep_delta(cfg.structure, cfg.sweep_gap_index, kind, grid, cfg.sweep_window, args.threads)
    io.write_csv(out / "sweep_delta.csv", SWEEP_HEADER, _sweep_rows(recs))
    return EXIT_OK


def cmd_sweep_sigma(cfg, args, out: Path) -> int:
    from .perturb import default_sigma_grid, sweep_sigma

    grid = cfg.sigma_grid if cfg.sigma_grid is not None else default_sigma_grid(cfg.structure, cfg.sigma_points)
    recs = sweep_sigma(cfg.structure, cfg.sweep_gap_index, grid, cfg.sweep_window, args.threads)
    io.write_csv(out / "sweep_sigma.csv", SWEEP_HEADER, _sweep_rows(recs))
    return EXIT_OK


def cmd_verify(cfg, args, out: Path) -> int:
    from .verify import run_suite

    s = cfg.effective_structure()
    report = run_suite(s, cfg.window, cfg.n_scan, cfg.kappa_points, cfg.zak_kappa_points, cfg.zak_grid,
                       oracle=args.oracle, oracle_N=cfg.oracle_N)
    report["structure"] = _structure_dict(s)
    report["window"] = list(cfg.window)
    io.write_json(out / "verify.json", report)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}")
    return EXIT_OK if report["all_passed"] else EXIT_FAIL


COMMANDS = {
    "bands": cmd_bands,
    "gaps": cmd_gaps,
    "zak": cmd_zak,
    "impedance": cmd_impedance,
    "interface": cmd_interface,
    "profile": cmd_profile,
    "sweep-delta": cmd_sweep_delta,
    "sweep-sigma": cmd_sweep_sigma,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dispersive-interface",
                                description="Bands, gaps and interface modes of dispersive layered media.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--oracle", action="store_true", help="cross-check against the finite-difference oracle")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes for sweeps")
    p.add_argument("--kappa-points", type=int, help="override band and Zak kappa resolution")
    p.add_argument("--grid", type=int, help="override the spatial grid for mode sampling")
    p.add_argument("--kind", choices=["inverse_sq_decreasing", "inverse_sq_increasing"],
                   help="perturbation profile for sweep-delta")
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.kappa_points is not None:
        if args.kappa_points < 5:
            raise ConfigError("--kappa-points", "must be >= 5")
        changes.update(kappa_points=args.kappa_points, zak_kappa_points=args.kappa_points)
    if args.grid is not None:
        if args.grid < 16:
            raise ConfigError("--grid", "must be >= 16")
        changes["zak_grid"] = args.grid
    if args.threads < 1:
        raise ConfigError("--threads", "must be >= 1")
    return dataclasses.replace(cfg, **changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DispersiveError, ValueError, ArithmeticError) as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
