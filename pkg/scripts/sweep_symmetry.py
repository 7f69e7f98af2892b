"""Symmetry-breaking sweep over sigma in [0, sigma_max].

    python3 scripts/sweep_symmetry.py configs/fixture.toml --out results/sweeps
"""

import argparse
from pathlib import Path

from dispersive_interface import io
from dispersive_interface.cli import SWEEP_HEADER, _sweep_rows
from dispersive_interface.config import load_config
from dispersive_interface.perturb import default_sigma_grid, sweep_sigma


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="results/sweeps")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    grid = cfg.sigma_grid if cfg.sigma_grid is not None else default_sigma_grid(cfg.structure, cfg.sigma_points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    recs = sweep_sigma(cfg.structure, cfg.sweep_gap_index, grid, cfg.sweep_window, args.threads)
    io.write_csv(out / "sweep_sigma.csv", SWEEP_HEADER, _sweep_rows(recs))
    inside = sum(r.mode_found and r.gap_lower < r.omega_m < r.gap_upper for r in recs)
    lost = [round(r.param, 6) for r in recs if r.status == "gap_lost"]
    print(f"omega_m inside the gap at {inside}/{len(recs)} points; gap closed at sigma={lost}")


if __name__ == "__main__":
    main()
