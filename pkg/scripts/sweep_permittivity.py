"""Permittivity sweeps for both perturbation profiles.

Writes one CSV per profile with the tracked gap edges and interface frequency.

    python3 scripts/sweep_permittivity.py configs/fixture.toml --out results/sweeps
"""

import argparse
from pathlib import Path

from dispersive_interface import io
from dispersive_interface.cli import SWEEP_HEADER, _sweep_rows
from dispersive_interface.config import load_config
from dispersive_interface.perturb import default_delta_grid, sweep_delta

KINDS = ("inverse_sq_decreasing", "inverse_sq_increasing")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="results/sweeps")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    grid = cfg.delta_grid if cfg.delta_grid is not None else default_delta_grid(cfg.delta_points)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in KINDS:
        recs = sweep_delta(cfg.structure, cfg.sweep_gap_index, kind, grid, cfg.sweep_window, args.threads)
        path = out / f"sweep_delta_{kind}.csv"
        io.write_csv(path, SWEEP_HEADER, _sweep_rows(recs))
        found = [r for r in recs if r.mode_found]
        if found:
            a, b = found[0], found[-1]
            print(f"{kind}: width {a.gap_width:.6f} -> {b.gap_width:.6f}, "
                  f"omega_m {a.omega_m:.6f} -> {b.omega_m:.6f}  ({path})")
        else:
            print(f"{kind}: no interface mode tracked ({path})")


if __name__ == "__main__":
    main()
