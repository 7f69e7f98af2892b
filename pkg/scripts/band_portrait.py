"""Band diagram and gap portrait of both materials.

    python3 scripts/band_portrait.py configs/fixture.toml --out results/bands
"""

import argparse
from pathlib import Path

from dispersive_interface import io
from dispersive_interface.config import load_config
from dispersive_interface.spectrum import band_gaps, intersect_gaps, scan_bands


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="results/bands")
    ap.add_argument("--window", type=float, nargs=2, help="override the scan window")
    args = ap.parse_args()

    cfg = load_config(args.config)
    s = cfg.effective_structure()
    window = tuple(args.window) if args.window else cfg.window
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows, gap_rows, gaps = [], [], {}
    for label, cell in (("A", s.cell_a), ("B", s.cell_b)):
        bands = scan_bands(cell, s.materials, window, cfg.n_scan, cfg.kappa_points)
        for b in bands:
            rows.extend((label, b.index, k, w) for k, w in b.samples)
        gaps[label] = band_gaps(bands, label)
        gap_rows.extend((label, g.lower, g.upper) for g in gaps[label])
    gap_rows.extend(("common", g.lower, g.upper) for g in intersect_gaps(gaps["A"], gaps["B"]))

    io.write_csv(out / "bands.csv", ["material", "band", "kappa", "omega"], rows)
    io.write_csv(out / "gaps.csv", ["material", "lower", "upper"], gap_rows)
    print(f"{len(rows)} band samples, {len(gap_rows)} gaps -> {out}")


if __name__ == "__main__":
    main()
