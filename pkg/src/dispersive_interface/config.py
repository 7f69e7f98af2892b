"""TOML run configuration: schema validation and conversion to library objects."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .materials import PERT_KINDS, PermittivityModel, Structure, UnitCell

# section -> {key: (type(s), required)}
_NUM = (int, float)
SCHEMA = {
    "material.eps1": {"eps0": (_NUM, False), "alpha": (_NUM, False), "beta": (_NUM, False)},
    "material.eps2": {"eps0": (_NUM, False), "alpha": (_NUM, False), "beta": (_NUM, False)},
    "cell_a": {"layers": (list, True), "label": (str, False)},
    "cell_b": {"layers": (list, True), "label": (str, False)},
    "globals": {"mu0": (_NUM, False)},
    "perturbation": {"kind": (str, False), "delta": (_NUM, False), "sigma": (_NUM, False)},
    "scan": {"window": (list, False), "n_scan": (int, False), "kappa_points": (int, False)},
    "interface": {"gap_index": (int, False), "n_cells": (int, False), "n_per_cell": (int, False),
                  "samples": (int, False)},
    "zak": {"kappa_points": (int, False), "grid": (int, False)},
    "sweep": {"window": (list, False), "gap_index": (int, False), "delta_grid": (list, False),
              "delta_points": (int, False), "sigma_grid": (list, False), "sigma_points": (int, False)},
    "oracle": {"N": (int, False), "n_cells_per_side": (int, False), "N_per_cell": (int, False)},
    "tolerances": {"eta_edge": (_NUM, False), "symmetry": (_NUM, False), "zak_stability": (_NUM, False),
                   "converge": (_NUM, False)},
}
REQUIRED_SECTIONS = ("material.eps1", "material.eps2", "cell_a", "cell_b")


@dataclass(frozen=True)
class Tolerances:
    eta_edge: float = 1e-9
    symmetry: float = 1e-6
    zak_stability: float = 1e-3
    converge: float = 1e-4


@dataclass(frozen=True)
class RunConfig:
    structure: Structure
    window: tuple[float, float] = (0.0, 0.99)
    n_scan: int = 4000
    kappa_points: int = 64
    delta: float = 0.0
    sigma: float = 0.0
    pert_kind: str = "none"
    gap_index: int = 0
    n_cells: int = 12
    n_per_cell: int = 32
    impedance_samples: int = 64
    zak_kappa_points: int = 201
    zak_grid: int = 1024
    sweep_window: tuple[float, float] = (0.5, 0.99)
    sweep_gap_index: int = 0
    delta_grid: tuple | None = None
    delta_points: int = 33
    sigma_grid: tuple | None = None
    sigma_points: int = 31
    oracle_N: int = 2000
    oracle_cells: int = 20
    oracle_N_per_cell: int = 400
    tolerances: Tolerances = field(default_factory=Tolerances)
    source: str = ""

    def base_structure(self) -> Structure:
        return self.structure

    def effective_structure(self) -> Structure:
        """Structure with the configured delta and sigma perturbations applied."""
        from .materials import apply_sigma_perturbation

        s = self.structure
        if self.pert_kind != "none" and self.delta > 0:
            s = s.with_perturbation(self.pert_kind, self.delta)
        if self.sigma > 0:
            s = apply_sigma_perturbation(s, self.sigma)
        return s


def _section(doc: dict, name: str):
    node = doc
    for part in name.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def _check_types(doc: dict) -> None:
    known_top = {name.split(".")[0] for name in SCHEMA}
    for key in doc:
        if key not in known_top:
            raise ConfigError(key, "unknown section")
    mat = doc.get("material", {})
    if not isinstance(mat, dict):
        raise ConfigError("material", "must be a table")
    for key in mat:
        if f"material.{key}" not in SCHEMA:
            raise ConfigError(f"material.{key}", "unknown section (expected eps1 or eps2)")
    for name in REQUIRED_SECTIONS:
        if _section(doc, name) is None:
            raise ConfigError(name, "missing required section")
    for name, fields in SCHEMA.items():
        sec = _section(doc, name)
        if sec is None:
            continue
        if not isinstance(sec, dict):
            raise ConfigError(name, "must be a table")
        for key, value in sec.items():
            if key not in fields:
                raise ConfigError(f"{name}.{key}", "unknown field")
            types, _ = fields[key]
            if isinstance(value, bool) or not isinstance(value, types):
                raise ConfigError(f"{name}.{key}", f"expected {_type_name(types)}, got {type(value).__name__}")
        for key, (_, required) in fields.items():
            if required and key not in sec:
                raise ConfigError(f"{name}.{key}", "missing required field")


def _type_name(types) -> str:
    if types is _NUM:
        return "number"
    return types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)


def _model(sec: dict, path: str) -> PermittivityModel:
    vals = {k: float(sec.get(k, d)) for k, d in (("eps0", 1.0), ("alpha", 0.0), ("beta", 0.0))}
    for k, v in vals.items():
        if not math.isfinite(v) or v < 0:
            raise ConfigError(f"{path}.{k}", "must be finite and non-negative")
    return PermittivityModel(**vals)


def _cell(sec: dict, path: str, default_label: str) -> UnitCell:
    layers = sec["layers"]
    if not layers:
        raise ConfigError(f"{path}.layers", "needs at least one layer")
    pairs = []
    for i, item in enumerate(layers):
        p = f"{path}.layers[{i}]"
        if not isinstance(item, list) or len(item) != 2:
            raise ConfigError(p, "expected [length, species]")
        length, species = item
        if isinstance(length, bool) or not isinstance(length, _NUM) or not length > 0:
            raise ConfigError(p, "length must be a positive number")
        if species not in (1, 2) or isinstance(species, bool):
            raise ConfigError(p, "species must be 1 or 2")
        pairs.append((float(length), int(species)))
    total = math.fsum(l for l, _ in pairs)
    if abs(total - 1.0) > 1e-12:
        raise ConfigError(f"{path}.layers", f"lengths sum to {total!r}, expected 1")
    return UnitCell.from_pairs(pairs, sec.get("label", default_label))


def _window(value, path: str) -> tuple[float, float]:
    if len(value) != 2 or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in value):
        raise ConfigError(path, "expected [lower, upper]")
    lo, hi = float(value[0]), float(value[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo < hi):
        raise ConfigError(path, "need 0 <= lower < upper")
    return lo, hi


def _grid(value, path: str) -> tuple:
    if not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in value):
        raise ConfigError(path, "expected a list of numbers")
    vals = tuple(float(v) for v in value)
    if any(v < 0 for v in vals) or any(b < a for a, b in zip(vals, vals[1:])):
        raise ConfigError(path, "must be non-negative and ascending")
    return vals


def _positive(sec: dict, key: str, path: str, default: int, minimum: int = 1) -> int:
    v = sec.get(key, default)
    if v < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}")
    return int(v)


def parse_config(doc: dict, source: str = "") -> RunConfig:
    _check_types(doc)
    g = doc.get("globals", {})
    mu0 = float(g.get("mu0", 1.0))
    if not mu0 > 0:
        raise ConfigError("globals.mu0", "must be positive")
    eps1 = _model(doc["material"]["eps1"], "material.eps1")
    eps2 = _model(doc["material"]["eps2"], "material.eps2")
    a = _cell(doc["cell_a"], "cell_a", "A")
    b = _cell(doc["cell_b"], "cell_b", "B")
    structure = Structure(a, b, eps1, eps2, mu0)

    pert = doc.get("perturbation", {})
    kind = pert.get("kind", "none")
    if kind not in PERT_KINDS:
        raise ConfigError("perturbation.kind", f"must be one of {', '.join(PERT_KINDS)}")
    delta = float(pert.get("delta", 0.0))
    sigma = float(pert.get("sigma", 0.0))
    if delta < 0:
        raise ConfigError("perturbation.delta", "must be non-negative")
    if sigma < 0:
        raise ConfigError("perturbation.sigma", "must be non-negative")

    scan = doc.get("scan", {})
    iface = doc.get("interface", {})
    zak = doc.get("zak", {})
    sweep = doc.get("sweep", {})
    orc = doc.get("oracle", {})
    tol = doc.get("tolerances", {})
    for k, v in tol.items():
        if not v > 0:
            raise ConfigError(f"tolerances.{k}", "must be positive")

    return RunConfig(
        structure=structure,
        window=_window(scan["window"], "scan.window") if "window" in scan else (0.0, 0.99),
        n_scan=_positive(scan, "n_scan", "scan", 4000, 16),
        kappa_points=_positive(scan, "kappa_points", "scan", 64, 2),
        delta=delta,
        sigma=sigma,
        pert_kind=kind,
        gap_index=_positive(iface, "gap_index", "interface", 0, 0),
        n_cells=_positive(iface, "n_cells", "interface", 12, 0),
        n_per_cell=_positive(iface, "n_per_cell", "interface", 32, 0),
        impedance_samples=_positive(iface, "samples", "interface", 64, 2),
        zak_kappa_points=_positive(zak, "kappa_points", "zak", 201, 5),
        zak_grid=_positive(zak, "grid", "zak", 1024, 16),
        sweep_window=_window(sweep["window"], "sweep.window") if "window" in sweep else (0.5, 0.99),
        sweep_gap_index=_positive(sweep, "gap_index", "sweep", 0, 0),
        delta_grid=_grid(sweep["delta_grid"], "sweep.delta_grid") if "delta_grid" in sweep else None,
        delta_points=_positive(sweep, "delta_points", "sweep", 33, 1),
        sigma_grid=_grid(sweep["sigma_grid"], "sweep.sigma_grid") if "sigma_grid" in sweep else None,
        sigma_points=_positive(sweep, "sigma_points", "sweep", 31, 2),
        oracle_N=_positive(orc, "N", "oracle", 2000, 16),
        oracle_cells=_positive(orc, "n_cells_per_side", "oracle", 20, 1),
        oracle_N_per_cell=_positive(orc, "N_per_cell", "oracle", 400, 8),
        tolerances=Tolerances(**{k: float(v) for k, v in tol.items()}),
        source=source,
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_bytes()
    except OSError as exc:
        raise ConfigError(str(p), f"cannot read file ({exc.strerror})") from None
    try:
        doc = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(str(p), f"invalid TOML: {exc}") from None
    try:
        return parse_config(doc, str(p))
    except ValueError as exc:
        # invariants enforced by the domain types themselves
        raise ConfigError(str(p), str(exc)) from None
