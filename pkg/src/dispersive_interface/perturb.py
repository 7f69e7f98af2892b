"""Permittivity (delta) and symmetry (sigma) sweeps of a common gap and its interface mode."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DispersiveError, MissingBaseline
from .interface import InterfaceMode, NoMode, find_interface_mode, mode_profile
from .materials import Structure, apply_sigma_perturbation, permittivity_derivative, sigma_bound
from .spectrum import GapIntersection, intersect_gaps, material_gaps

N_PROFILE = 10
CONVERGE_TOL = 1e-4
SIGMA_POINTS = 31


def default_delta_grid(n: int = 33) -> np.ndarray:
    return np.concatenate([[0.0], np.logspace(-5, 0, n)])


def default_sigma_grid(structure: Structure, n: int = SIGMA_POINTS) -> np.ndarray:
    return np.linspace(0.0, sigma_bound(structure), n)


@dataclass(frozen=True)
class SweepRecord:
    param: float
    gap_lower: float | None = None
    gap_upper: float | None = None
    omega_m: float | None = None
    mode_found: bool = False
    residual_determinant: float | None = None
    decay_a: float | None = None
    decay_b: float | None = None
    candidates: tuple = ()
    eps_monotone: bool | None = None  # d(eps)/d(omega) >= 0 for both species across the gap
    status: str = "ok"  # ok | no_mode | gap_lost | error
    message: str = ""
    profile: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def gap_width(self) -> float | None:
        if self.gap_lower is None:
            return None
        return self.gap_upper - self.gap_lower


def _overlap(a: GapIntersection, lo: float, hi: float) -> float:
    return min(a.upper, hi) - max(a.lower, lo)


def common_gaps(structure: Structure, window) -> list[GapIntersection]:
    m = structure.materials
    return intersect_gaps(material_gaps(structure.cell_a, m, window, label="A"),
                          material_gaps(structure.cell_b, m, window, label="B"))


def eps_monotone_over(structure: Structure, lower: float, upper: float, n: int = 64) -> bool:
    w = np.linspace(lower, upper, n)
    return bool(all(np.all(permittivity_derivative(mod, w) >= 0.0)
                    for mod in (structure.eps1, structure.eps2)))


def normalized_profile(structure: Structure, omega_m: float, n_cells: int = N_PROFILE) -> np.ndarray:
    """u(x_n), n = -n_cells..n_cells, scaled so the largest |u| is +1."""
    u = np.asarray(mode_profile(structure, omega_m, n_cells)["u"], dtype=float)
    k = int(np.argmax(np.abs(u)))
    return u / u[k]


def _gaps_job(args):
    structure, window = args
    if isinstance(structure, Exception):
        return structure
    try:
        return common_gaps(structure, window)
    except DispersiveError as exc:
        return exc


def _mode_job(args):
    structure, gap, param = args
    mono = eps_monotone_over(structure, gap.lower, gap.upper)
    base = dict(gap_lower=gap.lower, gap_upper=gap.upper, eps_monotone=mono)
    try:
        res = find_interface_mode(structure, gap)
    except DispersiveError as exc:
        return SweepRecord(param, status="error", message=f"{type(exc).__name__}: {exc}", **base)
    if isinstance(res, NoMode):
        return SweepRecord(param, status="no_mode", message=res.reason, **base)
    return SweepRecord(param, omega_m=res.omega_m, mode_found=True,
                       residual_determinant=res.residual_determinant, decay_a=res.decay_a,
                       decay_b=res.decay_b, candidates=tuple(res.candidates),
                       profile=normalized_profile(structure, res.omega_m), **base)


def _map(fn, items, workers):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def track_gaps(gap_lists, gap_index: int) -> list:
    """Sequential gap tracking by interval overlap.

    Returns one entry per step: the tracked GapIntersection or a message.  A
    step with no overlapping common gap is reported as lost, and later steps
    are still matched against the last open gap, so a gap that closes at an
    isolated parameter value and reopens is followed.
    """
    out = []
    prev = None
    for gaps in gap_lists:
        if isinstance(gaps, Exception):
            out.append(f"{type(gaps).__name__}: {gaps}")
            continue
        if prev is None:
            if gap_index >= len(gaps):
                out.append(f"only {len(gaps)} common gaps in the window")
                continue
            gap = gaps[gap_index]
        else:
            scored = [(g, _overlap(g, *prev)) for g in gaps]
            scored = [s for s in scored if s[1] > 0]
            if not scored:
                out.append("no common gap overlaps the tracked one")
                continue
            gap = max(scored, key=lambda s: s[1])[0]
        prev = (gap.lower, gap.upper)
        out.append(gap)
    return out


def _run(structures, params, gap_index, window, workers=None) -> list[SweepRecord]:
    gap_lists = _map(_gaps_job, [(s, window) for s in structures], workers)
    tracked = track_gaps(gap_lists, gap_index)
    jobs, slots = [], []
    records: list[SweepRecord | None] = [None] * len(params)
    for i, (p, s, g) in enumerate(zip(params, structures, tracked)):
        if isinstance(s, Exception):
            records[i] = SweepRecord(p, status="error", message=f"{type(s).__name__}: {s}")
        elif isinstance(g, str):
            status = "error" if isinstance(gap_lists[i], Exception) else "gap_lost"
            records[i] = SweepRecord(p, status=status, message=g)
        else:
            jobs.append((s, g, p))
            slots.append(i)
    for i, rec in zip(slots, _map(_mode_job, jobs, workers)):
        records[i] = rec
    return records


def _build(fn, value):
    try:
        return fn(value)
    except DispersiveError as exc:
        return exc


def sweep_delta(structure: Structure, gap_index: int, pert_kind: str, delta_grid,
                window=(0.5, 0.99), workers: int | None = None) -> list[SweepRecord]:
    """Track common gap ``gap_index`` (0-based, in ``window``) as eps -> eps + delta f.

    The same f is applied to both species.  Failures at a grid point are
    captured in that record and never abort the sweep.
    """
    grid = [float(d) for d in delta_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("delta_grid must be ascending")
    structures = [structure.with_perturbation(pert_kind, d) if d > 0 else structure for d in grid]
    return _run(structures, grid, gap_index, window, workers)


def sweep_sigma(structure: Structure, gap_index: int, sigma_grid, window=(0.5, 0.99),
                workers: int | None = None) -> list[SweepRecord]:
    """Track the gap and all interface candidates under the symmetry perturbation."""
    grid = [float(s) for s in sigma_grid]
    structures = [_build(lambda v: apply_sigma_perturbation(structure, v), s) for s in grid]
    return _run(structures, grid, gap_index, window, workers)


@dataclass(frozen=True)
class ConvergenceReport:
    p_small: float
    max_omega_shift: float  # relative |w_m(p) - w_m(0)| / w_m(0), max over 0 < p <= p_small
    max_profile_distance: float  # sup_n |u_p(x_n) - u(x_n)|, max over the same records
    converged: bool
    n_records: int


def converge_check(records: list[SweepRecord], baseline=None, p_small: float = CONVERGE_TOL,
                   tol: float = CONVERGE_TOL, profile_tol: float = 1e-3) -> ConvergenceReport:
    """Distance of the records with 0 < p <= p_small from the unperturbed mode.

    ``baseline`` is a SweepRecord or an InterfaceMode carrying ``profile``; by
    default the record with p = 0 is used.
    """
    if baseline is None:
        zero = [r for r in records if r.param == 0.0 and r.mode_found]
        if not zero:
            raise MissingBaseline("no p = 0 record with an interface mode")
        baseline = zero[0]
    if isinstance(baseline, InterfaceMode):
        if baseline.profile is None:
            raise MissingBaseline("baseline InterfaceMode has no profile")
        w0, u0 = baseline.omega_m, np.asarray(baseline.profile)
    else:
        if not baseline.mode_found:
            raise MissingBaseline("baseline record has no interface mode")
        w0, u0 = baseline.omega_m, baseline.profile
    near = [r for r in records if r.param <= p_small]
    dw, du = 0.0, 0.0
    ok = True
    for r in near:
        if not r.mode_found:
            ok = False
            continue
        dw = max(dw, abs(r.omega_m - w0) / w0)
        du = max(du, float(np.max(np.abs(r.profile - u0))))
    converged = ok and dw < tol and du < profile_tol
    return ConvergenceReport(p_small, dw, du, converged, len(near))
