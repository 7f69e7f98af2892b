"""Surface impedances, the interface-mode frequency and its decaying profile.

All interface quantities are built from flux states (u, u'/eps), which are
continuous across every layer boundary and across the A|B interface.  With L
the left-decaying state of A and R the right-decaying state of B at x0 = 0,

    Z+ = R1 / R2,   Z- = -L1 / L2,   W = L1 R2 - L2 R1,

so Z+ + Z- = -W / (L2 R2) and the interface condition is W = 0.  When both
cells end in species 1 this is the usual eps1 u / u' form of the impedances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsideBand, MultipleRoots, RootAtEdge
from .materials import Structure
from .modes import BulkIndex, gap_bulk_index
from .roots import refine, sign_changes
from .spectrum import GapIntersection
from .xfer import ETA_EDGE, cell_flux_matrix, eigen_system, sample_cell

N_UNIQUE = 256
ROOT_TOL = 1e-13


@dataclass(frozen=True)
class DecayingStates:
    omega: float
    left: np.ndarray  # flux state at 0- of the solution decaying as x -> -inf
    right: np.ndarray  # flux state at 0+ of the solution decaying as x -> +inf
    lambda_a: float  # |lambda| < 1 multiplier of A per cell (leftwards)
    lambda_b: float  # |lambda| < 1 multiplier of B per cell (rightwards)


@dataclass(frozen=True)
class ImpedancePair:
    """Projective impedances: Z = num / den, with den = 0 meaning Z = +-inf."""

    omega: float
    minus_num: float
    minus_den: float
    plus_num: float
    plus_den: float

    @staticmethod
    def _ratio(n, d):
        if d == 0.0:
            return math.copysign(math.inf, n)
        return n / d

    @property
    def z_minus(self) -> float:
        return self._ratio(self.minus_num, self.minus_den)

    @property
    def z_plus(self) -> float:
        return self._ratio(self.plus_num, self.plus_den)

    @property
    def total(self) -> float:
        return self.z_plus + self.z_minus


@dataclass(frozen=True)
class InterfaceMode:
    omega_m: float
    gap: GapIntersection
    residual_impedance: float
    residual_determinant: float
    decay_a: float
    decay_b: float
    bulk_a: BulkIndex | None = None
    bulk_b: BulkIndex | None = None
    unique: bool = True
    candidates: tuple = ()
    profile: dict | None = field(default=None, repr=False)


@dataclass(frozen=True)
class NoMode:
    gap: GapIntersection
    index_sum: int | None
    reason: str
    bulk_a: BulkIndex | None = None
    bulk_b: BulkIndex | None = None


def _align(v, ref):
    return v if ref is None or float(np.dot(v, ref)) >= 0 else -v


def decaying_states(structure: Structure, omega: float, ref: DecayingStates | None = None,
                    eta_edge: float = ETA_EDGE) -> DecayingStates:
    """Decaying flux states on both sides of the interface.

    B contributes the eigenvector of its small multiplier.  A contributes the
    eigenvector of its large multiplier, i.e. the small one of the inverse
    matrix; for a mirror-symmetric A this equals S v1 with S = diag(1, -1).
    ``ref`` aligns eigenvector signs with a nearby frequency so that W varies
    continuously across a gap.
    """
    m = structure.materials
    ea = eigen_system(cell_flux_matrix(structure.cell_a, m, float(omega)), eta_edge)
    eb = eigen_system(cell_flux_matrix(structure.cell_b, m, float(omega)), eta_edge)
    left = _align(ea.v2, None if ref is None else ref.left)
    right = _align(eb.v1, None if ref is None else ref.right)
    return DecayingStates(float(omega), left, right, ea.lambda1, eb.lambda1)


def impedances(structure: Structure, omega: float) -> ImpedancePair:
    st = decaying_states(structure, omega)
    return ImpedancePair(st.omega, -st.left[0], st.left[1], st.right[0], st.right[1])


def wronskian(st: DecayingStates) -> float:
    """W = L1 R2 - L2 R1 for unit flux states; zero iff an interface mode exists."""
    return float(st.left[0] * st.right[1] - st.left[1] * st.right[0])


def interior_samples(lower: float, upper: float, n: int) -> np.ndarray:
    """n points strictly inside (lower, upper), at cell midpoints."""
    return lower + (upper - lower) * (np.arange(n) + 0.5) / n


def scan_wronskian(structure: Structure, omegas) -> tuple[np.ndarray, list[DecayingStates]]:
    """W along ascending samples with a continuous eigenvector gauge."""
    states: list[DecayingStates] = []
    prev = None
    for w in omegas:
        prev = decaying_states(structure, w, prev)
        states.append(prev)
    return np.array([wronskian(s) for s in states]), states


def _refine_root(structure, st_lo: DecayingStates, st_hi: DecayingStates) -> float:
    def fn(w):
        return wronskian(decaying_states(structure, w, st_lo))

    # the bracket endpoints are evaluated in the same gauge as the interior
    return refine(fn, st_lo.omega, st_hi.omega, ROOT_TOL)


def _mode_at(structure, gap, omega, bulk_a=None, bulk_b=None, unique=True, candidates=()):
    st = decaying_states(structure, omega)
    w = wronskian(st)
    l, r = st.left, st.right
    # |Z+ + Z-| = |W| / |L2 R2|
    denom = abs(l[1] * r[1])
    res_z = abs(w) / denom if denom > 0 else math.inf
    return InterfaceMode(float(omega), gap, res_z, abs(w), abs(st.lambda_a), abs(st.lambda_b),
                         bulk_a, bulk_b, unique, tuple(candidates))


def interface_candidates(structure: Structure, gap: GapIntersection, n_samples: int = N_UNIQUE) -> list[float]:
    """Every root of W found by sign changes over n_samples interior points."""
    omegas = interior_samples(gap.lower, gap.upper, n_samples)
    vals, states = scan_wronskian(structure, omegas)
    roots = []
    for i in sign_changes(vals):
        roots.append(_refine_root(structure, states[i], states[i + 1]))
    roots.extend(float(omegas[i]) for i in np.flatnonzero(vals == 0.0))
    return sorted(roots)


def gap_bulk_indices(structure: Structure, gap: GapIntersection) -> tuple[BulkIndex, BulkIndex]:
    m = structure.materials
    return (gap_bulk_index(structure.cell_a, m, gap.gap_a),
            gap_bulk_index(structure.cell_b, m, gap.gap_b))


def find_interface_mode(structure: Structure, gap: GapIntersection, n_samples: int = N_UNIQUE,
                        eta_edge: float = ETA_EDGE):
    """Interface-mode frequency inside a common gap, or NoMode.

    For mirror-symmetric cells the bulk indices decide existence and the root
    must be unique.  Otherwise every sign change of W is reported as a
    candidate (``unique=False``) and no uniqueness is claimed.
    """
    if not structure.mirror_symmetric:
        roots = interface_candidates(structure, gap, n_samples)
        if not roots:
            return NoMode(gap, None, "no sign change of W in the gap (asymmetric cells)")
        return _mode_at(structure, gap, roots[0], unique=len(roots) == 1, candidates=roots)

    ja, jb = gap_bulk_indices(structure, gap)
    total = ja.value + jb.value
    if total != 0:
        return NoMode(gap, total, "bulk indices of A and B coincide", ja, jb)
    omegas = interior_samples(gap.lower, gap.upper, n_samples)
    vals, states = scan_wronskian(structure, omegas)
    idx = sign_changes(vals)
    if len(idx) > 1:
        raise MultipleRoots(f"W changes sign {len(idx)} times in [{gap.lower:.12g}, {gap.upper:.12g}]")
    if len(idx) == 0:
        # the root may sit between the outermost samples and the gap edges
        raise RootAtEdge(f"no interior sign change of W in [{gap.lower:.12g}, {gap.upper:.12g}]")
    i = int(idx[0])
    root = _refine_root(structure, states[i], states[i + 1])
    if min(root - gap.lower, gap.upper - root) < eta_edge * max(1.0, root):
        raise RootAtEdge(f"root {root:.15g} within {eta_edge:g} of a gap edge")
    return _mode_at(structure, gap, root, ja, jb)


def impedance_sum_root(structure: Structure, gap: GapIntersection, n_samples: int = N_UNIQUE) -> float:
    """Root of Z+ + Z- located from its + to - sign change (poles jump - to +)."""
    omegas = interior_samples(gap.lower, gap.upper, n_samples)
    vals = np.array([impedances(structure, w).total for w in omegas])
    down = [i for i in sign_changes(vals) if vals[i] > 0 > vals[i + 1]]
    if len(down) != 1:
        raise MultipleRoots(f"Z+ + Z- has {len(down)} descending sign changes")
    i = down[0]
    return refine(lambda w: impedances(structure, w).total, omegas[i], omegas[i + 1], ROOT_TOL)


def mode_profile(structure: Structure, omega_m: float, n_cells: int, n_per_cell: int = 0) -> dict:
    """Interface mode on cell boundaries x_n, n = -n_cells .. n_cells.

    The right half starts from B's decaying state and the left half from A's,
    scaled to share u(x0); each half therefore decays exactly geometrically.
    Returns arrays ``n``, ``x``, ``u``, ``du`` (u' taken on the side facing
    the interface) and, when ``n_per_cell`` > 0, dense samples ``x_fine``,
    ``u_fine`` and ``du_fine``.
    """
    m = structure.materials
    st = decaying_states(structure, omega_m)
    right = st.right
    left = st.left * (right @ st.left) / (st.left @ st.left)
    pa = cell_flux_matrix(structure.cell_a, m, float(omega_m))
    pb = cell_flux_matrix(structure.cell_b, m, float(omega_m))
    pa_inv = np.linalg.inv(pa)
    eps_a_last = float(m.eps(structure.cell_a.species[-1], omega_m))
    eps_b_first = float(m.eps(structure.cell_b.species[0], omega_m))

    fwd = [right]
    for _ in range(n_cells):
        fwd.append(pb @ fwd[-1])
    back = [left]
    for _ in range(n_cells):
        back.append(pa_inv @ back[-1])

    ns = np.arange(-n_cells, n_cells + 1)
    flux = np.array(back[:0:-1] + fwd)
    eps_side = np.where(ns > 0, eps_b_first, eps_a_last)
    eps_side[ns == 0] = eps_b_first
    out = {"n": ns, "x": ns.astype(float), "u": flux[:, 0], "du": flux[:, 1] * eps_side}

    if n_per_cell > 0:
        xs, us, dus = [], [], []
        local = np.linspace(0.0, 1.0, n_per_cell, endpoint=False)
        eps_a_first = float(m.eps(structure.cell_a.species[0], omega_m))
        for k in range(n_cells, 0, -1):
            s = back[k]  # flux at x = -k, start of an A cell
            u, du = sample_cell(structure.cell_a, m, omega_m, np.array([s[0], s[1] * eps_a_first]), local)
            xs.append(local - k)
            us.append(u)
            dus.append(du)
        for k in range(n_cells):
            s = fwd[k]
            u, du = sample_cell(structure.cell_b, m, omega_m, np.array([s[0], s[1] * eps_b_first]), local)
            xs.append(local + k)
            us.append(u)
            dus.append(du)
        out["x_fine"] = np.concatenate(xs + [[float(n_cells)]])
        out["u_fine"] = np.concatenate(us + [[fwd[-1][0]]])
        out["du_fine"] = np.concatenate(dus + [[fwd[-1][1] * eps_b_first]])
    return out


def decay_fit(profile: dict, side: str, first: int = 3, last: int = 10) -> float:
    """Per-cell decay factor from a log-linear fit of |u(x_n)|, |n| in [first, last]."""
    n = profile["n"]
    sel = (n >= first) & (n <= last) if side == "right" else (n <= -first) & (n >= -last)
    k = np.abs(n[sel]).astype(float)
    slope = np.polyfit(k, np.log(np.abs(profile["u"][sel])), 1)[0]
    return float(math.exp(slope))


def assert_in_gaps(structure: Structure, omega: float) -> None:
    """Raise InsideBand unless omega lies in a gap of both cells."""
    decaying_states(structure, omega)


__all__ = [
    "DecayingStates", "ImpedancePair", "InterfaceMode", "NoMode", "InsideBand",
    "decaying_states", "impedances", "wronskian", "scan_wronskian", "interior_samples",
    "interface_candidates", "gap_bulk_indices", "find_interface_mode", "impedance_sum_root",
    "mode_profile", "decay_fit",
]
