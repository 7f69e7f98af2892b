"""2x2 transfer matrices for piecewise-constant layers.

Within a layer u'' = -mu0 eps w^2 u.  Across a layer interface u and the flux
(1/eps) u' are continuous, so cell products are formed on the state
(u, u'/eps) and converted back to (u, u') at the cell's first layer.  All
functions broadcast over arrays of omega; matrices carry shape (..., 2, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsideBand
from .materials import Materials, UnitCell

ETA_EDGE = 1e-9
SERIES_CUTOFF = 1e-8

_C_COEF = np.array([1.0 / math.factorial(2 * k) for k in range(6)])
_S_COEF = np.array([1.0 / math.factorial(2 * k + 1) for k in range(6)])


def cs_functions(z):
    """C(z) = cos(sqrt z) and S(z) = sin(sqrt z)/sqrt z, continued to z < 0."""
    z = np.asarray(z, dtype=float)
    c = np.empty_like(z)
    s = np.empty_like(z)
    small = np.abs(z) < SERIES_CUTOFF
    pos = (z > 0) & ~small
    neg = (z < 0) & ~small
    if np.any(pos):
        r = np.sqrt(z[pos])
        c[pos] = np.cos(r)
        s[pos] = np.sin(r) / r
    if np.any(neg):
        r = np.sqrt(-z[neg])
        c[neg] = np.cosh(r)
        s[neg] = np.sinh(r) / r
    if np.any(small):
        powers = (-z[small])[..., None] ** np.arange(6)
        c[small] = powers @ _C_COEF
        s[small] = powers @ _S_COEF
    return c, s


def _assemble(a, b, c, d):
    out = np.empty(np.shape(a) + (2, 2))
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


def segment_matrix(length, eps, omega, mu0=1.0):
    """Propagator of (u, u') across a homogeneous segment of the given length."""
    m = mu0 * np.asarray(eps, dtype=float) * np.asarray(omega, dtype=float) ** 2
    c, s = cs_functions(m * length * length)
    return _assemble(c, length * s, -m * length * s, c)


def flux_segment_matrix(length, eps, omega, mu0=1.0):
    """Propagator of (u, u'/eps); entire in eps, so eps = 0 is harmless."""
    eps = np.asarray(eps, dtype=float)
    w2 = np.asarray(omega, dtype=float) ** 2
    with np.errstate(over="ignore", invalid="ignore"):
        c, s = cs_functions(mu0 * eps * w2 * length * length)
        return _assemble(c, eps * length * s, -mu0 * w2 * length * s, c)


def layer_permittivities(cell: UnitCell, materials: Materials, omega):
    cache = {sp: materials.eps(sp, omega) for sp in set(cell.species)}
    return [cache[sp] for sp in cell.species]


def cell_flux_matrix(cell: UnitCell, materials: Materials, omega):
    omega = np.asarray(omega, dtype=float)
    eps = layer_permittivities(cell, materials, omega)
    out = np.broadcast_to(np.eye(2), omega.shape + (2, 2)).copy()
    # deep evanescent layers next to a pole overflow to inf; read as "in a gap"
    with np.errstate(over="ignore", invalid="ignore"):
        for layer, e in zip(cell.layers, eps):
            out = flux_segment_matrix(layer.length, e, omega, materials.mu0) @ out
    return out


def flux_to_state(eps_first):
    """D such that (u, u') = D (u, u'/eps) inside the first layer."""
    e = np.asarray(eps_first, dtype=float)
    return _assemble(np.ones_like(e), np.zeros_like(e), np.zeros_like(e), e)


def cell_transfer_matrix(cell: UnitCell, materials: Materials, omega):
    """Maps (u, u') at the start of a cell to (u, u') at the start of the next.

    Both states sit just inside the cell's first layer.  The first crossed
    layer is the rightmost factor.
    """
    omega = np.asarray(omega, dtype=float)
    p = cell_flux_matrix(cell, materials, omega)
    e = np.asarray(materials.eps(cell.species[0], omega), dtype=float)
    out = p.copy()
    out[..., 0, 1] = p[..., 0, 1] / e
    out[..., 1, 0] = p[..., 1, 0] * e
    return out


def discriminant(cell: UnitCell, materials: Materials, omega):
    """f(w) = trace of the cell transfer matrix; bands where |f| <= 2."""
    p = cell_flux_matrix(cell, materials, omega)
    f = p[..., 0, 0] + p[..., 1, 1]
    return f if np.ndim(f) else float(f)


S_MATRIX = np.diag([1.0, -1.0])


def _fix_sign(v):
    k = 0 if abs(v[0]) > 0 else 1
    return v if v[k] > 0 else -v


def eigenvector(t: np.ndarray, lam) -> np.ndarray:
    """Unit eigenvector of the 2x2 matrix t for eigenvalue lam (real or complex).

    Picks the better conditioned of the two rank-one null-space formulas; no
    sign or phase convention is applied.
    """
    a, b = t[0, 0], t[0, 1]
    c, d = t[1, 0], t[1, 1]
    v1 = np.array([b, lam - a])
    v2 = np.array([lam - d, c])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class CellEigenSystem:
    lambda1: float
    lambda2: float
    v1: np.ndarray
    v2: np.ndarray
    trace: float


def eigen_system(t: np.ndarray, eta_edge: float = ETA_EDGE) -> CellEigenSystem:
    """Real eigenpairs of a unimodular matrix strictly inside a gap.

    |lambda1| < 1 < |lambda2|; eigenvectors have unit norm and first nonzero
    component positive.
    """
    t = np.asarray(t, dtype=float)
    tr = float(t[0, 0] + t[1, 1])
    if abs(tr) <= 2.0 + eta_edge:
        raise InsideBand(f"|trace|={abs(tr):.16g} <= 2 + {eta_edge:g}")
    lam2 = 0.5 * (tr + math.copysign(math.sqrt(tr * tr - 4.0), tr))
    lam1 = 1.0 / lam2
    v1 = _fix_sign(eigenvector(t, lam1))
    v2 = _fix_sign(eigenvector(t, lam2))
    return CellEigenSystem(lam1, lam2, v1, v2, tr)


def cell_eigen_system(cell: UnitCell, materials: Materials, omega: float) -> CellEigenSystem:
    return eigen_system(cell_transfer_matrix(cell, materials, float(omega)))


def sample_cell(cell: UnitCell, materials: Materials, omega: float, state0, x):
    """Propagate the state (u, u') given at x = 0+ to sample points x in [0, 1].

    Returns (u, du) arrays.  A sample lying on a layer interface takes its
    derivative from the layer facing the cell centre, which keeps mirror
    pairs x, 1 - x consistent.
    """
    x = np.asarray(x, dtype=float)
    eps = [float(e) for e in layer_permittivities(cell, materials, omega)]
    bounds = cell.boundaries
    state0 = np.asarray(state0)
    # work with the flux state, continuous through the cell
    flux = np.array([state0[0], state0[1] / eps[0]], dtype=state0.dtype if np.iscomplexobj(state0) else float)
    starts = []
    for layer, e in zip(cell.layers, eps):
        starts.append(flux)
        flux = flux_segment_matrix(layer.length, e, omega, materials.mu0) @ flux
    idx = np.searchsorted(bounds, x, side="right") - 1
    on_bound = np.isclose(x[:, None], bounds[None, :], rtol=0, atol=1e-12).any(axis=1)
    inward = np.where(x > 0.5, x - 1e-12, x + 1e-12)
    idx = np.where(on_bound, np.searchsorted(bounds, inward, side="right") - 1, idx)
    idx = np.clip(idx, 0, len(cell.layers) - 1)
    u = np.empty(x.shape, dtype=flux.dtype)
    du = np.empty(x.shape, dtype=flux.dtype)
    for i, (layer, e) in enumerate(zip(cell.layers, eps)):
        sel = idx == i
        if not np.any(sel):
            continue
        dx = np.clip(x[sel] - bounds[i], 0.0, None)
        mats = flux_segment_matrix(dx, e, omega, materials.mu0)
        st = mats @ starts[i]
        u[sel] = st[..., 0]
        du[sel] = st[..., 1] * e
    return u, du
