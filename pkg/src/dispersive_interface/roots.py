"""Bracketing helpers shared by the spectral and interface solvers."""

from __future__ import annotations

import numpy as np
from scipy.optimize import bisect


def refine(fn, a: float, b: float, rel_tol: float = 1e-12) -> float:
    """Bisection to |dw| < rel_tol * max(1, |w|) on a sign-change bracket."""
    xtol = rel_tol * max(1.0, abs(a), abs(b))
    return bisect(fn, a, b, xtol=xtol, maxiter=400)


def bisect_vec(fn, lo, hi, target, rel_tol: float = 1e-13, maxiter: int = 200):
    """Solve fn(w) = target elementwise, given brackets [lo, hi] of equal shape."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    target = np.asarray(target, dtype=float)
    s_lo = np.sign(fn(lo) - target)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        s_mid = np.sign(fn(mid) - target)
        same = s_mid == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= rel_tol * np.maximum(1.0, np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def sign_changes(values) -> np.ndarray:
    """Indices i with values[i] and values[i + 1] of strictly opposite sign."""
    v = np.asarray(values)
    return np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)
