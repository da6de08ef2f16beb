"""Deterministic quadrature oracles for the plane (d = 2) cap pairs.

These are the independent reference values the Monte Carlo estimators are
tested against.  They never touch the sampling code: the cap pair in the
plane has explicit one-dimensional vertical slices, so areas reduce to a
single quadrature and the bilinear form to a nested one,

    T(E, F) = integral over angles t of |(E + w(t)) cap F|,

with w(t) = (sin t, -cos t) sweeping the unit circle and the inner area
computed from closed-form interval overlaps.
"""

import math

import numpy as np


def _e_slice(x1: np.ndarray, r: float, rho: float):
    """Vertical extent of the E-side cap at abscissa x1 (vectorized).

    Returns (lo, hi, valid): the cap's slice is the single interval
    lo < x2 < hi whenever |x1| < r.
    """
    x1 = np.asarray(x1, dtype=float)
    valid = np.abs(x1) < r
    outer2 = (1.0 + rho) ** 2 - x1 ** 2
    inner2 = (1.0 - rho) ** 2 - x1 ** 2
    hi = np.sqrt(np.maximum(outer2, 0.0)) - 1.0
    lo = np.where(inner2 > 0.0, np.sqrt(np.maximum(inner2, 0.0)) - 1.0, -1.0)
    valid &= outer2 > 0.0
    return lo, hi, valid


def _f_slice(y1: np.ndarray, r: float, rho: float):
    """Vertical extent of the F-side cap at abscissa y1 (vectorized)."""
    y1 = np.asarray(y1, dtype=float)
    w = rho / r
    valid = np.abs(y1) < w
    outer2 = (1.0 + rho) ** 2 - y1 ** 2
    inner2 = (1.0 - rho) ** 2 - y1 ** 2
    lo = -np.sqrt(np.maximum(outer2, 0.0))
    hi = np.where(inner2 > 0.0, -np.sqrt(np.maximum(inner2, 0.0)), 0.0)
    valid &= outer2 > 0.0
    return lo, hi, valid


def measure_e_quad(r: float, rho: float, n: int = 1 << 15) -> float:
    """Area of the plane E-side cap by midpoint quadrature of slice lengths."""
    x1 = (np.arange(n) + 0.5) / n * (2.0 * r) - r
    lo, hi, valid = _e_slice(x1, r, rho)
    length = np.where(valid, np.maximum(hi - lo, 0.0), 0.0)
    return float(np.sum(length) * (2.0 * r / n))


def measure_f_quad(r: float, rho: float, n: int = 1 << 15) -> float:
    """Area of the plane F-side cap."""
    w = rho / r
    y1 = (np.arange(n) + 0.5) / n * (2.0 * w) - w
    lo, hi, valid = _f_slice(y1, r, rho)
    length = np.where(valid, np.maximum(hi - lo, 0.0), 0.0)
    return float(np.sum(length) * (2.0 * w / n))


def t_form_quad(r: float, rho: float, n_angle: int = 1 << 12,
                n_abscissa: int = 1 << 12) -> float:
    """T(E, F) for the plane cap pair by nested midpoint quadrature.

    The outer rule sweeps the unit circle; the inner rule integrates, over
    the F-side abscissa, the overlap length of the two vertical slices.
    """
    w_f = min(rho / r, 1.0 + rho)
    y1 = (np.arange(n_abscissa) + 0.5) / n_abscissa * (2.0 * w_f) - w_f
    dy = 2.0 * w_f / n_abscissa
    f_lo, f_hi, f_ok = _f_slice(y1, r, rho)
    angles = (np.arange(n_angle) + 0.5) / n_angle * (2.0 * math.pi) - math.pi
    dt = 2.0 * math.pi / n_angle
    total = 0.0
    max_w1 = min(1.0, r + rho / r)
    for t in angles:
        w1 = math.sin(t)
        w2 = -math.cos(t)
        if abs(w1) >= max_w1 + dy:
            continue
        x1 = y1 - w1
        e_lo, e_hi, e_ok = _e_slice(x1, r, rho)
        lo = np.maximum(f_lo, e_lo + w2)
        hi = np.minimum(f_hi, e_hi + w2)
        overlap = np.where(f_ok & e_ok, np.maximum(hi - lo, 0.0), 0.0)
        total += float(np.sum(overlap)) * dy
    return total * dt


def cap_arc_length(chord: float) -> float:
    """Arc length of {w in S^1 : |w - c| < chord} for a unit vector c."""
    return 4.0 * math.asin(min(chord, 2.0) / 2.0)
