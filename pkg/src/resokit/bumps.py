"""Smooth cutoff primitives built from the exp(-1/x) mollifier.

Every cutoff in the package (dyadic bumps, radial bumps, symbol blends,
resonance partitions) is assembled from the single C-infinity step below so
that supports are hard (exactly 0 / exactly 1 outside the transition) and
derivatives are available in closed form.
"""

from __future__ import annotations

import numpy as np


def _mollifier(x: np.ndarray) -> np.ndarray:
    """exp(-1/x) for x > 0, identically 0 for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def _mollifier_prime(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(divide="ignore", over="ignore"):
        xp = x[pos]
        out[pos] = np.exp(-1.0 / xp) / xp**2
    return out


def smoothstep(x) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, strictly monotone between."""
    x = np.asarray(x, dtype=float)
    a = _mollifier(x)
    b = _mollifier(1.0 - x)
    return a / (a + b + (a + b == 0.0))


def smoothstep_prime(x) -> np.ndarray:
    """Derivative of :func:`smoothstep`; hard zero outside (0, 1)."""
    x = np.asarray(x, dtype=float)
    a = _mollifier(x)
    b = _mollifier(1.0 - x)
    ap = _mollifier_prime(x)
    bp = _mollifier_prime(1.0 - x)
    den = (a + b) ** 2
    den = den + (den == 0.0)
    return (ap * b + a * bp) / den


def ramp(r, lo: float, hi: float) -> np.ndarray:
    """0 for r <= lo, 1 for r >= hi, smooth in between. Requires lo < hi."""
    return smoothstep((np.asarray(r, dtype=float) - lo) / (hi - lo))


def ramp_prime(r, lo: float, hi: float) -> np.ndarray:
    return smoothstep_prime((np.asarray(r, dtype=float) - lo) / (hi - lo)) / (hi - lo)
