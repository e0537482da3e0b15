"""
Hermite Zeros
z_p, the largest zero of the probabilists' Hermite polynomial He_p: the optimal
constant in Davis' form of the Burkholder-Davis-Gundy inequality.
"""

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from intermittency.common.errors import DomainError

MAX_ORDER = 1000


def hermite_he(p: int, x: float) -> float:
    """He_p(x) via He_{k+1} = x He_k - k He_{k-1}; never expanded coefficients"""
    previous, current = 1.0, x
    if p == 0:
        return previous
    for k in range(1, p):
        previous, current = current, x * current - k * previous
    return current


def newton_correction(p: int, x: float) -> float:
    """He_p(x) / He_p'(x), computed through the ratio r_k = He_k / He_{k-1}.

    Uses He_p' = p He_{p-1}; the ratio recurrence r_{k+1} = x - k / r_k never
    overflows, unlike He_p itself at p in the hundreds.
    """
    ratio = x
    for k in range(1, p):
        ratio = x - k / ratio
    return ratio / p


def _check_order(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or p % 2 or not 2 <= p <= MAX_ORDER:
        raise DomainError(f"Hermite order must be an even integer in [2, {MAX_ORDER}], got {p}")


@lru_cache(maxsize=None)
def largest_hermite_zero(p: int) -> float:
    """Largest eigenvalue of the Jacobi matrix of He_p, polished by one Newton step"""
    _check_order(p)
    off_diagonal = np.sqrt(np.arange(1, p, dtype=float))
    z = float(eigvalsh_tridiagonal(
        np.zeros(p), off_diagonal, select="i", select_range=(p - 1, p - 1),
        lapack_driver="stebz",
    )[0])
    step = newton_correction(p, z)
    if math.isfinite(step) and abs(step) < 1e-8 * z:
        z -= step
    return z


def carlen_kree_bound(p: int) -> float:
    return 2.0 * math.sqrt(p)
