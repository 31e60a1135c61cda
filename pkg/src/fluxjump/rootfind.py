"""Bracketed bisection used by every inverse in the package.

Bisection is deliberately chosen over faster root finders: it is monotone,
never leaves the bracket, and its accuracy is a pure function of the iteration
count, which keeps every derived quantity reproducible bit-for-bit.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConstructionError

MAX_ITER = 200


def bisect(fn: Callable[[float], float], lo: float, hi: float,
           rtol: float = 1e-15, max_iter: int = MAX_ITER) -> float:
    """Root of ``fn`` on ``[lo, hi]`` by bisection.

    Args:
        fn: continuous function with ``fn(lo)`` and ``fn(hi)`` of opposite sign
            (either may be zero).
        lo: lower end of the bracket.
        hi: upper end of the bracket.
        rtol: stop once the bracket width is below ``rtol * max(1, |lo|, |hi|)``.
        max_iter: iteration cap.

    Returns:
        Midpoint of the final bracket.

    Raises:
        ConstructionError: if the bracket does not enclose a sign change.
    """
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ConstructionError(
            f"no bracket: fn({lo!r})={flo!r} and fn({hi!r})={fhi!r} share a sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if np.sign(flo) != np.sign(fm):
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo <= rtol * max(1.0, abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def bisect_vec(fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray,
               hi: np.ndarray, iters: int = 80) -> np.ndarray:
    """Vectorized bisection on per-component brackets.

    Args:
        fn: vectorized function; ``fn(lo)`` and ``fn(hi)`` must have opposite
            signs componentwise (zeros allowed).
        lo: lower ends (consumed, not mutated).
        hi: upper ends.
        iters: fixed iteration count (80 halvings reach ~1e-24 relative).

    Returns:
        Midpoints of the final brackets.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    slo = np.sign(fn(lo))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sm = np.sign(fn(mid))
        take_hi = sm == slo
        lo = np.where(take_hi, mid, lo)
        hi = np.where(take_hi, hi, mid)
    return 0.5 * (lo + hi)
