"""Hoyer sparseness measure and the projection onto a fixed sparseness level.

The projection follows Hoyer (2004), "Non-negative matrix factorization
with sparseness constraints": the closest non-negative vector with a
prescribed L1 and L2 norm is found by alternating between the L1
hyperplane and the L2 sphere, zeroing coordinates that turn negative.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInput, LengthOne, ZeroVector


def hoyer_sparsity(v) -> float:
    """``(sqrt(n) - |v|_1 / |v|_2) / (sqrt(n) - 1)``, in [0, 1]."""
    v = np.asarray(v, dtype=float).ravel()
    n = v.size
    if n < 2:
        raise LengthOne("sparseness is undefined for vectors of length < 2")
    l2 = float(np.linalg.norm(v))
    if l2 == 0.0:
        raise ZeroVector("sparseness is undefined for the zero vector")
    l1 = float(np.abs(v).sum())
    sn = math.sqrt(n)
    return (sn - l1 / l2) / (sn - 1.0)


def project_sparsity(v, target: float) -> np.ndarray:
    """Closest non-negative vector to ``v`` with the same L2 norm and a
    Hoyer sparseness of ``target``.
    """
    v = np.asarray(v, dtype=float).ravel()
    n = v.size
    if n < 2:
        raise LengthOne("cannot project a vector of length < 2")
    if not 0.0 <= target <= 1.0:
        raise InvalidInput(f"sparsity target {target} outside [0, 1]")
    l2 = float(np.linalg.norm(v))
    if l2 == 0.0:
        raise ZeroVector("cannot project the zero vector")
    sn = math.sqrt(n)
    l1 = l2 * (sn - target * (sn - 1.0))
    return _project_l1_l2(v, l1, l2)


def _project_l1_l2(x: np.ndarray, l1: float, l2: float) -> np.ndarray:
    n = x.size
    s = x + (l1 - x.sum()) / n
    zeroed = np.zeros(n, dtype=bool)
    l2sq = l2 * l2
    # each pass zeroes at least one more coordinate
    for _ in range(n):
        free = ~zeroed
        k = int(free.sum())
        m = np.where(free, l1 / k, 0.0)
        d = s - m
        a = float(d @ d)
        b = 2.0 * float(m @ d)
        c = float(m @ m) - l2sq
        if a <= 1e-24 * l2sq:
            # s sits at the centre of the face, every feasible point is equally
            # close; break the tie with a centred ramp over the free coordinates
            if k < 2:
                break
            d = np.zeros(n)
            d[free] = np.arange(k) - (k - 1) / 2.0
            a = float(d @ d)
            b = 0.0
        disc = max(b * b - 4.0 * a * c, 0.0)
        alpha = (-b + math.sqrt(disc)) / (2.0 * a)
        s = m + alpha * d
        if s.min() >= 0.0:
            break
        zeroed |= s < 0.0
        s[zeroed] = 0.0
        free = ~zeroed
        if not free.any():
            break
        s[free] -= (s.sum() - l1) / int(free.sum())
    np.maximum(s, 0.0, out=s)
    return s
