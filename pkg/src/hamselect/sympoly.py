"""Elementary symmetric polynomials of likelihood ratios, in log space.

``e_m(L) = sum over |S| = m of prod_{i in S} L_i``. The engine works on
``log L`` and accumulates with log-sum-exp, so ratios spanning hundreds of
nats neither overflow nor underflow; ``-inf`` entries (a zero ratio) simply
drop out of every product they appear in.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import kernels

BRUTE_FORCE_MAX_D = 22


def _as_log_weights(logL) -> np.ndarray:
    v = np.asarray(logL, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("log-weight vector must be one-dimensional")
    if v.size < 2:
        raise ValueError("log-weight vector needs length >= 2")
    if np.isnan(v).any() or np.isposinf(v).any():
        raise ValueError("log-weights must be finite or -inf")
    return v


def log_elem_sym(logL, m: int) -> float:
    """``log e_m(exp(logL))`` by the prefix recurrence ``e_j <- e_j + L_i e_{j-1}``."""
    v = _as_log_weights(logL)
    if not 0 <= m <= v.size:
        raise ValueError(f"order m={m} outside [0, {v.size}]")
    if m == 0:
        return 0.0
    return float(kernels.log_esym_rows(v[None, :], m)[0, m])


def log_elem_sym_excluding(logL, m: int, j: int) -> float:
    """``log e_m`` of the vector with entry ``j`` (0-based) removed.

    Recomputed from scratch on the reduced vector; never obtained by
    dividing ``L_j`` out of the full polynomial.
    """
    v = _as_log_weights(logL)
    d = v.size
    if not 0 <= j < d:
        raise IndexError(f"index j={j} outside [0, {d - 1}]")
    if not 0 <= m <= d - 1:
        raise ValueError(f"order m={m} outside [0, {d - 1}]")
    if m == 0:
        return 0.0
    rest = np.delete(v, j)
    return float(kernels.log_esym_rows(rest[None, :], m)[0, m])


def brute_force_elem_sym(L, m: int) -> float:
    """Sum over all ``C(d, m)`` subsets in direct arithmetic (oracle)."""
    vals = [float(x) for x in L]
    d = len(vals)
    if d > BRUTE_FORCE_MAX_D:
        raise ValueError(f"brute force refused for d={d} > {BRUTE_FORCE_MAX_D}")
    if not 0 <= m <= d:
        raise ValueError(f"order m={m} outside [0, {d}]")
    if any(x < 0 for x in vals):
        raise ValueError("entries must be nonnegative")
    return math.fsum(math.prod(c) for c in itertools.combinations(vals, m))
