"""Bracketing bisection on monotone predicates."""

import math


class SolverError(RuntimeError):
    """Root bracket could not be established or bisection did not converge."""

    def __init__(self, message, bracket=None):
        super().__init__(message if bracket is None else f"{message} (bracket={bracket})")
        self.bracket = bracket


def leftmost_true(pred, start, step, lower=-math.inf, upper=math.inf, xtol=1e-12,
                  max_expand=200, max_iter=400):
    """Left-most point where a nondecreasing boolean predicate turns true.

    Starting from ``start``, the bracket is grown geometrically (step, 2*step,
    ...) until ``pred(lo)`` is false and ``pred(hi)`` is true, clipped to
    ``[lower, upper]``. Returns ``hi`` after bisection to ``xtol``, i.e. a point
    where the predicate holds that is within ``xtol`` of the switch.

    Returns ``lower`` if the predicate already holds there and ``math.inf`` if
    it never holds below ``upper``.
    """
    lo = hi = start
    w = step
    if pred(start):
        for _ in range(max_expand):
            lo = max(start - w, lower)
            if not pred(lo):
                break
            if lo == lower:
                return lower
            hi = lo
            w *= 2.0
        else:
            return -math.inf
    else:
        for _ in range(max_expand):
            hi = min(start + w, upper)
            if pred(hi):
                break
            if hi == upper:
                return math.inf
            lo = hi
            w *= 2.0
        else:
            return math.inf

    for _ in range(max_iter):
        if hi - lo <= xtol:
            return hi
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return hi
        if pred(mid):
            hi = mid
        else:
            lo = mid
    raise SolverError("bisection did not converge", (lo, hi))
