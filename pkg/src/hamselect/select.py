"""Selectors mapping observations or log-likelihood ratios to support patterns.

Indices are 0-based. Ties are broken towards the smaller index wherever an
ordering is involved, and every selector reports whether a tie was hit.
Row-batched variants (``*_rows``) operate on ``(R, d)`` arrays and are what
the Monte Carlo engine calls.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import dist, kernels
from .bounds import TwoPointModel
from .dist import DomainError
from .sympoly import brute_force_elem_sym

# Log-domain slack for the Bayes comparison ``A >= B``; exact equalities
# (symmetric inputs) otherwise flip on the last bit of rounding.
BAYES_LOG_TOL = 1e-12
BAYES_REL_TOL = 1e-12
BRUTE_FORCE_MAX_D = 20


@dataclass(frozen=True, eq=False)
class Selection:
    """A binary support pattern plus tie diagnostics."""

    bits: np.ndarray
    tie_flag: bool = False
    d: int = field(init=False)

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 1 or not np.isin(b, (0, 1)).all():
            raise ValueError("bits must be a 0/1 vector")
        object.__setattr__(self, "bits", b.astype(np.uint8))
        object.__setattr__(self, "tie_flag", bool(self.tie_flag))
        object.__setattr__(self, "d", int(b.size))

    @property
    def selected_count(self) -> int:
        return int(self.bits.sum())

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, Selection):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"Selection(bits={self.bits.tolist()}, tie_flag={self.tie_flag})"


def canonical_truth(d: int, s: int) -> np.ndarray:
    """``(1, ..., 1, 0, ..., 0)`` with ``s`` leading ones."""
    e = np.zeros(d, dtype=np.uint8)
    e[:s] = 1
    return e


def _vector(x, name="input") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if np.isnan(v).any():
        raise ValueError(f"{name} contains NaN")
    return v


def _log_weights(logL) -> np.ndarray:
    v = _vector(logL, "logL")
    if v.size < 2:
        raise ValueError("need d >= 2")
    if np.isposinf(v).any():
        raise ValueError("logL must be finite or -inf")
    return v


def _check_s(s, d, lo=1):
    if int(s) != s or not lo <= s < d:
        raise DomainError(f"need {lo} <= s < d, got s={s}, d={d}")
    return int(s)


# -- separable ---------------------------------------------------------------

def separable_rows(spec, X, d, s):
    """``log f1/f0 (X) >= log((d - s)/s)`` entry-wise; returns (bits, tie)."""
    level = math.log((d - s) / s)
    lr = np.asarray(dist.log_lr(spec, X))
    return (lr >= level).astype(np.uint8), (lr == level).any(axis=-1)


def separable_select(model: TwoPointModel, X) -> Selection:
    x = _vector(X, "X")
    if x.size != model.d:
        raise ValueError(f"X has length {x.size}, model expects d={model.d}")
    bits, tie = separable_rows(model.spec, x, model.d, model.s)
    return Selection(bits, bool(tie))


# -- scan ---------------------------------------------------------------------

def scan_rows(V, s):
    return kernels.scan_rows(np.ascontiguousarray(V, dtype=np.float64), int(s))


def scan_select_lr(logL, s: int) -> Selection:
    """The ``s`` largest log-ratios; among equal values the smaller index wins."""
    v = _log_weights(logL)
    s = _check_s(s, v.size)
    bits, tie = scan_rows(v[None, :], s)
    return Selection(bits[0], bool(tie[0]))


def scan_select_obs(X, s: int) -> Selection:
    """Scan on raw observations, equivalent to :func:`scan_select_lr` under MLR."""
    v = _vector(X, "X")
    s = _check_s(s, v.size)
    bits, tie = scan_rows(v[None, :], s)
    return Selection(bits[0], bool(tie[0]))


# -- Bayes --------------------------------------------------------------------

def bayes_margins(logL, s):
    """Row-wise ``A_j = log L_j e_{s-1}(L_{-j})`` and ``B_j = log e_s(L_{-j})``."""
    return kernels.bayes_margins_rows(np.ascontiguousarray(np.atleast_2d(logL),
                                                           dtype=np.float64), int(s))


def bayes_rows(logL, s):
    A, B = bayes_margins(logL, s)
    both_zero = np.isneginf(A) & np.isneginf(B)
    with np.errstate(invalid="ignore"):
        gap = A - B
    close = both_zero | (np.abs(gap) <= BAYES_LOG_TOL)
    bits = (close | (gap > 0)).astype(np.uint8)
    return bits, close.any(axis=1)


def bayes_select_s1(logL) -> Selection:
    """Select ``j`` iff ``L_j >= sum of the other ratios``."""
    v = _log_weights(logL)
    bits, tie = bayes_rows(v[None, :], 1)
    return Selection(bits[0], bool(tie[0]))


def bayes_select(logL, s: int) -> Selection:
    """Bayes selector under the uniform prior on size-``s`` supports.

    Coordinate ``j`` is kept iff ``L_j e_{s-1}(L_{-j}) >= e_s(L_{-j})``, i.e.
    iff its posterior inclusion probability is at least one half. The
    selected count need not equal ``s``. ``s = 1`` gives the same rule as
    :func:`bayes_select_s1`.
    """
    v = _log_weights(logL)
    s = _check_s(s, v.size)
    bits, tie = bayes_rows(v[None, :], s)
    return Selection(bits[0], bool(tie[0]))


def posterior_marginals(logL, s: int) -> np.ndarray:
    """Posterior inclusion probabilities; they sum to ``s``."""
    v = _log_weights(logL)
    s = _check_s(s, v.size)
    A, B = bayes_margins(v[None, :], s)
    with np.errstate(invalid="ignore"):
        p = np.exp(A - np.logaddexp(A, B))[0]
    return np.nan_to_num(p, nan=0.0)


def bayes_select_bruteforce(L, s: int) -> Selection:
    """Reference implementation of :func:`bayes_select` by subset enumeration."""
    vals = [float(x) for x in L]
    d = len(vals)
    if d > BRUTE_FORCE_MAX_D:
        raise ValueError(f"brute force refused for d={d} > {BRUTE_FORCE_MAX_D}")
    if any(not (x > 0 and math.isfinite(x)) for x in vals):
        raise ValueError("ratios must be positive and finite")
    s = _check_s(s, d)
    bits = np.zeros(d, dtype=np.uint8)
    tie = False
    for j in range(d):
        rest = vals[:j] + vals[j + 1:]
        lhs = vals[j] * brute_force_elem_sym(rest, s - 1)
        rhs = brute_force_elem_sym(rest, s)
        close = abs(lhs - rhs) <= BAYES_REL_TOL * max(lhs, rhs)
        tie |= close
        bits[j] = close or lhs > rhs
    return Selection(bits, tie)


# -- thresholds -----------------------------------------------------------------

def threshold_select(X, lam: float) -> Selection:
    """Keep ``j`` iff ``X_j > lam`` (strict)."""
    x = _vector(X, "X")
    return Selection((x > lam).astype(np.uint8), bool((x == lam).any()))


def _at_least(x, t):
    return Selection((x >= t).astype(np.uint8), bool((x == t).any()))


def lighttail_threshold(nu: float, sigma: float, x: float) -> float:
    """``sigma (nu log x + nu log log x)^(1/nu)`` for ``x > e``."""
    if not x > math.e:
        raise DomainError(f"need x > e, got {x}")
    if nu < 1 or sigma <= 0:
        raise DomainError("need nu >= 1 and sigma > 0")
    lx = math.log(x)
    return sigma * (nu * lx + nu * math.log(lx)) ** (1.0 / nu)


def lighttail_select(X, nu: float, sigma: float, x: float) -> Selection:
    """Keep ``j`` iff ``X_j >= lighttail_threshold(nu, sigma, x)``."""
    return _at_least(_vector(X, "X"), lighttail_threshold(nu, sigma, x))


def group_threshold(sigma: float, k: float, log_factor: float) -> float:
    """``sigma^2 (k + 4 L + 4 sqrt(k L))`` with ``L = log_factor``."""
    if not log_factor > 0:
        raise DomainError(f"log_factor must be positive, got {log_factor}")
    if k < 1 or sigma <= 0:
        raise DomainError("need k >= 1 and sigma > 0")
    return sigma ** 2 * (k + 4.0 * log_factor + 4.0 * math.sqrt(k * log_factor))


def group_select(norms2, sigma: float, k: float, log_factor: float) -> Selection:
    """Keep column ``j`` iff its squared norm is ``>= group_threshold(...)``."""
    return _at_least(_vector(norms2, "norms2"), group_threshold(sigma, k, log_factor))


# -- diagnostics ----------------------------------------------------------------

def exclusion_bound_sides(rest, s: int) -> tuple[float, float]:
    """``(e_s(rest), r_(s) * e_{s-1}(rest))`` with ``r_(s)`` the s-th largest entry.

    A strict ``lhs > rhs`` would confine the Bayes support to the top-``s``
    set; ``rest = (3, 2, 1)``, ``s = 2`` gives ``(11, 12)``.
    """
    vals = sorted((float(x) for x in rest), reverse=True)
    if not 1 <= s <= len(vals):
        raise DomainError(f"need 1 <= s <= {len(vals)}")
    return brute_force_elem_sym(vals, s), vals[s - 1] * brute_force_elem_sym(vals, s - 1)


def within_top_set(logL, s: int) -> bool:
    """Whether the Bayes support lies inside the scan (top-``s``) support."""
    b = bayes_select(logL, s).bits
    top = scan_select_lr(logL, s).bits
    return bool(np.all(b <= top))


def subsets_posterior(L, s: int) -> np.ndarray:
    """Posterior marginals by enumerating all size-``s`` subsets (oracle)."""
    vals = np.asarray(L, dtype=np.float64)
    d = vals.size
    if d > BRUTE_FORCE_MAX_D:
        raise ValueError(f"enumeration refused for d={d}")
    num = np.zeros(d)
    total = 0.0
    for c in itertools.combinations(range(d), s):
        w = float(np.prod(vals[list(c)]))
        total += w
        num[list(c)] += w
    return num / total
