"""Risk functionals, recovery conditions and phase-transition thresholds.

Everything here is deterministic: closed forms plus bisection on monotone
residuals. Throughout, MLR lets the best separable selector be written as a
cut ``X >= x*`` on the observation axis.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import dist
from ._solve import SolverError, leftmost_true
from .dist import ALT, NULL, DistributionSpec, DomainError

__all__ = [
    "TwoPointModel", "BoundsReport", "SolverError", "psi_sep", "psi", "solve_t1",
    "solve_t2", "psi_t1_lower_bound", "block_lower", "exact_recovery_blocked",
    "lighttail_thresholds", "group_thresholds", "chi2_tail_bounds", "bounds_report",
]

ROOT_XTOL = 1e-12
T2_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class TwoPointModel:
    """``d`` independent observations, ``s`` of them drawn from the alternative.

    ``diagnostic=True`` admits ``a = 0`` (identical laws), which is useful only
    for exchangeability checks.
    """

    spec: DistributionSpec
    d: int
    s: int
    diagnostic: bool = False

    def __post_init__(self):
        if int(self.d) != self.d or int(self.s) != self.s:
            raise DomainError("d and s must be integers")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "s", int(self.s))
        if self.d <= 2:
            raise DomainError(f"need d > 2, got d={self.d}")
        if not 1 <= self.s < self.d:
            raise DomainError(f"need 1 <= s < d, got s={self.s}, d={self.d}")
        if self.spec.a == 0 and not self.diagnostic:
            raise DomainError("null and alternative coincide (a = 0); "
                              "pass diagnostic=True to allow it")

    def truth(self) -> np.ndarray:
        """The canonical pattern ``(1, ..., 1, 0, ..., 0)`` with ``s`` ones."""
        e = np.zeros(self.d, dtype=np.uint8)
        e[:self.s] = 1
        return e

    def reduced(self) -> "TwoPointModel":
        """The ``(d - 1, s - 1)`` model."""
        return TwoPointModel(self.spec, self.d - 1, self.s - 1, self.diagnostic)


def _start(spec: DistributionSpec) -> tuple[float, float]:
    if spec.kind == "chi2":
        s2 = spec.sigma ** 2
        return s2 * spec.k, s2 * max(1.0, math.sqrt(2.0 * spec.k))
    return 0.5 * spec.a, spec.sigma


def lr_cut(spec: DistributionSpec, log_level: float) -> float:
    """Left-most ``x`` with ``log f1/f0 (x) >= log_level``.

    Returns the lower support end if the ratio already exceeds the level
    there and ``+inf`` if it never reaches it.
    """
    x0, step = _start(spec)

    def above(v):
        return float(dist.log_lr_unchecked(spec, np.array([v]))[0]) >= log_level

    return leftmost_true(above, x0, step, lower=spec.support_lower, xtol=ROOT_XTOL)


def _weighted_errors(spec, n_alt, n_null, x):
    """``n_alt * P1(X < x) + n_null * P0(X >= x)`` for a continuous pair."""
    return n_alt * dist.cdf(spec, ALT, x) + n_null * dist.sf(spec, NULL, x)


def psi_sep(model: TwoPointModel) -> float:
    """Hamming risk of the best separable selector ``s f1 >= (d - s) f0``."""
    d, s = model.d, model.s
    cut = lr_cut(model.spec, math.log((d - s) / s))
    return float(_weighted_errors(model.spec, s, d - s, cut))


def _need_s2(model):
    if model.s < 2:
        raise DomainError("this quantity needs s >= 2")


def psi(model: TwoPointModel, x) -> float:
    """``(s - 1) F1(x) + (d - s) (1 - F0(x))``."""
    _need_s2(model)
    return _wrap(x, _weighted_errors(model.spec, model.s - 1, model.d - model.s, x))


def _wrap(x, out):
    return float(out) if np.ndim(x) == 0 else np.asarray(out)


def solve_t1(model: TwoPointModel) -> float:
    """Root of ``(s - 1) F1(x) = (d - s) (1 - F0(x))``; the residual is increasing."""
    _need_s2(model)
    spec, d, s = model.spec, model.d, model.s
    x0, step = _start(spec)

    def nonneg(v):
        return (s - 1) * dist.cdf(spec, ALT, v) - (d - s) * dist.sf(spec, NULL, v) >= 0.0

    t1 = leftmost_true(nonneg, x0, step, lower=spec.support_lower, xtol=ROOT_XTOL)
    if not math.isfinite(t1):
        raise SolverError("no sign change for the t1 residual", (x0, step))
    return t1


def solve_t2(model: TwoPointModel) -> float | None:
    """Root of ``(s - 1) f1(x) = (d - s) f0(x)``, or ``None`` when none exists."""
    _need_s2(model)
    level = math.log((model.d - model.s) / (model.s - 1))
    cut = lr_cut(model.spec, level)
    if not math.isfinite(cut):
        return None
    resid = float(dist.log_lr_unchecked(model.spec, np.array([cut]))[0]) - level
    if abs(resid) > T2_RESIDUAL_TOL:
        return None
    return cut


def psi_t1_lower_bound(model: TwoPointModel) -> tuple[float, bool]:
    """``(psi(t1) / 20, applicable)``; applicable iff s <= (d + 2)/3 and psi(t1) >= 24."""
    _need_s2(model)
    value = psi(model, solve_t1(model))
    applicable = model.s <= (model.d + 2) / 3 and value >= 24.0
    return value / 20.0, bool(applicable)


def block_lower(model: TwoPointModel) -> float:
    """Block-prior bound ``(1 - 1/e) s F1(F0^{-1}(1 - 1/(floor(d/s) - 1)))``."""
    d, s = model.d, model.s
    m = d // s
    if not (s < d / 2 and m >= 3):
        raise DomainError(f"block bound needs s < d/2 and floor(d/s) >= 3 (d={d}, s={s})")
    q = dist.quantile(model.spec, NULL, 1.0 - 1.0 / (m - 1))
    return (1.0 - math.exp(-1.0)) * s * dist.cdf(model.spec, ALT, q)


def exact_recovery_blocked(model: TwoPointModel) -> bool:
    """True iff ``F0^{-1}(1 - 1/(d - s)) > F1^{-1}(1/s)``.

    In that case no selector recovers the support with probability above
    ``1 - (1 - 1/e)^2``.
    """
    d, s = model.d, model.s
    q0 = -math.inf if d - s == 1 else dist.quantile(model.spec, NULL, 1.0 - 1.0 / (d - s))
    q1 = math.inf if s == 1 else dist.quantile(model.spec, ALT, 1.0 / s)
    return bool(q0 > q1)


def lighttail_thresholds(nu: float, sigma: float, d: int, s: int) -> tuple[float, float]:
    """Critical amplitudes ``(a_exact, a_almost)`` for Subbotin-type noise."""
    if nu < 1 or sigma <= 0:
        raise DomainError("need nu >= 1 and sigma > 0")
    if not (s >= 1 and d - s >= 2 and d / s > 1):
        raise DomainError(f"degenerate sizes d={d}, s={s}")
    a_exact = sigma * ((nu * math.log(d - s)) ** (1 / nu) + (nu * math.log(s)) ** (1 / nu))
    a_almost = sigma * (nu * math.log(d / s)) ** (1 / nu)
    return a_exact, a_almost


def group_thresholds(sigma: float, k: int, d: int, s: int) -> tuple[float, float]:
    """Sufficient squared column norms ``(a2_exact, a2_almost)`` for group selection."""
    if sigma <= 0 or k < 1 or d < 2:
        raise DomainError("need sigma > 0, k >= 1, d >= 2")
    if not d / s > 1:
        raise DomainError("almost-full threshold needs d/s > 1")

    def level(lf):
        return sigma ** 2 * (16.0 * math.sqrt(k * lf) + 80.0 * lf)

    return level(math.log(d)), level(math.log(d / s))


class Chi2TailThresholds(NamedTuple):
    """Deviation levels for chi-square tail inequalities at level ``exp(-x)``.

    ``P(chi2_k <= lower) <= e^-x``; ``P(chi2_k >= upper_central) >= c4 e^-x``;
    ``P(chi2_k(B^2) >= upper_noncentral) <= e^-x``.
    """

    lower: float
    upper_central: float
    upper_noncentral: float
    c4: float


def chi2_tail_bounds(k: int, x: float, B: float = 0.0, c3: float = 4.0,
                     c4: float = 0.02) -> Chi2TailThresholds:
    if x <= 0 or k < 1 or B < 0:
        raise DomainError("need x > 0, k >= 1, B >= 0")
    lower = k - 2.0 * math.sqrt(k * x)
    central = k + c3 * max(x, math.sqrt(k * x))
    noncentral = k + B ** 2 + 2.0 * math.sqrt((k + 2.0 * B ** 2) * x) + 2.0 * x
    return Chi2TailThresholds(lower, central, noncentral, c4)


@dataclass(frozen=True)
class BoundsReport:
    psi_sep: float
    t1: float
    t2: float
    psi_t1: float
    psi_t2: float
    theorem8_applicable: bool
    theorem8_lower: float
    block_lower: float
    exact_recovery_blocked: bool

    def as_dict(self) -> dict:
        return asdict(self)


def bounds_report(model: TwoPointModel) -> BoundsReport:
    """All bound quantities for one model; undefined entries are NaN."""
    nan = math.nan
    t1 = t2 = psi_t1 = psi_t2 = lower8 = nan
    applicable = False
    if model.s >= 2:
        t1 = solve_t1(model)
        psi_t1 = psi(model, t1)
        root = solve_t2(model)
        if root is not None:
            t2 = root
            psi_t2 = psi(model, t2)
        lower8, applicable = psi_t1 / 20.0, model.s <= (model.d + 2) / 3 and psi_t1 >= 24.0
    try:
        blk = block_lower(model)
    except DomainError:
        blk = nan
    return BoundsReport(
        psi_sep=psi_sep(model), t1=t1, t2=t2, psi_t1=psi_t1, psi_t2=psi_t2,
        theorem8_applicable=bool(applicable), theorem8_lower=lower8,
        block_lower=blk, exact_recovery_blocked=exact_recovery_blocked(model),
    )
