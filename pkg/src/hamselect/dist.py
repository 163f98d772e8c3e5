"""Null/alternative distribution pairs: densities, CDFs, quantiles, samplers.

Three families are supported, each a pair ``(f0, f1)`` on the real line:

``gaussian``
    ``N(0, sigma^2)`` against ``N(a, sigma^2)``.
``subbotin``
    Generalised normal with density proportional to ``exp(-|x/sigma|^nu / nu)``,
    null centred at 0 and alternative at ``a``.
``chi2``
    ``sigma^2 * chi2_k`` against ``sigma^2 * chi2_k(lam)`` with noncentrality
    ``lam = (a / sigma)^2``; this is the law of a squared column norm
    ``||theta_j + sigma * xi_j||^2`` with ``||theta_j|| = a``.

Sides are encoded as integers, ``NULL = 0`` and ``ALT = 1``, so a support
pattern can be passed wherever a side is expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from . import kernels
from ._solve import leftmost_true

NULL = 0
ALT = 1
FAMILIES = ("gaussian", "subbotin", "chi2")

QUANTILE_XTOL = 1e-10
MLR_TOL = 1e-12
NCX2_TAIL_MASS = 1e-14


class DomainError(ValueError):
    """Argument outside the domain of a distribution operation."""


@dataclass(frozen=True)
class DistributionSpec:
    """A null/alternative pair from one of :data:`FAMILIES`.

    ``a`` is always the signal amplitude in units of X (for ``chi2`` the
    column norm, so the noncentrality is ``a**2`` when ``sigma = 1``).
    """

    kind: str
    a: float = 0.0
    sigma: float = 1.0
    nu: float = 2.0
    k: int = 1

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise DomainError(f"unknown family {self.kind!r}; expected one of {FAMILIES}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError("sigma must be positive")
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise DomainError("amplitude a must be nonnegative")
        if self.nu < 1:
            raise DomainError("Subbotin shape nu must be >= 1")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError("degrees of freedom k must be a positive integer")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "nu", float(self.nu))

    @property
    def noncentrality(self) -> float:
        return (self.a / self.sigma) ** 2

    @property
    def support_lower(self) -> float:
        return 0.0 if self.kind == "chi2" else -math.inf

    def with_amplitude(self, a: float) -> "DistributionSpec":
        return replace(self, a=a)


def gaussian(a: float, sigma: float = 1.0) -> DistributionSpec:
    return DistributionSpec("gaussian", a=a, sigma=sigma)


def subbotin(nu: float, a: float = 0.0, sigma: float = 1.0) -> DistributionSpec:
    return DistributionSpec("subbotin", a=a, sigma=sigma, nu=nu)


def chi_square(k: int, a: float | None = None, *, a2: float | None = None,
               sigma: float = 1.0) -> DistributionSpec:
    """Chi-square pair; give either the norm ``a`` or its square ``a2``."""
    if (a is None) == (a2 is None):
        raise DomainError("give exactly one of a, a2")
    if a2 is not None:
        if a2 < 0:
            raise DomainError("a2 must be nonnegative")
        a = math.sqrt(a2)
    return DistributionSpec("chi2", a=a, sigma=sigma, k=k)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------
def _side(side) -> int:
    if side in ("null", NULL):
        return NULL
    if side in ("alt", ALT):
        return ALT
    raise DomainError(f"side must be 0/'null' or 1/'alt', got {side!r}")


def _wrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _check_support(spec, x, strict=True):
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise DomainError("NaN observation")
    if spec.kind == "chi2":
        bad = x <= 0 if strict else x < 0
        if bad.any():
            raise DomainError("chi-square observations must be > 0")
    return x


def _log_subbotin_const(nu):
    return (1.0 - 1.0 / nu) * math.log(nu) - math.log(2.0) - math.lgamma(1.0 / nu)


# ---------------------------------------------------------------------------
# densities and likelihood ratios
# ---------------------------------------------------------------------------
def log_pdf(spec: DistributionSpec, side, x):
    """Log-density of the null (``side=0``) or alternative (``side=1``) law."""
    side = _side(side)
    xa = _check_support(spec, x)
    sig = spec.sigma
    if spec.kind == "gaussian":
        u = (xa - side * spec.a) / sig
        out = -0.5 * math.log(2 * math.pi) - math.log(sig) - 0.5 * u * u
    elif spec.kind == "subbotin":
        u = np.abs((xa - side * spec.a) / sig)
        out = _log_subbotin_const(spec.nu) - math.log(sig) - u ** spec.nu / spec.nu
    else:
        h = 0.5 * spec.k
        z = xa / sig ** 2
        out = ((h - 1.0) * np.log(z) - 0.5 * z - h * math.log(2.0) - math.lgamma(h)
               - 2.0 * math.log(sig))
        if side == ALT:
            out = out + _chi2_log_lr(spec, z)
    return _wrap(x, out)


def _chi2_log_lr(spec, z):
    z = np.asarray(z, dtype=np.float64)
    flat = kernels.chi2_log_lr(np.ravel(z), float(spec.k), float(spec.noncentrality))
    return flat.reshape(z.shape)


def log_lr_unchecked(spec: DistributionSpec, x):
    """``log f1(x) - log f0(x)`` without support validation (arrays only)."""
    x = np.asarray(x, dtype=np.float64)
    sig = spec.sigma
    if spec.kind == "gaussian":
        return (spec.a * x - 0.5 * spec.a ** 2) / sig ** 2
    if spec.kind == "subbotin":
        nu = spec.nu
        return (np.abs(x / sig) ** nu - np.abs((x - spec.a) / sig) ** nu) / nu
    return _chi2_log_lr(spec, np.maximum(x, 0.0) / sig ** 2)


def log_lr(spec: DistributionSpec, x):
    """Log-likelihood ratio ``log f1(x) - log f0(x)``; nondecreasing in x."""
    xa = _check_support(spec, x)
    return _wrap(x, log_lr_unchecked(spec, xa))


# ---------------------------------------------------------------------------
# distribution functions
# ---------------------------------------------------------------------------
def _ncx2_weights(lam):
    """Poisson(lam/2) log-weights truncated at tail mass NCX2_TAIL_MASS."""
    mu = 0.5 * lam
    j = max(int(mu), 0)
    while special.pdtrc(j, mu) >= NCX2_TAIL_MASS:
        j += max(1, int(math.sqrt(mu)))
    js = np.arange(j + 1, dtype=np.float64)
    logw = -mu + js * math.log(mu) - special.gammaln(js + 1.0)
    return js, logw


def _chi2_tail(spec, side, z, upper):
    h = 0.5 * spec.k
    fn = special.gammaincc if upper else special.gammainc
    lam = spec.noncentrality
    if side == NULL or lam == 0.0:
        return fn(h, 0.5 * z)
    js, logw = _ncx2_weights(lam)
    zz = np.asarray(z, dtype=np.float64)
    terms = np.exp(logw)[:, None] * fn(h + js[:, None], 0.5 * zz.reshape(1, -1))
    return terms.sum(axis=0).reshape(zz.shape)


def _dist_fn(spec, side, x, upper):
    side = _side(side)
    xa = np.asarray(x, dtype=np.float64)
    if np.isnan(xa).any():
        raise DomainError("NaN argument")
    sig = spec.sigma
    if spec.kind == "gaussian":
        u = (xa - side * spec.a) / sig
        out = special.ndtr(-u) if upper else special.ndtr(u)
    elif spec.kind == "subbotin":
        u = (xa - side * spec.a) / sig
        nu = spec.nu
        half_q = 0.5 * special.gammaincc(1.0 / nu, np.abs(u) ** nu / nu)
        if upper:
            out = np.where(u > 0, half_q, 1.0 - half_q)
        else:
            out = np.where(u < 0, half_q, 1.0 - half_q)
    else:
        z = np.maximum(xa, 0.0) / sig ** 2
        out = _chi2_tail(spec, side, z, upper)
        out = np.where(xa <= 0, 1.0 if upper else 0.0, out)
    return _wrap(x, np.asarray(out, dtype=np.float64))


def cdf(spec: DistributionSpec, side, x):
    """``P(X <= x)`` under the chosen side."""
    return _dist_fn(spec, side, x, upper=False)


def sf(spec: DistributionSpec, side, x):
    """``P(X > x)``, computed directly for accuracy in the upper tail."""
    return _dist_fn(spec, side, x, upper=True)


def _center_scale(spec, side):
    if spec.kind == "chi2":
        lam = spec.noncentrality if side == ALT else 0.0
        s2 = spec.sigma ** 2
        return s2 * (spec.k + lam), s2 * max(1.0, math.sqrt(2 * spec.k + 4 * lam))
    return side * spec.a, spec.sigma


def quantile(spec: DistributionSpec, side, p):
    """Left-most ``v`` with ``F(v) >= p``, by bracketed bisection.

    The bracket is grown geometrically from the distribution centre and then
    bisected to an absolute tolerance of 1e-10.
    """
    side = _side(side)
    if np.ndim(p) != 0:
        return np.array([quantile(spec, side, float(q)) for q in np.ravel(p)]).reshape(np.shape(p))
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    center, scale = _center_scale(spec, side)
    return leftmost_true(lambda v: cdf(spec, side, v) >= p, center, scale,
                         lower=spec.support_lower, xtol=QUANTILE_XTOL)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------
def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample(spec: DistributionSpec, side, rng=None, size=None):
    """Draw from the null or alternative law.

    ``side`` may be a scalar side or an array of 0/1 (a support pattern); in
    the latter case one draw is made per entry and ``size`` is ignored.
    Draw order within a call is fixed, so a generator in a given state always
    produces the same values.
    """
    gen = as_generator(rng)
    if np.ndim(side) == 0:
        shift = float(_side(side))
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    else:
        shift = np.asarray(side, dtype=np.float64)
        if not np.isin(shift, (0.0, 1.0)).all():
            raise DomainError("support pattern must be 0/1")
        shape = shift.shape
    sig = spec.sigma
    if spec.kind == "gaussian":
        out = spec.a * shift + sig * gen.standard_normal(shape)
    elif spec.kind == "subbotin":
        nu = spec.nu
        # Gamma(1/nu) via a Gamma(1 + 1/nu) draw and the U^(nu) boost
        g = gen.standard_gamma(1.0 + 1.0 / nu, shape) * gen.random(shape) ** nu
        sign = np.where(gen.random(shape) < 0.5, -1.0, 1.0)
        out = spec.a * shift + sig * sign * (nu * g) ** (1.0 / nu)
    else:
        z = gen.standard_normal((spec.k,) + tuple(shape))
        out = (spec.a * shift + sig * z[0]) ** 2
        if spec.k > 1:
            out = out + sig ** 2 * np.square(z[1:]).sum(axis=0)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------
def check_mlr(spec: DistributionSpec, grid) -> bool:
    """True iff the log-likelihood ratio is nondecreasing along ``grid``."""
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size < 2:
        raise DomainError("grid needs at least two points")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly increasing")
    values = np.asarray(log_lr(spec, g))
    return bool(np.all(np.diff(values) >= -MLR_TOL))


def subbotin_class_check(nu: float, grid, candidate: DistributionSpec | None = None) -> bool:
    """Check ``1 - F(u) <= exp(-u^nu/nu)`` and ``F(-u) <= exp(-u^nu/nu)`` on a grid.

    ``candidate`` is the noise law to test (its null side is used); it
    defaults to the standard Subbotin law of shape ``nu``.
    """
    if nu < 1:
        raise DomainError("nu must be >= 1")
    u = np.asarray(grid, dtype=np.float64)
    if u.size == 0 or np.any(u < 0):
        raise DomainError("grid must be nonempty with u >= 0")
    cand = candidate if candidate is not None else subbotin(nu)
    bound = np.exp(-u ** nu / nu)
    upper_ok = np.asarray(sf(cand, NULL, u)) <= bound
    lower_ok = np.asarray(cdf(cand, NULL, -u)) <= bound
    return bool(np.all(upper_ok & lower_ok))
