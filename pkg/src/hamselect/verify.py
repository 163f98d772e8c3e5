"""Self-checks runnable from the command line.

Each suite returns a report ``{"suite", "passed", "checks", "notes"}`` where
``checks`` lists assertable items and ``notes`` carries report-only values.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from . import bounds, dist, risklab, select, sympoly
from .bounds import TwoPointModel

SUITES = ("sympoly", "bayes", "deterministic", "identities", "chi2", "counterexamples")


class _Report:
    def __init__(self, suite):
        self.suite = suite
        self.checks = []
        self.notes = []

    def check(self, name, ok, **detail):
        self.checks.append({"name": name, "passed": bool(ok), "detail": _plain(detail)})

    def note(self, name, **detail):
        self.notes.append({"name": name, "detail": _plain(detail)})

    def done(self):
        return {"suite": self.suite, "passed": all(c["passed"] for c in self.checks),
                "checks": self.checks, "notes": self.notes}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _random_logL(rng, d, span=8.0):
    return rng.uniform(-span, span, size=d)


def suite_sympoly(seed=0, n=200):
    rep = _Report("sympoly")
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_ex = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 13))
        m = int(rng.integers(0, d + 1))
        lg = _random_logL(rng, d)
        ref = sympoly.brute_force_elem_sym(np.exp(lg), m)
        worst = max(worst, abs(math.exp(sympoly.log_elem_sym(lg, m)) / ref - 1.0))
        j = int(rng.integers(0, d))
        mx = min(m, d - 1)
        ref_ex = sympoly.brute_force_elem_sym(np.exp(np.delete(lg, j)), mx)
        got_ex = math.exp(sympoly.log_elem_sym_excluding(lg, mx, j))
        worst_ex = max(worst_ex, abs(got_ex / ref_ex - 1.0))
    rep.check("log_elem_sym vs enumeration", worst <= 1e-10, max_rel_err=worst, instances=n)
    rep.check("excluded polynomial vs enumeration", worst_ex <= 1e-10,
              max_rel_err=worst_ex, instances=n)
    big = sympoly.log_elem_sym(np.full(50, 400.0), 25)
    expected = 25 * 400.0 + math.lgamma(51) - 2 * math.lgamma(26)
    rep.check("no overflow at log-ratios of 400", abs(big - expected) < 1e-9, value=big)
    return rep.done()


def suite_bayes(seed=0, n=1000):
    rep = _Report("bayes")
    rng = np.random.default_rng(seed)
    mism_bf = mism_post = 0
    worst_sum = 0.0
    for _ in range(n):
        d = int(rng.integers(3, 13))
        s = int(rng.integers(2, d))
        lg = rng.normal(0.0, 2.0, size=d)
        b = select.bayes_select(lg, s)
        mism_bf += b != select.bayes_select_bruteforce(np.exp(lg), s)
        p = select.posterior_marginals(lg, s)
        mism_post += not np.array_equal(b.bits, (p >= 0.5).astype(np.uint8))
        worst_sum = max(worst_sum, abs(p.sum() - s))
    rep.check("matches enumeration", mism_bf == 0, mismatches=mism_bf, instances=n)
    rep.check("matches marginal >= 1/2", mism_post == 0, mismatches=mism_post)
    rep.check("marginals sum to s", worst_sum <= 1e-9, max_abs_err=worst_sum)
    return rep.done()


def suite_deterministic(seed=0, n=10_000):
    rep = _Report("deterministic")
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n):
        d = int(rng.integers(3, 30))
        s = int(rng.integers(1, d))
        X = rng.normal(size=d)
        lam = float(rng.exponential(1.0))
        eta = np.zeros(d, dtype=np.int64)
        eta[rng.choice(d, s, replace=False)] = 1
        lhs = np.abs(select.scan_select_obs(X, s).bits - eta).sum()
        rhs = np.abs(select.threshold_select(X, lam).bits - eta).sum()
        bad += lhs > 2 * rhs
    rep.check("scan loss <= 2 x threshold loss", bad == 0, exceptions=bad, draws=n)
    nest_bad = 0
    for _ in range(n):
        d = int(rng.integers(3, 15))
        s = int(rng.integers(2, d))
        lg = rng.normal(0.0, 2.0, size=d)
        bits = select.bayes_select(lg, s).bits[np.argsort(-lg, kind="stable")]
        nest_bad += bool(np.any(np.diff(bits.astype(int)) > 0))
    rep.check("Bayes support is an upper set of the ratio order", nest_bad == 0,
              exceptions=nest_bad, draws=n)
    return rep.done()


def suite_identities(seed=0, reps=20_000):
    rep = _Report("identities")
    for spec, d, s in [(dist.gaussian(2.0), 20, 4), (dist.chi_square(5, a2=30.0), 50, 5)]:
        m = TwoPointModel(spec, d, s)
        lhs, rhs = risklab.scan_risk_identity(m, reps, seed)
        se = risklab.combined_stderr(lhs, rhs)
        rep.check(f"scan risk identity ({spec.kind}, d={d}, s={s})",
                  abs(lhs.mean - rhs.mean) <= 4 * se, lhs=lhs.mean, rhs=rhs.mean, stderr=se)
    for spec in (dist.gaussian(2.0), dist.chi_square(5, a2=10.0)):
        for d, s in [(50, 5), (100, 10)]:
            m = TwoPointModel(spec, d, s)
            t1, t2 = bounds.solve_t1(m), bounds.solve_t2(m)
            p1, p2 = bounds.psi(m, t1), bounds.psi(m, t2)
            red = bounds.psi_sep(m.reduced())
            rep.check(f"psi(t2) = reduced psi_sep ({spec.kind}, d={d}, s={s})",
                      abs(p2 - red) <= 1e-8, psi_t2=p2, reduced=red)
            rep.check(f"psi(t2) <= psi(t1) <= 2 psi(t2) ({spec.kind}, d={d}, s={s})",
                      p2 <= p1 + 1e-8 and p1 <= 2 * p2 + 1e-8, psi_t1=p1, psi_t2=p2)
    return rep.done()


def chi2_tail_table(k, x, B, draws, rng, c3=4.0, c4=0.02):
    """Empirical tail frequencies against the deviation thresholds."""
    th = bounds.chi2_tail_bounds(k, x, B, c3, c4)
    central = rng.chisquare(k, draws)
    shifted = rng.noncentral_chisquare(k, B * B, draws) if B > 0 else central
    lo = float(np.mean(central <= th.lower))
    hi_c = float(np.mean(central >= th.upper_central))
    hi_nc = float(np.mean(shifted >= th.upper_noncentral))
    se = lambda p: math.sqrt(p * (1 - p) / draws)  # noqa: E731
    return {"k": k, "x": x, "B": B, "bound": math.exp(-x),
            "lower_freq": lo, "lower_se": se(lo),
            "noncentral_freq": hi_nc, "noncentral_se": se(hi_nc),
            "central_freq": hi_c, "central_target": c4 * math.exp(-x)}


def suite_chi2(seed=0, draws=200_000):
    rep = _Report("chi2")
    rng = np.random.default_rng(seed)
    for k in (1, 4, 16):
        for x in (0.5, 1.0, 2.0, 4.0):
            for B in (0.0, 2.0):
                r = chi2_tail_table(k, x, B, draws, rng)
                rep.check(f"lower tail k={k} x={x} B={B}",
                          r["lower_freq"] <= r["bound"] + 3 * r["lower_se"], **r)
                rep.check(f"noncentral upper tail k={k} x={x} B={B}",
                          r["noncentral_freq"] <= r["bound"] + 3 * r["noncentral_se"], **r)
                rep.note(f"central upper tail k={k} x={x}",
                         freq=r["central_freq"], target=r["central_target"])
    worst = 0.0
    for k, a2 in [(1, 0.5), (5, 10.0), (20, 100.0)]:
        spec = dist.chi_square(k, a2=a2)
        z = np.linspace(0.05, 4 * (k + a2), 200)
        worst = max(worst, float(np.max(np.abs(dist.cdf(spec, 1, z) - stats.ncx2.cdf(z, k, a2)))))
    rep.check("noncentral CDF vs reference", worst <= 1e-9, max_abs_err=worst)
    return rep.done()


def suite_counterexamples():
    rep = _Report("counterexamples")
    lhs, rhs = select.exclusion_bound_sides([3.0, 2.0, 1.0], 2)
    rep.check("exclusion inequality fails at (3,2,1), s=2", lhs == 11.0 and rhs == 12.0,
              lhs=lhs, rhs=rhs)
    L = [1.9, 3.0, 2.0, 1.0]
    fast = select.bayes_select(np.log(L), 2)
    slow = select.bayes_select_bruteforce(L, 2)
    top = select.scan_select_lr(np.log(L), 2)
    rep.check("Bayes support leaves the top-2 set at (1.9,3,2,1)",
              fast.support == (0, 1, 2) and slow == fast and top.support == (1, 2),
              bayes_support=fast.support, bruteforce_support=slow.support,
              top_support=top.support, indexing="0-based")
    return rep.done()


_RUNNERS = {
    "sympoly": suite_sympoly, "bayes": suite_bayes, "deterministic": suite_deterministic,
    "identities": suite_identities, "chi2": suite_chi2,
    "counterexamples": suite_counterexamples,
}


def run_suite(name: str) -> dict:
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; expected one of {SUITES}")
    return _RUNNERS[name]()
