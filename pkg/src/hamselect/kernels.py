"""Hot inner loops of the Monte Carlo engine.

Every kernel exists twice: a ``*_nb`` version compiled with numba (explicit
per-row loops) and a ``*_np`` version vectorised across rows with numpy.
The unsuffixed public name is bound at import time according to
``HAMSELECT_BACKEND`` (see :mod:`hamselect._jit`). Both versions take and
return plain float64/uint8 arrays so they can be swapped freely.

All symmetric-polynomial arithmetic is carried out in the log domain.
"""

import math

import numpy as np

from ._jit import USE_NUMBA, njit

# relative truncation of the chi-square likelihood-ratio series
SERIES_LOG_RTOL = math.log(1e-16)

_NEG_INF = -math.inf


# ---------------------------------------------------------------------------
# scalar helpers (numba)
# ---------------------------------------------------------------------------
@njit
def _lae(x, y):
    """log(exp(x) + exp(y)) with -inf handled exactly."""
    if x == _NEG_INF:
        return y
    if y == _NEG_INF:
        return x
    if x > y:
        return x + math.log1p(math.exp(y - x))
    return y + math.log1p(math.exp(x - y))


@njit
def _lse_pair_sum(p, q, m):
    """log sum_{r=0..m} exp(p[r] + q[m - r]) with a max shift."""
    mx = _NEG_INF
    for r in range(m + 1):
        t = p[r] + q[m - r]
        if t > mx:
            mx = t
    if mx == _NEG_INF:
        return _NEG_INF
    acc = 0.0
    for r in range(m + 1):
        acc += math.exp(p[r] + q[m - r] - mx)
    return mx + math.log(acc)


# ---------------------------------------------------------------------------
# elementary symmetric polynomials over rows
# ---------------------------------------------------------------------------
# Linear-domain fast path (numba only). With c the mid-range of a row's
# finite log-ratios, every scaled product of m ratios lies within
# exp(+-m * half_range) and a sum of at most C(d, m) <= d^m of them cannot
# overflow while m * (half_range + log d) stays below LINEAR_MAX_LOG. Rows
# outside that budget use the log-domain recurrences.
LINEAR_MAX_LOG = 600.0


@njit
def _log0(x):
    if x <= 0.0:
        return _NEG_INF
    return math.log(x)


@njit
def _row_shift(row):
    lo = math.inf
    hi = _NEG_INF
    for v in row:
        if v > _NEG_INF:
            if v < lo:
                lo = v
            if v > hi:
                hi = v
    if hi == _NEG_INF:
        return 0.0, 0.0
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


@njit
def _linear_ok(half, m, d):
    return m * (half + math.log(d)) <= LINEAR_MAX_LOG


@njit
def log_esym_rows_nb(logL, m):
    R, d = logL.shape
    out = np.full((R, m + 1), _NEG_INF)
    acc = np.empty(m + 1)
    for r in range(R):
        row = logL[r]
        c, half = _row_shift(row)
        out[r, 0] = 0.0
        if _linear_ok(half, m, d):
            acc[:] = 0.0
            acc[0] = 1.0
            for i in range(d):
                wi = math.exp(row[i] - c)
                for j in range(min(i + 1, m), 0, -1):
                    acc[j] += wi * acc[j - 1]
            for j in range(1, m + 1):
                out[r, j] = _log0(acc[j]) + j * c
        else:
            for i in range(d):
                li = row[i]
                for j in range(min(i + 1, m), 0, -1):
                    out[r, j] = _lae(out[r, j], out[r, j - 1] + li)
    return out


def log_esym_rows_np(logL, m):
    logL = np.asarray(logL, dtype=np.float64)
    R, d = logL.shape
    acc = np.full((m + 1, R), -np.inf)
    acc[0] = 0.0
    for i in range(d):
        li = logL[:, i]
        for j in range(min(i + 1, m), 0, -1):
            acc[j] = np.logaddexp(acc[j], acc[j - 1] + li)
    return np.ascontiguousarray(acc.T)


# ---------------------------------------------------------------------------
# Bayes selector margins
#
# For each row and coordinate j returns
#   A_j = logL_j + log e_{s-1}(L_{-j})     B_j = log e_s(L_{-j})
# The excluded sums are assembled from prefix and suffix tables,
# e_m(L_{-j}) = sum_r e_r(L_{<j}) e_{m-r}(L_{>j}); every term is
# nonnegative, so no cancellation can occur.
# ---------------------------------------------------------------------------
@njit
def _margins_linear(row, c, s, P, Q, A, B):
    d = row.shape[0]
    P[0, :] = 0.0
    P[0, 0] = 1.0
    for i in range(d):
        wi = math.exp(row[i] - c)
        P[i + 1, 0] = 1.0
        for j in range(1, s + 1):
            P[i + 1, j] = P[i, j] + wi * P[i, j - 1]
    Q[d, :] = 0.0
    Q[d, 0] = 1.0
    for i in range(d - 1, -1, -1):
        wi = math.exp(row[i] - c)
        Q[i, 0] = 1.0
        for j in range(1, s + 1):
            Q[i, j] = Q[i + 1, j] + wi * Q[i + 1, j - 1]
    for jx in range(d):
        lo = 0.0
        hi = 0.0
        for r in range(s + 1):
            hi += P[jx, r] * Q[jx + 1, s - r]
            if r < s:
                lo += P[jx, r] * Q[jx + 1, s - 1 - r]
        A[jx] = row[jx] + _log0(lo) + (s - 1) * c
        B[jx] = _log0(hi) + s * c


@njit
def _margins_log(row, s, P, Q, A, B):
    d = row.shape[0]
    P[0, :] = _NEG_INF
    P[0, 0] = 0.0
    for i in range(d):
        li = row[i]
        P[i + 1, 0] = 0.0
        for j in range(1, s + 1):
            P[i + 1, j] = _lae(P[i, j], P[i, j - 1] + li)
    Q[d, :] = _NEG_INF
    Q[d, 0] = 0.0
    for i in range(d - 1, -1, -1):
        li = row[i]
        Q[i, 0] = 0.0
        for j in range(1, s + 1):
            Q[i, j] = _lae(Q[i + 1, j], Q[i + 1, j - 1] + li)
    for jx in range(d):
        A[jx] = row[jx] + _lse_pair_sum(P[jx], Q[jx + 1], s - 1)
        B[jx] = _lse_pair_sum(P[jx], Q[jx + 1], s)


@njit
def bayes_margins_rows_nb(logL, s):
    R, d = logL.shape
    A = np.empty((R, d))
    B = np.empty((R, d))
    P = np.empty((d + 1, s + 1))
    Q = np.empty((d + 1, s + 1))
    for r in range(R):
        c, half = _row_shift(logL[r])
        if _linear_ok(half, s, d):
            _margins_linear(logL[r], c, s, P, Q, A[r], B[r])
        else:
            _margins_log(logL[r], s, P, Q, A[r], B[r])
    return A, B


def _lse_axis0(t):
    mx = t.max(axis=0)
    shift = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        return shift + np.log(np.exp(t - shift).sum(axis=0))


def bayes_margins_rows_np(logL, s, chunk_cells=4_000_000):
    logL = np.asarray(logL, dtype=np.float64)
    R, d = logL.shape
    A = np.empty((R, d))
    B = np.empty((R, d))
    step = max(1, chunk_cells // ((d + 1) * (s + 1)))
    for c0 in range(0, R, step):
        blk = logL[c0:c0 + step].T  # (d, Rc)
        Rc = blk.shape[1]
        P = np.full((d + 1, s + 1, Rc), -np.inf)
        Q = np.full((d + 1, s + 1, Rc), -np.inf)
        P[:, 0] = 0.0
        Q[:, 0] = 0.0
        for i in range(d):
            P[i + 1, 1:] = np.logaddexp(P[i, 1:], P[i, :-1] + blk[i])
        for i in range(d - 1, -1, -1):
            Q[i, 1:] = np.logaddexp(Q[i + 1, 1:], Q[i + 1, :-1] + blk[i])
        for jx in range(d):
            lo = P[jx, :s] + Q[jx + 1, s - 1::-1]
            hi = P[jx, :s + 1] + Q[jx + 1, s::-1]
            A[c0:c0 + Rc, jx] = blk[jx] + _lse_axis0(lo)
            B[c0:c0 + Rc, jx] = _lse_axis0(hi)
    return A, B


# ---------------------------------------------------------------------------
# scan (top-s) selection, smaller index wins ties
# ---------------------------------------------------------------------------
SCAN_INSERTION_MAX_S = 64


@njit
def scan_rows_nb(V, s):
    R, d = V.shape
    bits = np.zeros((R, d), dtype=np.uint8)
    tie = np.zeros(R, dtype=np.bool_)
    top = np.empty(s, dtype=np.int64)
    for r in range(R):
        row = V[r]
        if s <= SCAN_INSERTION_MAX_S:
            # insertion into a sorted top-s list; equal values keep index order
            n = 0
            for i in range(d):
                v = row[i]
                if n < s:
                    p = n
                    n += 1
                elif v > row[top[s - 1]]:
                    p = s - 1
                else:
                    continue
                while p > 0 and row[top[p - 1]] < v:
                    top[p] = top[p - 1]
                    p -= 1
                top[p] = i
        else:
            order = np.argsort(-row, kind="mergesort")
            top[:] = order[:s]
        for q in range(s):
            bits[r, top[q]] = 1
        kth = row[top[s - 1]]
        for i in range(d):
            if bits[r, i] == 0 and row[i] == kth:
                tie[r] = True
                break
    return bits, tie


def scan_rows_np(V, s):
    V = np.asarray(V, dtype=np.float64)
    R, d = V.shape
    order = np.argsort(-V, axis=1, kind="stable")
    bits = np.zeros((R, d), dtype=np.uint8)
    np.put_along_axis(bits, order[:, :s], 1, axis=1)
    if s < d:
        edge = np.take_along_axis(V, order[:, s - 1:s + 1], axis=1)
        tie = edge[:, 0] == edge[:, 1]
    else:
        tie = np.zeros(R, dtype=bool)
    return bits, tie


# ---------------------------------------------------------------------------
# chi-square likelihood ratio
#
#   log f1/f0 (z) = -lam/2 + log sum_j Gamma(h) (lam z / 4)^j / (j! Gamma(h + j)),
#   h = k/2. Terms are unimodal in j; summation stops once past the mode and
#   the next term is below 1e-16 of the running sum. The numba version sums
#   outwards from the mode, the numpy one upwards from j = 0.
# ---------------------------------------------------------------------------
@njit
def _chi2_series_log(x, h):
    # start at the largest term, j(h + j - 1) <= x, and sum outwards by ratios
    b = h - 1.0
    jm = math.floor(0.5 * (-b + math.sqrt(b * b + 4.0 * x)))
    if jm < 0.0:
        jm = 0.0
    log_peak = jm * math.log(x) - math.lgamma(jm + 1.0) - math.lgamma(h + jm) + math.lgamma(h)
    rtol = math.exp(SERIES_LOG_RTOL)
    acc = 1.0
    t = 1.0
    j = jm
    while True:
        t *= x / ((j + 1.0) * (h + j))
        j += 1.0
        acc += t
        if t < rtol * acc:
            break
    t = 1.0
    j = jm
    while j > 0.0:
        t *= j * (h + j - 1.0) / x
        j -= 1.0
        acc += t
        if t < rtol * acc:
            break
    return log_peak + math.log(acc)


@njit
def chi2_log_lr_nb(z, k, lam):
    n = z.shape[0]
    out = np.empty(n)
    h = 0.5 * k
    for i in range(n):
        x = 0.25 * lam * z[i]
        if x <= 0.0:
            out[i] = -0.5 * lam
        else:
            out[i] = -0.5 * lam + _chi2_series_log(x, h)
    return out


def chi2_log_lr_np(z, k, lam):
    z = np.asarray(z, dtype=np.float64)
    h = 0.5 * k
    x = 0.25 * lam * z
    out = np.full(z.shape, -0.5 * lam)
    idx = np.flatnonzero(x > 0.0)
    if idx.size == 0:
        return out
    lx = np.log(x[idx])
    xs = x[idx]
    log_s = np.zeros(idx.size)
    lt = np.zeros(idx.size)
    j = 0
    while idx.size:
        lt = lt + lx - math.log(j + 1.0) - math.log(h + j)
        j += 1
        log_s = np.logaddexp(log_s, lt)
        nxt = lt + lx - math.log(j + 1.0) - math.log(h + j)
        done = ((j + 1.0) * (h + j) > xs) & (nxt < log_s + SERIES_LOG_RTOL)
        if done.any():
            out[idx[done]] += log_s[done]
            keep = ~done
            idx, lx, xs, log_s, lt = idx[keep], lx[keep], xs[keep], log_s[keep], lt[keep]
    return out


if USE_NUMBA:
    log_esym_rows = log_esym_rows_nb
    bayes_margins_rows = bayes_margins_rows_nb
    scan_rows = scan_rows_nb
    chi2_log_lr = chi2_log_lr_nb
else:
    log_esym_rows = log_esym_rows_np
    bayes_margins_rows = bayes_margins_rows_np
    scan_rows = scan_rows_np
    chi2_log_lr = chi2_log_lr_np
