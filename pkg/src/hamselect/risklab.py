"""Seeded Monte Carlo estimation of Hamming risk and wrong-recovery probability.

Replication ``r`` of a run with master seed ``m`` draws from its own Philox
stream, keyed by ``m`` and offset by ``r`` in the counter. Results therefore
do not depend on chunking, thread count or execution order; per-replication
losses are always reduced in replication order.

By permutation invariance of the selectors shipped here the worst case over
truths of size ``s`` is attained at the canonical truth ``e(s)``, which is
the default. Custom selectors that are not permutation equivariant should
pass explicit truths.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import bounds, dist, select
from .bounds import TwoPointModel
from .dist import DomainError

RISK_KINDS = ("hamming", "wrong_recovery")
SELECTORS = ("scan", "scan_lr", "bayes", "separable", "threshold", "lighttail",
             "lighttail_almost", "group", "group_almost")
DEFAULT_CHUNK = 2048


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    stderr: float
    reps: int
    master_seed: int
    risk_kind: str

    @classmethod
    def from_losses(cls, losses, master_seed, risk_kind, scale=1.0) -> "RiskEstimate":
        v = np.asarray(losses, dtype=np.float64) * scale
        # plug-in standard deviation
        return cls(float(v.mean()), float(v.std() / math.sqrt(v.size)), int(v.size),
                   int(master_seed), risk_kind)

    def as_dict(self) -> dict:
        return asdict(self)


def combined_stderr(*estimates: RiskEstimate) -> float:
    return math.sqrt(sum(e.stderr ** 2 for e in estimates))


# -- streams ----------------------------------------------------------------

@lru_cache(maxsize=64)
def _philox_key(master_seed: int, stream: int) -> tuple[int, int]:
    ss = np.random.SeedSequence(master_seed, spawn_key=(stream,) if stream else ())
    k0, k1 = ss.generate_state(2, np.uint64)
    return int(k0), int(k1)


def replication_rng(master_seed: int, r: int, stream: int = 0) -> np.random.Generator:
    """Generator for replication ``r``; ``stream`` selects an independent family."""
    key = np.array(_philox_key(int(master_seed), int(stream)), dtype=np.uint64)
    counter = np.array([0, 0, 0, r], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def cell_seed(master_seed: int, cell_index: int) -> int:
    """Seed of sweep cell ``cell_index``, a hash of ``(master_seed, cell_index)``."""
    return int(np.random.SeedSequence([int(master_seed), int(cell_index)])
               .generate_state(1, np.uint64)[0])


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("HAMSELECT_THREADS", "1") or 1)
    return max(1, int(threads))


# -- group model --------------------------------------------------------------

@dataclass(frozen=True)
class GroupObservation:
    """``k x d`` matrix ``Y = theta + sigma * xi``; selectors see column norms."""

    Y: np.ndarray
    X: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "X", column_norms(self.Y))


def column_norms(Y) -> np.ndarray:
    """Squared Euclidean norms of the columns of ``Y``."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise ValueError("Y must be a k x d matrix")
    return np.einsum("ij,ij->j", Y, Y)


def sample_group_observation(norms, k: int, sigma: float, rng=None) -> GroupObservation:
    """One draw of ``Y``; column ``j`` has mean ``norms[j]`` times the first axis.

    Rotation invariance of the noise makes the direction of each mean
    column immaterial for the squared norms.
    """
    n = np.asarray(norms, dtype=np.float64)
    if n.ndim != 1 or (n < 0).any():
        raise ValueError("norms must be a nonnegative vector")
    if int(k) != k or k < 1 or sigma < 0:
        raise DomainError("need integer k >= 1 and sigma >= 0")
    gen = dist.as_generator(rng)
    Y = sigma * gen.standard_normal((int(k), n.size))
    Y[0] += n
    return GroupObservation(Y)


# -- selectors over row batches ------------------------------------------------

class _Batch:
    """Observations for a chunk of replications, with lazily computed log-ratios."""

    def __init__(self, model, X):
        self.model = model
        self.X = X
        self._lr = None

    @property
    def log_lr(self):
        if self._lr is None:
            self._lr = np.asarray(dist.log_lr(self.model.spec, self.X)).reshape(self.X.shape)
        return self._lr


def _threshold_bits(X, t, strict=False):
    return (X > t if strict else X >= t).astype(np.uint8)


def make_selector(name, model: TwoPointModel, **params) -> Callable:
    """Row-batch selector ``_Batch -> bits (R, d)`` for a registered name."""
    d, s, spec = model.d, model.s, model.spec
    if name == "scan":
        return lambda b: select.scan_rows(b.X, s)[0]
    if name == "scan_lr":
        return lambda b: select.scan_rows(b.log_lr, s)[0]
    if name == "bayes":
        return lambda b: select.bayes_rows(b.log_lr, s)[0]
    if name == "separable":
        level = math.log((d - s) / s)
        return lambda b: (b.log_lr >= level).astype(np.uint8)
    if name == "threshold":
        if "lam" not in params:
            raise DomainError("threshold selector needs a 'lam' parameter")
        lam = float(params["lam"])
        return lambda b: _threshold_bits(b.X, lam, strict=True)
    if name in ("lighttail", "lighttail_almost"):
        x = d - s if name == "lighttail" else d / s
        t = select.lighttail_threshold(spec.nu, spec.sigma, x)
        return lambda b: _threshold_bits(b.X, t)
    if name in ("group", "group_almost"):
        if spec.kind != "chi2":
            raise DomainError("group selectors need the chi2 family")
        lf = math.log(d) if name == "group" else math.log(d / s)
        t = select.group_threshold(spec.sigma, spec.k, lf)
        return lambda b: _threshold_bits(b.X, t)
    raise DomainError(f"unknown selector {name!r}; expected one of {SELECTORS}")


def _wrap_callable(fn, d):
    def run(batch):
        out = np.empty(batch.X.shape, dtype=np.uint8)
        for i, row in enumerate(batch.X):
            res = fn(row)
            bits = np.asarray(res.bits if isinstance(res, select.Selection) else res)
            if bits.shape != (d,):
                raise ValueError(f"selector returned shape {bits.shape}, expected ({d},)")
            out[i] = bits
        return out
    return run


def _resolve(selectors, model):
    if isinstance(selectors, (str, dict)) or callable(selectors):
        selectors = [selectors]
    out = {}
    for sel in selectors:
        if isinstance(sel, str):
            out[sel] = make_selector(sel, model)
        elif isinstance(sel, dict):
            spec = dict(sel)
            name = spec.pop("name")
            out[spec.pop("label", name)] = make_selector(name, model, **spec)
        elif callable(sel):
            out[getattr(sel, "__name__", "custom")] = _wrap_callable(sel, model.d)
        else:
            raise TypeError(f"cannot interpret selector {sel!r}")
    return out


# -- simulation core ------------------------------------------------------------

def _check_truth(model, truth):
    if truth is None:
        return model.truth()
    t = np.asarray(truth)
    if t.shape != (model.d,):
        raise ValueError(f"truth has shape {t.shape}, model expects ({model.d},)")
    if not np.isin(t, (0, 1)).all() or int(t.sum()) != model.s:
        raise ValueError(f"truth must be a 0/1 pattern with exactly s={model.s} ones")
    return t.astype(np.uint8)


def draw_rows(model, truth, master_seed, r0, r1, stream=0, group=False):
    """Observations of replications ``r0 .. r1-1`` as an ``(r1 - r0, d)`` array."""
    spec = model.spec
    X = np.empty((r1 - r0, model.d))
    norms = spec.a * truth.astype(np.float64)
    for i, r in enumerate(range(r0, r1)):
        rng = replication_rng(master_seed, r, stream)
        if group:
            X[i] = sample_group_observation(norms, spec.k, spec.sigma, rng).X
        else:
            X[i] = dist.sample(spec, truth, rng)
    return X


def simulate_losses(model: TwoPointModel, selectors, reps: int, master_seed: int,
                    truth=None, *, stream: int = 0, group: bool = False,
                    threads: int | None = None, chunk: int = DEFAULT_CHUNK) -> dict:
    """Per-replication Hamming losses of each selector on shared streams.

    Returns ``{label: int array of length reps}``.
    """
    if int(reps) != reps or reps < 1:
        raise ValueError("reps must be a positive integer")
    if group and model.spec.kind != "chi2":
        raise DomainError("group sampling needs the chi2 family")
    reps = int(reps)
    truth = _check_truth(model, truth)
    sels = _resolve(selectors, model)
    bounds_ = [(r, min(r + chunk, reps)) for r in range(0, reps, chunk)]

    def run(span):
        X = draw_rows(model, truth, master_seed, span[0], span[1], stream, group)
        batch = _Batch(model, X)
        return {k: np.abs(fn(batch).astype(np.int64) - truth).sum(axis=1)
                for k, fn in sels.items()}

    n = resolve_threads(threads)
    if n > 1 and len(bounds_) > 1:
        with ThreadPoolExecutor(n) as ex:
            parts = list(ex.map(run, bounds_))
    else:
        parts = [run(b) for b in bounds_]
    return {k: np.concatenate([p[k] for p in parts]) for k in sels}


def estimate_risks(model, selectors, reps, master_seed, truth=None,
                   kinds=RISK_KINDS, **kw) -> dict:
    """``{(label, kind): RiskEstimate}`` for several selectors on the same draws."""
    for kind in kinds:
        if kind not in RISK_KINDS:
            raise ValueError(f"unknown risk kind {kind!r}")
    losses = simulate_losses(model, selectors, reps, master_seed, truth, **kw)
    out = {}
    for label, loss in losses.items():
        for kind in kinds:
            v = loss if kind == "hamming" else (loss > 0)
            out[(label, kind)] = RiskEstimate.from_losses(v, master_seed, kind)
    return out


def _single(model, selector, truth, reps, seed, kind, kw):
    res = estimate_risks(model, [selector], reps, seed, truth, kinds=(kind,), **kw)
    (est,) = res.values()
    return est


def estimate_hamming_risk(model: TwoPointModel, selector, truth=None, reps: int = 1000,
                          seed: int = 0, **kw) -> RiskEstimate:
    """Mean of ``|selector(X) - truth|`` over ``reps`` seeded draws."""
    return _single(model, selector, truth, reps, seed, "hamming", kw)


def estimate_wrong_recovery(model: TwoPointModel, selector, truth=None, reps: int = 1000,
                            seed: int = 0, **kw) -> RiskEstimate:
    """Frequency of a selected support differing from the truth."""
    return _single(model, selector, truth, reps, seed, "wrong_recovery", kw)


def scan_risk_identity(model: TwoPointModel, reps: int, seed: int,
                       **kw) -> tuple[RiskEstimate, RiskEstimate]:
    """Scan Hamming risk at ``e(s)`` and ``2 s P(first coordinate not in the top s)``.

    The two sides use independent streams. Under MLR the ranking of the
    observations equals the ranking of the likelihood ratios.
    """
    lhs = estimate_hamming_risk(model, "scan", None, reps, seed, **kw)
    truth = model.truth()
    missed = np.empty(reps, dtype=np.float64)
    for r0 in range(0, reps, DEFAULT_CHUNK):
        r1 = min(r0 + DEFAULT_CHUNK, reps)
        X = draw_rows(model, truth, seed, r0, r1, stream=1)
        missed[r0:r1] = select.scan_rows(X, model.s)[0][:, 0] == 0
    rhs = RiskEstimate.from_losses(missed, seed, "hamming", scale=2 * model.s)
    return lhs, rhs


def separation_event_prob(model: TwoPointModel, reps: int, seed: int) -> RiskEstimate:
    """Frequency of ``min of the s signal observations <= max of the rest`` at ``e(s)``."""
    truth = model.truth()
    hit = np.empty(reps, dtype=np.float64)
    s = model.s
    for r0 in range(0, reps, DEFAULT_CHUNK):
        r1 = min(r0 + DEFAULT_CHUNK, reps)
        X = draw_rows(model, truth, seed, r0, r1)
        hit[r0:r1] = X[:, :s].min(axis=1) <= X[:, s:].max(axis=1)
    return RiskEstimate.from_losses(hit, seed, "wrong_recovery")


# -- sweeps -------------------------------------------------------------------------

AMPLITUDE_MODES = ("absolute", "lighttail_exact", "lighttail_almost", "group_exact",
                   "group_almost")


@dataclass(frozen=True)
class SweepConfig:
    """Factorial grid over model parameters.

    ``amplitudes`` are values of ``a`` (or of ``a2`` when ``amplitude_unit`` is
    ``"a2"``). With ``amplitude_mode`` other than ``"absolute"`` they are
    multipliers of the corresponding critical amplitude (``a`` for the light
    tail thresholds, ``a2`` for the group ones).
    """

    family: str
    d: tuple[int, ...]
    s: tuple[int, ...]
    amplitudes: tuple[float, ...]
    selectors: tuple[str, ...]
    reps: int
    master_seed: int
    amplitude_unit: str = "a"
    amplitude_mode: str = "absolute"
    nu: tuple[float, ...] = (2.0,)
    k: tuple[int, ...] = (1,)
    sigma: float = 1.0
    risk_kinds: tuple[str, ...] = ("hamming",)
    group: bool = False

    def __post_init__(self):
        for name in ("d", "s", "amplitudes", "selectors", "nu", "k", "risk_kinds"):
            val = tuple(getattr(self, name))
            if not val:
                raise DomainError(f"grid {name!r} must be nonempty")
            object.__setattr__(self, name, val)
        if self.family not in dist.FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.reps < 100:
            raise DomainError("reps must be at least 100")
        if self.amplitude_unit not in ("a", "a2"):
            raise DomainError("amplitude_unit must be 'a' or 'a2'")
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise DomainError(f"amplitude_mode must be one of {AMPLITUDE_MODES}")
        for kind in self.risk_kinds:
            if kind not in RISK_KINDS:
                raise DomainError(f"unknown risk kind {kind!r}")

    def cells(self):
        """Grid points in emission order (d, s, k, nu, amplitude)."""
        ks = self.k if self.family == "chi2" else (None,)
        nus = self.nu if self.family == "subbotin" else (None,)
        for d, s, k, nu, amp in itertools.product(self.d, self.s, ks, nus, self.amplitudes):
            yield {"d": d, "s": s, "k": k, "nu": nu, "amp": amp}


CELL_FIELDS = ("family", "d", "s", "k", "nu", "sigma", "a", "a2")
RESULT_FIELDS = ("selector", "risk_kind", "mean", "stderr", "reps", "seed", "error")


def _cell_model(cfg: SweepConfig, cell) -> tuple[TwoPointModel, float, float]:
    d, s, amp = cell["d"], cell["s"], float(cell["amp"])
    sig = cfg.sigma
    mode = cfg.amplitude_mode
    if mode.startswith("lighttail"):
        a_exact, a_almost = bounds.lighttail_thresholds(cell["nu"] or 2.0, sig, d, s)
        a = amp * (a_exact if mode == "lighttail_exact" else a_almost)
        a2 = a * a
    elif mode.startswith("group"):
        a2e, a2a = bounds.group_thresholds(sig, cell["k"] or 1, d, s)
        a2 = amp * (a2e if mode == "group_exact" else a2a)
        a = math.sqrt(a2)
    elif cfg.amplitude_unit == "a2":
        a, a2 = math.sqrt(amp), amp
    else:
        a, a2 = amp, amp * amp
    if cfg.family == "gaussian":
        spec = dist.gaussian(a, sig)
    elif cfg.family == "subbotin":
        spec = dist.subbotin(cell["nu"], a, sig)
    else:
        spec = dist.chi_square(cell["k"], a, sigma=sig)
    return TwoPointModel(spec, d, s), a, a2


def phase_transition_sweep(cfg: SweepConfig, threads: int | None = None) -> list[dict]:
    """Flat result rows in grid order; a failing cell yields rows carrying ``error``."""
    rows = []
    for idx, cell in enumerate(cfg.cells()):
        seed = cell_seed(cfg.master_seed, idx)
        base = {"family": cfg.family, "d": cell["d"], "s": cell["s"], "k": cell["k"],
                "nu": cell["nu"], "sigma": cfg.sigma, "a": None, "a2": None}
        try:
            model, base["a"], base["a2"] = _cell_model(cfg, cell)
            res = estimate_risks(model, list(cfg.selectors), cfg.reps, seed,
                                 kinds=cfg.risk_kinds, group=cfg.group, threads=threads)
            for sel in cfg.selectors:
                for kind in cfg.risk_kinds:
                    est = res[(sel, kind)]
                    rows.append({**base, "selector": sel, "risk_kind": kind,
                                 "mean": est.mean, "stderr": est.stderr, "reps": est.reps,
                                 "seed": seed, "error": None})
        except (DomainError, ValueError, ArithmeticError, RuntimeError) as exc:
            for sel in cfg.selectors:
                for kind in cfg.risk_kinds:
                    rows.append({**base, "selector": sel, "risk_kind": kind, "mean": None,
                                 "stderr": None, "reps": cfg.reps, "seed": seed,
                                 "error": f"{type(exc).__name__}: {exc}"})
    return rows
