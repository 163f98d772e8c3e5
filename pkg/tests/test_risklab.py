import math

import numpy as np
import pytest
from scipy import stats

from hamselect import dist
from hamselect import risklab as rl
from hamselect import select as sel
from hamselect.bounds import TwoPointModel
from hamselect.dist import DomainError


def gauss(a, d, s, **kw):
    return TwoPointModel(dist.gaussian(a), d, s, **kw)


class TestStreams:
    def test_replication_streams_are_reproducible_and_distinct(self):
        a = rl.replication_rng(42, 7).standard_normal(5)
        b = rl.replication_rng(42, 7).standard_normal(5)
        c = rl.replication_rng(42, 8).standard_normal(5)
        d = rl.replication_rng(42, 7, stream=1).standard_normal(5)
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, c) and not np.allclose(a, d)

    def test_cell_seed(self):
        assert rl.cell_seed(1, 0) == rl.cell_seed(1, 0)
        assert len({rl.cell_seed(1, i) for i in range(100)}) == 100
        assert 0 <= rl.cell_seed(2 ** 64 - 1, 3) < 2 ** 64


class TestEstimates:
    def test_same_seed_same_estimate(self):
        m = gauss(1.0, 20, 4)
        e1 = rl.estimate_hamming_risk(m, "bayes", reps=500, seed=3)
        e2 = rl.estimate_hamming_risk(m, "bayes", reps=500, seed=3)
        assert e1 == e2
        assert e1 != rl.estimate_hamming_risk(m, "bayes", reps=500, seed=4)

    def test_independent_of_threads_and_chunks(self):
        m = gauss(1.0, 15, 3)
        ref = rl.simulate_losses(m, ["scan", "bayes"], 700, 9, threads=1)
        for threads, chunk in [(3, 50), (2, 701), (1, 1)]:
            got = rl.simulate_losses(m, ["scan", "bayes"], 700, 9, threads=threads, chunk=chunk)
            for k in ref:
                np.testing.assert_array_equal(ref[k], got[k])

    def test_thread_env_fallback(self, monkeypatch):
        monkeypatch.setenv("HAMSELECT_THREADS", "3")
        assert rl.resolve_threads() == 3
        assert rl.resolve_threads(2) == 2
        monkeypatch.delenv("HAMSELECT_THREADS")
        assert rl.resolve_threads() == 1

    def test_prefix_of_longer_run(self):
        m = gauss(1.0, 10, 2)
        short = rl.simulate_losses(m, "scan", 300, 5)["scan"]
        long = rl.simulate_losses(m, "scan", 900, 5)["scan"]
        np.testing.assert_array_equal(short, long[:300])

    def test_perfect_separation(self):
        m = gauss(50.0, 20, 4)
        res = rl.estimate_risks(m, ["scan", "bayes", "separable"], 1000, 1)
        assert all(e.mean < 1e-3 for e in res.values())
        lhs, rhs = rl.scan_risk_identity(m, 1000, 1)
        assert lhs.mean == rhs.mean == 0.0
        assert rl.separation_event_prob(m, 1000, 1).mean == 0.0

    def test_wrong_recovery_bounded_by_hamming_per_draw(self):
        m = gauss(1.5, 25, 5)
        loss = rl.simulate_losses(m, ["scan", "bayes", "separable"], 2000, 11)
        for v in loss.values():
            assert np.all((v > 0) <= v)
        res = rl.estimate_risks(m, ["scan", "bayes", "separable"], 2000, 11)
        for name in ("scan", "bayes", "separable"):
            assert res[(name, "wrong_recovery")].mean <= res[(name, "hamming")].mean
            assert 0 <= res[(name, "wrong_recovery")].mean <= 1

    def test_stderr_is_plugin(self):
        m = gauss(1.0, 10, 2)
        loss = rl.simulate_losses(m, "scan", 400, 2)["scan"]
        est = rl.estimate_hamming_risk(m, "scan", reps=400, seed=2)
        assert est.mean == pytest.approx(loss.mean())
        assert est.stderr == pytest.approx(loss.std(ddof=0) / 20)
        assert est.reps == 400 and est.master_seed == 2 and est.risk_kind == "hamming"

    def test_exchangeable_oracles(self):
        m = gauss(0.0, 10, 3, diagnostic=True)
        res = rl.estimate_risks(m, "scan", 20_000, 17)
        ham, wrong = res[("scan", "hamming")], res[("scan", "wrong_recovery")]
        assert abs(ham.mean - 2 * 3 * 7 / 10) <= 3 * ham.stderr
        assert abs(wrong.mean - (1 - 1 / math.comb(10, 3))) <= 3 * wrong.stderr
        sep = rl.separation_event_prob(gauss(0.0, 5, 2, diagnostic=True), 20_000, 17)
        assert abs(sep.mean - 0.9) <= 3 * sep.stderr

    def test_custom_selector_and_truth(self):
        m = gauss(3.0, 8, 2)
        truth = np.array([0, 0, 1, 0, 0, 0, 1, 0])

        def top2(x):
            return sel.scan_select_obs(x, 2)

        a = rl.estimate_hamming_risk(m, top2, truth, reps=300, seed=4)
        b = rl.estimate_hamming_risk(m, "scan", truth, reps=300, seed=4)
        assert a == b

    def test_dimension_errors(self):
        m = gauss(1.0, 8, 2)
        with pytest.raises(ValueError):
            rl.estimate_hamming_risk(m, "scan", np.ones(5), reps=10)
        with pytest.raises(ValueError):
            rl.estimate_hamming_risk(m, "scan", np.array([1, 1, 1, 0, 0, 0, 0, 0]), reps=10)
        with pytest.raises(ValueError):
            rl.estimate_hamming_risk(m, lambda x: np.ones(3), reps=10)
        with pytest.raises(DomainError):
            rl.estimate_hamming_risk(m, "nonsense", reps=10)
        with pytest.raises(DomainError):
            rl.estimate_hamming_risk(m, "group", reps=10)

    def test_threshold_needs_lambda(self):
        m = gauss(1.0, 8, 2)
        with pytest.raises(DomainError):
            rl.estimate_hamming_risk(m, "threshold", reps=10)
        est = rl.estimate_hamming_risk(m, {"name": "threshold", "lam": 100.0}, reps=50)
        assert est.mean == 2.0


class TestGroupModel:
    def test_column_norms(self):
        assert rl.column_norms(np.array([[3.0], [4.0]])).tolist() == [25.0]
        obs = rl.sample_group_observation([5.0, 0.0], 2, 0.0, rng=0)
        assert obs.X.tolist() == [25.0, 0.0]
        with pytest.raises(ValueError):
            rl.column_norms(np.ones(3))
        with pytest.raises(ValueError):
            rl.sample_group_observation([-1.0], 2, 1.0)

    def test_mean_of_signal_column(self):
        k, sigma, a = 4, 1.5, 2.0
        x = np.array([rl.sample_group_observation([a], k, sigma, rng=i).X[0]
                      for i in range(20_000)])
        assert abs(x.mean() - (sigma ** 2 * k + a * a)) <= 4 * x.std() / math.sqrt(x.size)

    def test_null_column_is_central_chi2(self):
        gen = np.random.default_rng(1)
        x = np.concatenate([rl.sample_group_observation(np.zeros(50), 3, 2.0, gen).X
                            for _ in range(2000)])
        spec = dist.chi_square(3, a=0.0)
        assert stats.kstest(x / 4.0, lambda v: dist.cdf(spec, 0, v)).pvalue > 1e-3

    def test_group_sampling_matches_direct_law(self):
        m = TwoPointModel(dist.chi_square(5, a2=6.0), 30, 3)
        a = rl.estimate_hamming_risk(m, "scan", reps=4000, seed=1, group=True)
        b = rl.estimate_hamming_risk(m, "scan", reps=4000, seed=2)
        assert abs(a.mean - b.mean) <= 4 * rl.combined_stderr(a, b)


class TestSweep:
    def cfg(self, **kw):
        base = dict(family="gaussian", d=(20,), s=(4,), amplitudes=(1.5,),
                    selectors=("scan", "bayes"), reps=300, master_seed=5,
                    risk_kinds=("hamming", "wrong_recovery"))
        base.update(kw)
        return rl.SweepConfig(**base)

    def test_single_cell_matches_direct_call(self):
        rows = rl.phase_transition_sweep(self.cfg())
        direct = rl.estimate_hamming_risk(gauss(1.5, 20, 4), "bayes", reps=300,
                                          seed=rl.cell_seed(5, 0))
        row = next(r for r in rows if r["selector"] == "bayes" and r["risk_kind"] == "hamming")
        assert row["mean"] == direct.mean and row["stderr"] == direct.stderr

    def test_cardinality_and_order(self):
        rows = rl.phase_transition_sweep(self.cfg(d=(20, 30, 40), amplitudes=(1.0, 2.0)))
        assert len(rows) == 6 * 2 * 2
        cells = [(r["d"], r["a"]) for r in rows[::4]]
        assert cells == [(20, 1.0), (20, 2.0), (30, 1.0), (30, 2.0), (40, 1.0), (40, 2.0)]

    def test_errors_recorded_in_row(self):
        rows = rl.phase_transition_sweep(self.cfg(s=(4, 25)))
        bad = [r for r in rows if r["s"] == 25]
        assert bad and all(r["error"] and r["mean"] is None for r in bad)
        assert all(r["error"] is None for r in rows if r["s"] == 4)

    def test_relative_amplitudes(self):
        cfg = rl.SweepConfig(family="chi2", d=(100,), s=(5,), amplitudes=(1.0,),
                             amplitude_mode="group_exact", k=(4,), selectors=("group",),
                             reps=200, master_seed=1)
        (row,) = rl.phase_transition_sweep(cfg)
        assert row["a2"] == pytest.approx(16 * math.sqrt(4 * math.log(100)) + 80 * math.log(100))
        assert row["mean"] <= 3 / 100 + 3 * row["stderr"]

    def test_validation(self):
        with pytest.raises(DomainError):
            self.cfg(reps=50)
        with pytest.raises(DomainError):
            self.cfg(d=())
        with pytest.raises(DomainError):
            self.cfg(risk_kinds=("other",))
        with pytest.raises(DomainError):
            self.cfg(amplitude_mode="weird")
