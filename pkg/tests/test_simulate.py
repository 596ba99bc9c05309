import io

import numpy as np
import pytest

from larchpmle import (
    CoeffSpec,
    ParamSpace,
    SimConfig,
    Theta,
    acf,
    derive_seed,
    simulate,
    volterra_sigma,
)
from larchpmle.errors import BudgetError, DomainError, ValidationError

from conftest import CASE1, CASE2


class TestSimulate:
    def test_zero_scale_degenerates(self, spec):
        th = Theta(0.2, 0.0, 1.7)
        s = simulate(spec, th, SimConfig(n=200, burn_in=50, seed=1))
        assert np.all(s.sigma == 1.7)
        assert s.x == pytest.approx(1.7 * s.eps)

    def test_x_is_eps_times_sigma(self, spec):
        s = simulate(spec, CASE1, SimConfig(n=300, burn_in=100, seed=2))
        assert np.all(s.x == s.eps * s.sigma)

    def test_deterministic(self, spec):
        cfg = SimConfig(n=250, burn_in=100, seed=99)
        s1 = simulate(spec, CASE1, cfg)
        s2 = simulate(spec, CASE1, cfg)
        assert np.array_equal(s1.x, s2.x)
        assert np.array_equal(s1.eps, s2.eps)

    def test_seed_changes_path(self, spec):
        s1 = simulate(spec, CASE1, SimConfig(n=100, burn_in=0, seed=1))
        s2 = simulate(spec, CASE1, SimConfig(n=100, burn_in=0, seed=2))
        assert not np.array_equal(s1.x, s2.x)

    def test_recursion_matches_definition(self, spec):
        s = simulate(spec, CASE1, SimConfig(n=40, burn_in=0, J=100, seed=5))
        from larchpmle.coeffs import coeff_weights
        b = coeff_weights(spec, CASE1, 100)
        for t in range(40):
            k = min(t, 100)
            expect = CASE1.a + sum(b[j - 1] * s.x[t - j]
                                   for j in range(1, k + 1))
            assert s.sigma[t] == pytest.approx(expect, rel=1e-12)

    def test_out_of_space_rejected(self, spec, space):
        with pytest.raises(ValidationError):
            simulate(spec, Theta(0.1, 0.8, 1.0), SimConfig(n=10, seed=0),
                     space=space)

    def test_sample_mean_near_zero(self, spec):
        # the process is a martingale difference: uncorrelated, mean zero
        s = simulate(spec, CASE1, SimConfig(n=100_000, burn_in=10_000, seed=8))
        x = s.x_obs
        se = x.std(ddof=1) / np.sqrt(len(x))
        assert abs(x.mean()) < 4 * se

    def test_burn_in_insensitivity(self, spec):
        m = []
        for burn in (10_000, 20_000):
            vals = [
                np.mean(simulate(spec, CASE2,
                                 SimConfig(n=20_000, burn_in=burn,
                                           seed=derive_seed(17, r))
                                 ).x_obs ** 2)
                for r in range(8)
            ]
            m.append((np.mean(vals), np.std(vals, ddof=1) / np.sqrt(8)))
        (m1, se1), (m2, se2) = m
        assert abs(m1 - m2) < 3 * np.hypot(se1, se2)

    def test_table_noise(self, spec):
        rng = np.random.default_rng(0)
        table = rng.standard_normal(4000)
        table = (table - table.mean()) / table.std()
        cfg = SimConfig(n=500, burn_in=0, seed=4, noise=table)
        s = simulate(spec, CASE1, cfg)
        assert set(np.round(s.eps, 12)) <= set(np.round(table, 12))

    def test_bad_noise_table(self):
        with pytest.raises(ValidationError):
            SimConfig(n=10, seed=0, noise=np.array([5.0, 6.0, 7.0]))
        with pytest.raises(DomainError):
            SimConfig(n=10, seed=0, noise="uniform")

    def test_csv_export_shape(self, spec):
        s = simulate(spec, CASE1, SimConfig(n=5, burn_in=3, seed=1))
        buf = io.StringIO()
        s.to_csv(buf, comment="seed=1")
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "# seed=1"
        assert lines[1] == "t,x,sigma,eps"
        assert len(lines) == 2 + 5
        t, x, sig, eps = lines[2].split(",")
        assert int(t) == 1
        assert float(x) == s.x_obs[0]


class TestVolterra:
    def test_t1_is_intercept(self, spec):
        assert volterra_sigma(spec, CASE1, [], 1, K_max=5) == CASE1.a

    def test_depth_one_term(self, spec):
        # only k = 1 chains: a * (1 + sum_j b_j eps_{t-j})
        from larchpmle.coeffs import coeff_weights
        rng = np.random.default_rng(3)
        eps = rng.standard_normal(6)
        b = coeff_weights(spec, CASE1, 6)
        t = 7
        expect = CASE1.a * (1.0 + sum(b[j - 1] * eps[t - 1 - j]
                                      for j in range(1, 7)))
        got = volterra_sigma(spec, CASE1, eps, t, K_max=1)
        assert got == pytest.approx(expect, rel=1e-12)

    def test_matches_recursion_full_depth(self, spec):
        cfg = SimConfig(n=30, burn_in=0, J=64, seed=11)
        s = simulate(spec, CASE2, cfg)
        for t in range(1, 31):
            v = volterra_sigma(spec, CASE2, s.eps[: t - 1], t, K_max=t)
            assert v == pytest.approx(s.sigma[t - 1], abs=1e-10)

    def test_budget_exceeded(self, spec):
        eps = np.zeros(400)
        with pytest.raises(BudgetError):
            volterra_sigma(spec, CASE1, eps, 400, K_max=399)
        # a raised cap allows the same evaluation
        volterra_sigma(spec, CASE1, eps, 400, K_max=399, max_ops=10 ** 9)

    def test_bad_index(self, spec):
        with pytest.raises(DomainError):
            volterra_sigma(spec, CASE1, np.zeros(3), 6, K_max=2)


class TestStationarity:
    def test_acf_of_x_is_flat(self, spec):
        # the process itself is uncorrelated
        s = simulate(spec, CASE2, SimConfig(n=50_000, burn_in=10_000, seed=21))
        rho = acf(s.x_obs, 5)
        band = 3.0 / np.sqrt(len(s.x_obs))
        assert np.all(np.abs(rho[1:]) < band)

    def test_acf_of_squares_is_positive(self, spec):
        # long memory in volatility: squared-process correlations persist
        s = simulate(spec, CASE2, SimConfig(n=50_000, burn_in=10_000, seed=22))
        rho = acf(s.x_obs, 50, on_squares=True)
        assert rho[1:].mean() > 0.0

    def test_derive_seed_is_stable(self):
        assert derive_seed(42, 0) == derive_seed(42, 0)
        assert derive_seed(42, 0) != derive_seed(42, 1)
        assert derive_seed(41, 0) != derive_seed(42, 0)
