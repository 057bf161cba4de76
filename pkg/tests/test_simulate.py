import json
import math

import numpy as np
import pytest

from stable_consensus.fluctuation import NoiseSpec, sigma_alpha_complete
from stable_consensus.graph import complete_graph, cycle_graph, path_graph
from stable_consensus.simulate import (
    SimConfig, ecf_modulus_error, estimate_scale, fractional_moment_check, jump_fraction, run, summary,
)
from stable_consensus.stable import StableParams, make_rng, sample

K5 = complete_graph(5)


def config(**kw):
    base = dict(graph=K5, noise=NoiseSpec.symmetric(1.5, 5), dt=1e-3, horizon=0.2, paths=50, seed=3)
    base.update(kw)
    return SimConfig(**base)


class TestConfig:
    def test_step_limit(self):
        with pytest.raises(ValueError):
            config(dt=0.4)          # 2 / lambda_n = 0.4 on K5

    @pytest.mark.parametrize("kw", [dict(paths=0), dict(horizon=1e-4), dict(scheme="rk4"),
                                    dict(noise=NoiseSpec.symmetric(1.5, 4)), dict(x0=(1.0, 2.0))])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            config(**kw)

    def test_increment_scale(self):
        assert config().increment_scale == pytest.approx((1e-3 / 1.5) ** (1 / 1.5))
        assert config(control="lebesgue").increment_scale == pytest.approx(1e-3 ** (1 / 1.5))


class TestRun:
    def test_deterministic(self):
        a, b = run(config()), run(config())
        assert np.array_equal(a.y, b.y)

    def test_blocks_and_threads_are_reproducible(self):
        a = run(config(block_paths=20))
        b = run(config(block_paths=20), threads=3)
        assert np.array_equal(a.y, b.y)

    def test_seed_changes_output(self):
        assert not np.array_equal(run(config()).y, run(config(seed=4)).y)

    def test_centering(self):
        ens = run(config(record_stride=10))
        assert ens.y.shape == (20, 50, 5)
        assert ens.centering_error() <= 1e-8

    @pytest.mark.parametrize("scheme", ["euler", "semi-exact"])
    def test_noise_free_decay(self, scheme):
        g = path_graph(4)
        x0 = (1.0, -2.0, 0.5, 3.0)
        ens = run(SimConfig(g, NoiseSpec.symmetric(1.5, 4), dt=1e-2, horizon=3.0, paths=1,
                            x0=x0, noise_scale=0.0, record_stride=100, scheme=scheme))
        norms = np.linalg.norm(ens.y[:, 0, :], axis=1)
        lam2 = 2 - math.sqrt(2)
        rates = -np.diff(np.log(norms)) / 1.0
        assert np.all(rates > 0)
        assert rates[-1] == pytest.approx(lam2, rel=0.05)

    def test_gaussian_variance(self):
        ens = run(SimConfig(K5, NoiseSpec.symmetric(2.0, 5), dt=2e-3, horizon=3.0, paths=4000, seed=1))
        var = ens.terminal.var(axis=0)
        # S_2 variance convention: var = 2 sigma_l^2
        target = 2 * sigma_alpha_complete(5, 5.0, 2.0) / 5
        np.testing.assert_allclose(var, target, rtol=0.1)

    def test_jumps_grow_as_alpha_falls(self):
        fr = {}
        for a in (2.0, 1.2):
            ens = run(SimConfig(cycle_graph(7), NoiseSpec.symmetric(a, 7), dt=1e-3, horizon=2.0, paths=4,
                                record_stride=1, seed=2))
            fr[a] = jump_fraction(ens)
        assert fr[1.2] > fr[2.0]

    def test_samples_burn_in(self):
        ens = run(config(record_stride=50))
        assert ens.samples(0.1).shape == (150, 5)
        assert ens.samples(99.0).shape == (50, 5)

    def test_csv_and_summary(self):
        ens = run(config(paths=2, horizon=0.002, record_stride=1))
        lines = ens.to_csv().splitlines()
        assert lines[0] == "time,path,node,y" and len(lines) == 1 + 2 * 2 * 5
        doc = json.loads(summary(ens))
        assert doc["config"]["paths"] == 2


class TestEstimation:
    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
    def test_synthetic_scale(self, alpha):
        x = sample(StableParams(alpha, 0.7), 100_000, make_rng(5))
        est = estimate_scale(x, alpha)
        assert est.sigma_alpha[0] == pytest.approx(0.7 ** alpha, rel=0.05)

    def test_skew_recovered(self):
        x = sample(StableParams(1.5, 1.0, 0.6, 0.0), 200_000, make_rng(6))
        est = estimate_scale(x, 1.5)
        assert est.beta[0] == pytest.approx(0.6, abs=0.1)

    def test_gaussian_half_variance(self):
        x = sample(StableParams(2.0, 1.3), 100_000, make_rng(7))
        est = estimate_scale(x, 2.0)
        assert est.sigma_alpha[0] == pytest.approx(x.var() / 2, rel=0.03)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            estimate_scale(np.zeros(999), 1.5)

    def test_standard_error_reported(self):
        x = sample(StableParams(1.5), (20_000, 2), make_rng(8))
        est = estimate_scale(x, 1.5)
        assert est.sigma_alpha_se.shape == (2,) and np.all(est.sigma_alpha_se > 0)


class TestMoments:
    def test_stable_draws(self):
        x = sample(StableParams(1.5, 2.0), 1_000_000, make_rng(9))
        chk = fractional_moment_check(x, 0.5, 1.5, 0.0, 2.0)
        assert chk.passed and chk.ratio == pytest.approx(1, abs=0.05)

    def test_gaussian_second_moment(self):
        x = sample(StableParams(2.0, 0.5), 1_000_000, make_rng(10))
        assert fractional_moment_check(x, 2.0, 2.0, 0.0, 0.5).ratio == pytest.approx(1, abs=0.02)

    def test_rejects_p_above_alpha(self):
        with pytest.raises(ValueError):
            fractional_moment_check(np.ones(10), 1.6, 1.5, 0.0, 1.0)

    def test_ecf_modulus_error(self):
        p = StableParams(0.8, 0.5)
        x = sample(p, 200_000, make_rng(11))
        assert np.all(ecf_modulus_error(x, p, [0.25, 0.5, 1.0]) < 0.02)


@pytest.fixture(scope="module")
def ens():
    cfg = SimConfig(K5, NoiseSpec.symmetric(1.5, 5), dt=2e-3, horizon=4.0, paths=3000, seed=21,
                    record_stride=500)
    return run(cfg)


class TestStationarity:
    def test_windows_agree(self, ens):
        late = ens.y[ens.times >= 2.0 - 1e-9].reshape(-1, 5)
        later = ens.y[ens.times >= 3.0 - 1e-9].reshape(-1, 5)
        a, b = estimate_scale(late.ravel(), 1.5), estimate_scale(later.ravel(), 1.5)
        se = math.hypot(a.sigma_alpha_se[0], b.sigma_alpha_se[0])
        assert abs(a.sigma_alpha[0] - b.sigma_alpha[0]) <= 3 * se

    def test_halving_dt(self, ens):
        fine = run(SimConfig(K5, NoiseSpec.symmetric(1.5, 5), dt=1e-3, horizon=4.0, paths=3000, seed=22))
        a = estimate_scale(ens.terminal.ravel(), 1.5)
        b = estimate_scale(fine.terminal.ravel(), 1.5)
        se = math.hypot(a.sigma_alpha_se[0], b.sigma_alpha_se[0])
        assert abs(a.sigma_alpha[0] - b.sigma_alpha[0]) <= 3 * se
