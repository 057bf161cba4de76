import json

import numpy as np
import pytest

from stable_consensus.bounds import (bound_claims, bound_near2, bound_report, bound_theorem1,
                                     claim_pair_bounds, eigvec_norm_power, high_constants,
                                     low_constants, reports_to_csv, reports_to_json, tightness_report)
from stable_consensus.fluctuation import sigma_alpha_complete, sigma_alpha_gaussian, sigma_alpha_total
from stable_consensus.graph import (complete_graph, cycle_graph, graph_spectrum, path_graph,
                                   random_connected_graph, star_graph)
from stable_consensus.kernel import SpectralKernel, lambda_table

# scipy quad (inner) inside scipy quad (outer) of the near-Gaussian formula
NEAR2_P3_19 = 0.3809029654826581
NEAR2_K4_18 = 0.30365682352103845

TOL = 1e-8


def kernel(g):
    return SpectralKernel(graph_spectrum(g))


RANDOM = [random_connected_graph(n, p=p, seed=s, weights=w)
          for s, (n, p, w) in enumerate([(5, 0.2, None), (7, 0.4, (0.1, 5.0)), (9, 0.1, None),
                                         (11, 0.6, (0.5, 2.0)), (12, 0.05, (0.05, 10.0))])]


class TestConstants:
    def test_low(self):
        c = low_constants(5, 0.5)
        assert c["c1"] == pytest.approx(1 / (0.5 * 4 ** 0.5))
        assert c["c2"] == pytest.approx((1 + 4 ** 0.5) / (0.5 * 5 ** -0.5))

    def test_high_printed_d4(self):
        d = high_constants(4, 1.5, 2.0)
        assert d["d4"] == pytest.approx((1 + 3 ** -0.5) * (1 + 1.5 * 2 ** 0.5) / (4 ** 0.5 * 3 ** -1.5))

    def test_norm_powers_at_least_one(self):
        s = graph_spectrum(random_connected_graph(8, seed=3))
        for a in (0.3, 1.0, 1.7):
            # ||q||_a >= ||q||_2 = 1 for a < 2
            assert np.all(eigvec_norm_power(s, a) >= 1 - 1e-12)
        np.testing.assert_allclose(eigvec_norm_power(s, 2.0), 1.0)


class TestTheorem:
    @pytest.mark.parametrize("n", [3, 5, 8])
    @pytest.mark.parametrize("alpha", [0.2, 0.6, 1.0])
    def test_exact_on_complete_graphs(self, n, alpha):
        b = bound_theorem1(kernel(complete_graph(n)), alpha)
        assert b.low == pytest.approx(sigma_alpha_complete(n, n, alpha), rel=1e-6)

    def test_branches(self):
        k = kernel(path_graph(4))
        assert bound_theorem1(k, 0.5).high is None
        assert bound_theorem1(k, 1.5).low is None
        both = bound_theorem1(k, 1.0)
        assert both.value == min(both.low, both.high)

    def test_p3_low_alpha(self):
        k = kernel(path_graph(3))
        assert bound_theorem1(k, 0.8).value >= sigma_alpha_total(k, 0.8)

    def test_rejects_alpha(self):
        with pytest.raises(ValueError):
            bound_theorem1(kernel(path_graph(3)), 2.5)


class TestClaims:
    @pytest.mark.parametrize("alpha", [0.3, 0.8, 1.0])
    def test_exact_pairs_on_complete_graphs(self, alpha):
        k = kernel(complete_graph(6))
        np.testing.assert_allclose(claim_pair_bounds(k, alpha), k.sigma_matrix(alpha), rtol=1e-7)

    def test_p3_pairs(self):
        k = kernel(path_graph(3))
        assert np.all(claim_pair_bounds(k, 1.5) >= k.sigma_matrix(1.5) * (1 - 10 * TOL))

    @pytest.mark.parametrize("g", RANDOM + [path_graph(6), cycle_graph(7)])
    @pytest.mark.parametrize("alpha", [0.3, 0.9, 1.0, 1.2, 1.6, 1.95])
    def test_pairwise_soundness(self, g, alpha):
        k = kernel(g)
        assert np.all(claim_pair_bounds(k, alpha) >= k.sigma_matrix(alpha) * (1 - 10 * TOL))


class TestNear2:
    def test_gaussian_endpoint(self):
        k = kernel(random_connected_graph(8, seed=2))
        assert bound_near2(k, 2.0) == pytest.approx(sigma_alpha_gaussian(k.spectrum), rel=1e-12)

    def test_p3_oracle(self):
        assert bound_near2(kernel(path_graph(3)), 1.9) == pytest.approx(NEAR2_P3_19, rel=1e-7)

    def test_k4_oracle(self):
        assert bound_near2(kernel(complete_graph(4)), 1.8) == pytest.approx(NEAR2_K4_18, rel=1e-7)

    def test_continuity_at_two(self):
        k = kernel(path_graph(5))
        vals = [bound_near2(k, a) for a in (1.99, 1.999, 1.9999, 2.0)]
        assert np.all(np.diff(vals) <= 0)
        assert vals[-2] == pytest.approx(vals[-1], rel=1e-3)

    @pytest.mark.parametrize("alpha", [1.0, 0.5])
    def test_rejects_low_alpha(self, alpha):
        with pytest.raises(ValueError):
            bound_near2(kernel(path_graph(3)), alpha)

    def test_known_small_graph_violation(self):
        # |f| <= g does not give |ln|f|| <= |ln g|; on K3 the formula undershoots
        k = kernel(complete_graph(3))
        assert bound_near2(k, 1.7) < sigma_alpha_total(k, 1.7)

    @pytest.mark.parametrize("n", [5, 8])
    def test_sound_on_larger_complete_graphs(self, n):
        k = kernel(complete_graph(n))
        for a in (1.3, 1.7, 1.9):
            assert bound_near2(k, a) >= sigma_alpha_total(k, a)


class TestReport:
    @pytest.mark.parametrize("g", RANDOM)
    def test_theorem_and_claims_sound(self, g):
        for r in tightness_report(kernel(g), [0.3, 0.7, 1.0, 1.3, 1.7, 2.0]):
            assert r.thm >= r.exact * (1 - 10 * TOL)
            assert r.claims >= r.exact * (1 - 10 * TOL)

    def test_complete_graph_ratio(self):
        r = bound_report(kernel(complete_graph(5)), 0.6)
        assert r.ratios()["thm"] == pytest.approx(1.0, abs=1e-4)
        assert r.near2 is None and r.violations() == []

    @pytest.mark.parametrize("g", [random_connected_graph(8, p=0.9, seed=0), star_graph(5), cycle_graph(8)])
    def test_ratio_grows_as_alpha_falls(self, g):
        reps = tightness_report(kernel(g), [0.1, 0.5, 1.0])
        ratios = [r.ratios()["thm"] for r in reps]
        assert ratios[0] > ratios[1] > ratios[2]

    def test_ratio_growth_is_not_universal(self):
        # on a long path the ratio peaks near alpha = 0.5 and falls again
        reps = tightness_report(kernel(path_graph(6)), [0.1, 0.5, 1.0])
        ratios = [r.ratios()["thm"] for r in reps]
        assert ratios[0] < ratios[2] < ratios[1]

    def test_spread_hurts_tightness(self):
        narrow = kernel(random_connected_graph(8, p=0.9, seed=0))
        wide = kernel(path_graph(8))
        assert narrow.lambda_max / narrow.lambda2 < wide.lambda_max / wide.lambda2
        for a in (0.5, 1.5):
            assert bound_report(narrow, a).ratios()["thm"] < bound_report(wide, a).ratios()["thm"]

    def test_serialization(self):
        reps = tightness_report(kernel(path_graph(3)), [0.5, 1.5])
        lines = reports_to_csv(reps).splitlines()
        assert lines[0].startswith("alpha,exact,thm_bound,claims_bound,near2_bound")
        assert lines[1].split(",")[4] == ""
        assert len(json.loads(reports_to_json(reps))) == 2

    def test_claims_total_matches_pair_sum(self):
        k = kernel(path_graph(4))
        assert bound_claims(k, 1.3) == pytest.approx(claim_pair_bounds(k, 1.3).sum())
