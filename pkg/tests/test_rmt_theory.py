import math

import numpy as np
import pytest

from spiketensor.rmt_theory import (
    count_outliers,
    hooi_convergence_diagnostic,
    ks_distance,
    noise_contraction_bound,
    phase_transitions,
    predicted_mean_alignment,
    scales,
    semicircle_cdf,
    semicircle_pdf,
    semicircle_quantile,
    spike_prediction,
    stieltjes_sc,
)
from spiketensor.spiked_model import haar_basis, make_rng, make_signal
from spiketensor.tensor_core import TuckerFactors, contract, frob_norm


class TestScales:
    def test_figure3_setting(self):
        s = scales((300, 500, 700), 1500, 0)
        assert s.mu == pytest.approx(500 * 700 / 1500, rel=1e-15)
        assert s.sigma == pytest.approx(6.8313, abs=5e-5)
        assert s.sigma == pytest.approx(math.sqrt(300 * 500 * 700) / 1500, rel=1e-15)

    @pytest.mark.parametrize("n", [10, 37, 300])
    def test_cubic(self, n):
        s = scales((n, n, n), 3 * n, 1)
        assert s.mu == pytest.approx(n / 3, rel=1e-14)
        assert s.sigma == pytest.approx(math.sqrt(n) / 3, rel=1e-14)

    def test_sigma_mode_free_and_identity(self):
        dims = (40, 70, 90)
        n_param = sum(dims)
        pairs = [scales(dims, n_param, k) for k in range(3)]
        assert len({p.sigma for p in pairs}) == 1
        for k, p in enumerate(pairs):
            assert p.mu * dims[k] / n_param == pytest.approx(p.sigma**2, rel=1e-13)


class TestSemicircle:
    def test_pdf_values(self):
        assert semicircle_pdf(0.0) == pytest.approx(1 / math.pi)
        assert semicircle_pdf(2.0) == 0.0
        assert semicircle_pdf(-2.0) == 0.0
        assert semicircle_pdf(3.0) == 0.0

    def test_pdf_integrates_to_one(self):
        # x = 2 sin(t) removes the square-root edges; composite Simpson on 10^4 points
        t = np.linspace(-np.pi / 2, np.pi / 2, 10001)
        f = semicircle_pdf(2 * np.sin(t)) * 2 * np.cos(t)
        h = t[1] - t[0]
        integral = h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())
        assert integral == pytest.approx(1.0, abs=1e-6)

    def test_cdf_values(self):
        assert semicircle_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        assert semicircle_cdf(2.0) == 1.0
        assert semicircle_cdf(-2.5) == 0.0

    def test_cdf_derivative(self):
        x = np.linspace(-1.95, 1.95, 79)
        h = 1e-5
        fd = (semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2 * h)
        np.testing.assert_allclose(fd, semicircle_pdf(x), atol=1e-6)

    def test_cdf_symmetric_monotone(self):
        x = np.linspace(-3, 3, 601)
        np.testing.assert_allclose(semicircle_cdf(-x) + semicircle_cdf(x), 1.0, atol=1e-14)
        assert np.all(np.diff(semicircle_cdf(x)) >= 0)

    def test_quantile_inverts_cdf(self):
        p = np.linspace(0.01, 0.99, 50)
        np.testing.assert_allclose(semicircle_cdf(semicircle_quantile(p)), p, atol=1e-12)


class TestStieltjes:
    def test_residual_and_branch_on_grid(self):
        re = np.linspace(-5, 5, 100)
        im = np.concatenate([-np.logspace(-3, 1, 50), np.logspace(-3, 1, 50)])
        worst = 0.0
        for a in re:
            for b in im:
                z = complex(a, b)
                m = stieltjes_sc(z)
                worst = max(worst, abs(m * m + z * m + 1))
                assert z.imag * m.imag > 0
        assert worst <= 1e-12

    def test_real_perfect_square(self):
        assert stieltjes_sc(2.5) == pytest.approx(-0.5, abs=1e-15)

    def test_decay(self):
        z = 1e6j
        assert abs(stieltjes_sc(z) * z + 1) < 1e-6

    def test_on_support(self):
        with pytest.raises(ValueError):
            stieltjes_sc(1.0)

    def test_spike_relation(self):
        for rho in np.linspace(1.01, 50, 200):
            xi = spike_prediction(rho, 1.0).xi
            assert stieltjes_sc(xi).real == pytest.approx(-1 / rho, abs=1e-10)


class TestSpikePrediction:
    def test_threshold(self):
        p = spike_prediction(1.0, 1.0)
        assert p.xi is None and p.zeta_plus == 0.0

    def test_rho_two(self):
        p = spike_prediction(2.0, 1.0)
        assert (p.rho, p.xi, p.zeta_plus) == (2.0, 2.5, 0.75)

    def test_scaled_by_sigma(self):
        p = spike_prediction(6.0, 3.0)
        assert p.rho == 2.0

    def test_monotone_and_continuous(self):
        rhos = np.linspace(1.0 + 1e-9, 30, 500)
        rhos_open = rhos[1:]
        preds = [spike_prediction(r, 1.0) for r in rhos]
        xi = np.array([p.xi for p in preds])
        zeta = np.array([p.zeta_plus for p in preds])
        assert np.all(np.diff(xi) > 0) and np.all(np.diff(zeta) > 0)
        assert xi[0] == pytest.approx(2.0, abs=1e-6)
        assert zeta[0] == pytest.approx(0.0, abs=1e-6)
        assert all(spike_prediction(r, 1.0).xi > 2 for r in rhos_open)


class TestMeanAlignmentPrediction:
    def test_below_threshold(self):
        assert predicted_mean_alignment([0.5, 1.0, 0.1], 1.0) == 0.0

    def test_large(self):
        assert predicted_mean_alignment([1e9, 1e9], 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_analytic(self):
        sigma = 3.0
        assert predicted_mean_alignment([2 * sigma, sigma / 2], sigma) == pytest.approx(0.375)

    def test_transitions(self):
        np.testing.assert_allclose(phase_transitions([4.0, 2.0, 0.0], 2.0), [0.5, 1.0, np.inf])


class TestKs:
    def test_quantile_sample(self):
        sample = semicircle_quantile((np.arange(1000) + 0.5) / 1000)
        assert ks_distance(sample) < 0.01

    def test_zeros(self):
        assert ks_distance(np.zeros(10)) == pytest.approx(0.5)

    def test_single_far_point(self):
        assert ks_distance([-3.0]) == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            ks_distance([])


class TestOutliers:
    def test_counts(self):
        z = np.array([-1.0, 1.9, 2.2, 2.31, 5.0])
        assert count_outliers(z, 0.3) == 2
        assert count_outliers(z, 1e9) == 0

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            count_outliers([1.0], 0.0)


def lemma_bound_literal(dims, ranks, delta, c):
    d = len(dims)
    first = 0.0
    for n, r in zip(dims, ranks):
        first += r * (n - (r + 1) / 2)
    prod_r = 1
    for r in ranks:
        prod_r *= r
    return 16 * (first * math.log(c * d / math.log(3 / 2)) + math.log(1 / delta * max(1, math.exp(prod_r / 2 - 1))))


class TestNoiseContractionBound:
    def test_rank_one_tail(self):
        dims, ranks, delta = (10, 20, 30), (1, 1, 1), 0.05
        first = sum(n - 1 for n in dims) * math.log(3 / math.log(1.5))
        assert noise_contraction_bound(dims, ranks, delta) == pytest.approx(16 * (first + math.log(1 / delta)), rel=1e-15)

    @pytest.mark.parametrize(
        "dims, ranks, delta, c",
        [((50, 50, 50), (2, 2, 2), 0.01, 1.0), ((10, 20, 30), (3, 4, 5), 0.1, 2.5), ((7, 8, 9, 10), (1, 2, 3, 2), 0.5, 0.7)],
    )
    def test_literal_rederivation(self, dims, ranks, delta, c):
        assert noise_contraction_bound(dims, ranks, delta, c) == lemma_bound_literal(dims, ranks, delta, c)

    def test_monotone(self):
        base = noise_contraction_bound((20, 20, 20), (2, 2, 2), 0.1)
        assert noise_contraction_bound((21, 20, 20), (2, 2, 2), 0.1) > base
        assert noise_contraction_bound((20, 20, 21), (2, 2, 2), 0.1) > base
        assert noise_contraction_bound((20, 20, 20), (2, 2, 2), 0.05) > base

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            noise_contraction_bound((5, 5, 5), (1, 1, 1), 1.0)

    def test_monte_carlo_sup_below_bound(self):
        dims, ranks = (50, 50, 50), (2, 2, 2)
        bound = noise_contraction_bound(dims, ranks, 0.01, 1.0)
        rng = make_rng(20240611)
        noise = rng.standard_normal(dims)
        sup = 0.0
        for _ in range(1000):
            a = [haar_basis(n, r, rng) for n, r in zip(dims, ranks)]
            sup = max(sup, frob_norm(contract(noise, a)) ** 2)
        assert 0 < sup <= bound


def brute_force_diagnostic(signal, inits):
    full = signal.full()
    best = np.inf
    for k, x in enumerate(signal.factors):
        for q in range(x.shape[1]):
            mats = list(inits)
            mats[k] = x[:, q:q + 1]
            best = min(best, frob_norm(contract(full, mats)))
    return best


class TestHooiDiagnostic:
    def test_truth_as_init(self):
        rng = make_rng(1)
        core = np.zeros((2, 2, 2))
        core[0, 0, 0], core[1, 1, 1] = 3.0, 0.5
        xs = [haar_basis(n, 2, rng) for n in (6, 7, 8)]
        signal = TuckerFactors(core, xs)
        assert hooi_convergence_diagnostic(signal, xs) == pytest.approx(0.5, rel=1e-12)

    def test_orthogonal_init(self):
        e = np.eye(6)
        signal = TuckerFactors(np.ones((2, 2, 2)), [e[:, :2]] * 3)
        assert hooi_convergence_diagnostic(signal, [e[:, 2:4]] * 3) == 0.0

    @pytest.mark.parametrize("seed", range(3))
    def test_brute_force(self, seed):
        rng = make_rng(seed)
        signal = make_signal((8, 9, 10), (2, 3, 4), 27, 5.0, rng)
        inits = [haar_basis(n, r, rng) for n, r in zip((8, 9, 10), (2, 3, 4))]
        assert hooi_convergence_diagnostic(signal, inits) == pytest.approx(brute_force_diagnostic(signal, inits), abs=1e-10)

    def test_mismatch(self):
        signal = TuckerFactors(np.ones((1, 1)), [np.ones((3, 1)), np.ones((4, 1))])
        with pytest.raises(ValueError):
            hooi_convergence_diagnostic(signal, [np.ones((3, 1)), np.ones((5, 1))])
