import math

import numpy as np
import pytest

from spiketensor.decomposition import (
    core_proportionality_check,
    hooi,
    hooi_sweep,
    reconstruct,
    reconstruction_error,
    truncated_mlsvd,
)
from spiketensor.linalg import mean_alignment
from spiketensor.rmt_theory import sigma_n, spike_prediction
from spiketensor.spiked_model import make_rng, make_signal, sample_instance
from spiketensor.tensor_core import TuckerFactors, contract, frob_norm, mode_gram, unfold


def mode_sv_sq(signal, k):
    return np.linalg.svd(unfold(signal.core, k), compute_uv=False) ** 2


def spiked(seed, dims=(12, 14, 16), ranks=(2, 3, 2), omega=None):
    rng = np.random.default_rng(seed)
    if omega is None:
        omega = float(rng.uniform(1.0, 30.0))
    return sample_instance(dims, ranks, sum(dims), omega, seed=seed)


class TestTruncatedMlsvd:
    def test_exact_rank_noiseless(self):
        p = make_signal((8, 9, 10), (2, 3, 4), 27, 10.0, make_rng(0))
        t = p.full()
        f = truncated_mlsvd(t, (2, 3, 4))
        assert reconstruction_error(t, f) == pytest.approx(0.0, abs=1e-9)
        for x, u in zip(p.factors, f.factors):
            assert mean_alignment(x, u) == pytest.approx(1.0, abs=1e-9)

    def test_matrix_eckart_young(self):
        m = np.random.default_rng(1).standard_normal((7, 9))
        f = truncated_mlsvd(m, (3, 3))
        s = np.linalg.svd(m, compute_uv=False)
        assert reconstruction_error(m, f) ** 2 == pytest.approx(np.sum(s[3:] ** 2), rel=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_factor_spans_gram_eigenvectors(self, seed):
        t = spiked(seed).observed
        f = truncated_mlsvd(t, (2, 3, 2))
        for k, u in enumerate(f.factors):
            vals, vecs = np.linalg.eigh(unfold(t, k) @ unfold(t, k).T)
            top = vecs[:, np.argsort(vals)[::-1][: u.shape[1]]]
            assert np.max(np.abs(u @ u.T - top @ top.T)) <= 1e-8

    @pytest.mark.parametrize("seed", range(10))
    def test_error_bound_by_discarded_energy(self, seed):
        t = spiked(seed).observed
        ranks = (2, 3, 2)
        f = truncated_mlsvd(t, ranks)
        total = frob_norm(t) ** 2
        kept = [np.sort(np.linalg.eigvalsh(mode_gram(t, k)))[::-1][:r].sum() for k, r in enumerate(ranks)]
        bound = sum(total - k for k in kept)
        assert reconstruction_error(t, f) ** 2 <= bound * (1 + 1e-12)

    def test_rank_too_large(self):
        with pytest.raises(ValueError):
            truncated_mlsvd(np.zeros((2, 3, 4)), (3, 1, 1))


class TestHooi:
    def test_noiseless_one_iteration(self):
        p = make_signal((8, 9, 10), (2, 3, 4), 27, 10.0, make_rng(2))
        t = p.full()
        rep = hooi(t, (2, 3, 4))
        assert rep.iterations == 1 and rep.converged
        assert rep.objective_trace[-1] == pytest.approx(frob_norm(t), rel=1e-12)
        assert len(rep.objective_trace) == rep.iterations + 1

    def test_full_ranks(self):
        t = np.random.default_rng(3).standard_normal((3, 4, 5))
        rep = hooi(t, t.shape)
        assert rep.iterations == 1
        assert reconstruction_error(t, rep.factors) == pytest.approx(0.0, abs=1e-12)
        for u in rep.factors.factors:
            np.testing.assert_allclose(u.T @ u, np.eye(u.shape[0]), atol=1e-12)

    def test_zero_tensor(self):
        rep = hooi(np.zeros((3, 4, 5)), (1, 2, 2))
        assert rep.converged
        assert reconstruction_error(np.zeros((3, 4, 5)), rep.factors) == 0.0

    @pytest.mark.parametrize("seed", range(50))
    def test_monotone_and_duality(self, seed):
        t = spiked(seed).observed
        rep = hooi(t, (2, 3, 2), tol=1e-10, max_iter=200)
        trace = rep.objective_trace
        for a, b in zip(trace, trace[1:]):
            assert b >= a - 1e-9 * a
        err = reconstruction_error(t, rep.factors)
        assert frob_norm(t) ** 2 == pytest.approx(trace[-1] ** 2 + err**2, rel=1e-8)

    @pytest.mark.parametrize("seed", range(10))
    def test_fixed_point(self, seed):
        t = spiked(seed, omega=20.0).observed
        rep = hooi(t, (2, 3, 2), tol=1e-12, max_iter=500)
        assert rep.converged
        again = hooi_sweep(t, rep.factors.factors, (2, 3, 2))
        for u, v in zip(rep.factors.factors, again):
            assert abs(1 - mean_alignment(u, v)) < 1e-8

    def test_jacobi_scheme_runs(self):
        t = spiked(0).observed
        gs = hooi(t, (2, 3, 2), tol=1e-10, max_iter=500)
        jac = hooi(t, (2, 3, 2), tol=1e-10, max_iter=500, scheme="jacobi")
        assert jac.objective_trace[-1] == pytest.approx(gs.objective_trace[-1], rel=1e-4)
        with pytest.raises(ValueError):
            hooi(t, (2, 3, 2), scheme="newton")

    def test_bad_arguments(self):
        t = np.zeros((3, 3, 3))
        with pytest.raises(ValueError):
            hooi(t, (1, 1, 1), tol=0.0)
        with pytest.raises(ValueError):
            hooi(t, (1, 1, 1), max_iter=0)
        with pytest.raises(ValueError):
            hooi(t, (4, 1, 1))

    def test_first_iteration_dominance(self):
        dims, ranks, n_param = (30, 40, 50), (2, 2, 2), 120
        sigma = sigma_n(dims, n_param)
        wins = trials = 0
        seed = 0
        while trials < 100:
            seed += 1
            inst = sample_instance(dims, ranks, n_param, 12.0, seed=seed)
            if min(mode_sv_sq(inst.signal, k).min() for k in range(3)) <= sigma:
                continue
            trials += 1
            t = inst.observed
            init = truncated_mlsvd(t, ranks)
            rep = hooi(t, ranks, init=init, max_iter=1)
            ok = all(
                mean_alignment(x, u1) >= mean_alignment(x, u0)
                for x, u0, u1 in zip(inst.signal.factors, init.factors, rep.factors.factors)
            )
            wins += ok
        assert wins >= 95


@pytest.mark.parametrize("seed", range(50))
def test_quasi_optimality(seed):
    t = spiked(seed).observed
    ranks = (2, 3, 2)
    e_mlsvd = reconstruction_error(t, truncated_mlsvd(t, ranks))
    e_hooi = reconstruction_error(t, hooi(t, ranks).factors)
    assert e_mlsvd <= math.sqrt(3) * e_hooi


class TestReconstruct:
    def test_delegates_to_full(self):
        p = make_signal((4, 5, 6), (1, 2, 3), 15, 3.0, make_rng(4))
        np.testing.assert_array_equal(reconstruct(p), p.full())

    def test_shape_mismatch(self):
        p = make_signal((4, 5, 6), (1, 2, 3), 15, 3.0, make_rng(4))
        with pytest.raises(ValueError):
            reconstruction_error(np.zeros((4, 5, 7)), p)


class TestCoreProportionality:
    def test_noiseless(self):
        p = make_signal((8, 9, 10), (2, 3, 2), 27, 10.0, make_rng(5))
        f = truncated_mlsvd(p.full(), (2, 3, 2))
        np.testing.assert_allclose(core_proportionality_check(f, p), 1.0, atol=1e-8)

    def test_orthogonal_estimate(self):
        e = np.eye(8)
        truth = TuckerFactors(np.ones((2, 2, 2)), [e[:, :2]] * 3)
        wrong = [e[:, 4:6]] * 3
        est = TuckerFactors(contract(truth.full(), wrong), wrong)
        np.testing.assert_allclose(core_proportionality_check(est, truth), 0.0, atol=1e-12)

    def test_strong_snr_tracks_alignment_product(self):
        dims, ranks = (40, 50, 60), (2, 2, 2)
        n_param = sum(dims)
        sigma = sigma_n(dims, n_param)
        inst = sample_instance(dims, ranks, n_param, 400.0, seed=11)
        f = truncated_mlsvd(inst.observed, ranks)
        ratios = core_proportionality_check(f, inst.signal)
        zeta = [[spike_prediction(s, sigma).zeta_plus for s in mode_sv_sq(inst.signal, k)] for k in range(3)]
        # with every zeta close to 1 the ratios must be close to 1 as well
        assert min(min(z) for z in zeta) > 0.95
        big = np.abs(inst.signal.core) > 0.3 * np.abs(inst.signal.core).max()
        assert np.all(np.abs(ratios[big] - 1) < 0.15)

    def test_rank_mismatch(self):
        a = TuckerFactors(np.ones((1, 1)), [np.ones((3, 1)), np.ones((3, 1))])
        b = TuckerFactors(np.ones((2, 1)), [np.eye(3)[:, :2], np.ones((3, 1))])
        with pytest.raises(ValueError):
            core_proportionality_check(a, b)
