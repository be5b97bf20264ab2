"""Kernel-matrix assembly and Gaussian-process posterior checks."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from emgpr import (
    KernelParams,
    MixedKernel,
    RankDeficientError,
    SampleSet,
    assemble_kernel_matrix,
    cross_kernel_matrix,
    eit_gpr_estimate,
    em_kernel_scalar,
    gpr_posterior,
    kernel_entropy,
)
from conftest import K0, WAVELENGTH
from oracles import sphere_oracle_kernel


def single(mu, sigma2=1.0, k0=K0):
    return MixedKernel.single(KernelParams(mu=np.asarray(mu, dtype=float), sigma2=sigma2, k0=k0))


def random_cloud(rng, n, scale=1.5):
    pos = rng.uniform(-scale, scale, (n, 3)) * WAVELENGTH
    pols = rng.standard_normal((n, 3))
    pols /= np.linalg.norm(pols, axis=1, keepdims=True)
    return SampleSet.from_arrays(pos, np.zeros(n), pols)


class TestAssembly:
    def test_single_sample(self):
        A = SampleSet.from_arrays(np.zeros((1, 3)))
        km = assemble_kernel_matrix(A, single([3.0, 0.0, 1.0], sigma2=2.0), noise_var=0.1)
        assert km.matrix.shape == (1, 1)
        assert km.noisy
        val = km.matrix[0, 0]
        assert val.imag == 0.0
        assert val.real > 0.1

    def test_degenerate_mixture_equals_single(self, rng):
        A = random_cloud(rng, 6)
        p = KernelParams(mu=np.array([1.0, 0.5, 2.0]), sigma2=1.2, k0=K0)
        one = assemble_kernel_matrix(A, MixedKernel.single(p), 0.0).matrix
        # S=1 with w=[1] is the degenerate convex combination
        same = assemble_kernel_matrix(A, MixedKernel((p,), np.array([1.0])), 0.0).matrix
        assert np.array_equal(one, same)

    def test_half_wavelength_pair_matches_entry_formula_and_quadrature(self):
        A = SampleSet.from_arrays(
            np.array([[0.0, 0.0, 0.0], [WAVELENGTH / 2, 0.0, 0.0]]))
        K = assemble_kernel_matrix(A, single([0.0, 0.0, 0.0], sigma2=1.0), 0.0).matrix
        a, b = A[0], A[1]
        direct = em_kernel_scalar(a, b, single([0, 0, 0]).sub_params[0])
        assert K[0, 1] == pytest.approx(direct, rel=1e-12)
        oracle = sphere_oracle_kernel(a.position - b.position, np.zeros(3), 1.0, K0)
        assert K[0, 1] == pytest.approx(oracle[1, 1], abs=1e-8)

    def test_hermitian_and_noise_floor(self, rng):
        A = random_cloud(rng, 20)
        km = assemble_kernel_matrix(A, single([0.0, 4.0, 3.0], sigma2=2.0), noise_var=0.3)
        M = km.matrix
        assert np.abs(M - M.conj().T).max() < 1e-10
        eigs = np.linalg.eigvalsh(M)
        assert eigs.min() >= 0.3 * (1 - 1e-8)

    def test_psd_across_concentrations_and_mixtures(self, rng):
        for n, mu_norm, S in ((16, 0.0, 1), (24, 5.0, 2), (32, 50.0, 4)):
            A = random_cloud(rng, n)
            params = []
            for s in range(S):
                direction = rng.standard_normal(3)
                direction /= np.linalg.norm(direction)
                params.append(KernelParams(mu=mu_norm * direction, sigma2=1.0, k0=K0))
            w = rng.uniform(0.2, 1.0, S)
            kernel = MixedKernel(tuple(params), w / w.sum())
            K = assemble_kernel_matrix(A, kernel, 0.0).matrix
            eigs = np.linalg.eigvalsh(K)
            assert eigs.min() >= -1e-8 * eigs.max()

    @pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
    def test_non_finite_entry_names_pair(self):
        # an extreme concentration overflows sinh and poisons the ratio
        A = SampleSet.from_arrays(np.array([[0.0, 0, 0], [0.1, 0, 0]]))
        kernel = single([800.0, 0.0, 0.0])
        with pytest.raises(ValueError, match=r"sample pair \(\d+, \d+\)"):
            assemble_kernel_matrix(A, kernel, 0.0)


class TestPosterior:
    def test_scalar_wiener_filter(self):
        A = SampleSet.from_arrays(np.zeros((1, 3)))
        kernel = single([0.0, 0.0, 0.0], sigma2=3.0)  # k(x,x) = 1
        y = np.array([0.7 - 0.2j])
        mean, var = gpr_posterior(A, y, A, kernel, noise_var=0.5)
        assert mean[0] == pytest.approx(y[0] / 1.5, rel=1e-12)
        assert var[0] == pytest.approx(1.0 - 1.0 / 1.5, rel=1e-9)

    def test_noiseless_interpolation(self, rng):
        A = random_cloud(rng, 8, scale=3.0)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        kernel = single([0.0, 1.0, 0.0])
        mean, var = gpr_posterior(A, y, A, kernel, noise_var=0.0)
        assert_allclose(mean, y, rtol=1e-7, atol=1e-9)
        assert np.all(var >= 0.0)

    def test_rank_deficiency_reported(self):
        pos = np.zeros((2, 3))  # exactly duplicated sample: singular Gram
        A = SampleSet.from_arrays(pos)
        y = np.array([1.0, 1.0], dtype=complex)
        with pytest.raises(RankDeficientError):
            gpr_posterior(A, y, A, single([0, 0, 0]), noise_var=0.0)

    def test_matches_closed_form_mmse(self, rng):
        for _ in range(10):
            n = int(rng.integers(4, 16))
            A = random_cloud(rng, n)
            kernel = single(rng.uniform(-3, 3, 3), sigma2=1.5)
            nv = rng.uniform(0.05, 1.0)
            y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            mean, _ = gpr_posterior(A, y, A, kernel, nv)
            R = assemble_kernel_matrix(A, kernel, 0.0).matrix
            closed = R @ np.linalg.inv(R + nv * np.eye(n)) @ y
            assert np.abs(mean - closed).max() <= 1e-12 * np.abs(closed).max()

    def test_posterior_variance_bounded_by_prior(self, rng):
        A = random_cloud(rng, 10)
        B = random_cloud(rng, 5)
        kernel = single([2.0, 0.0, 1.0], sigma2=2.0)
        y = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        _, var = gpr_posterior(A, y, B, kernel, noise_var=0.2)
        prior = assemble_kernel_matrix(B, kernel, 0.0).matrix.diagonal().real
        assert np.all(var >= 0.0)
        assert np.all(var <= prior + 1e-12)

    def test_permutation_equivariance(self, rng):
        A = random_cloud(rng, 12)
        B = random_cloud(rng, 4)
        kernel = single([1.0, 2.0, 0.0])
        y = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        mean, _ = gpr_posterior(A, y, B, kernel, 0.3)
        order = rng.permutation(12)
        mean_p, _ = gpr_posterior(A.permuted(order), y[order], B, kernel, 0.3)
        assert np.abs(mean - mean_p).max() < 1e-12 * max(1.0, np.abs(mean).max())


class TestTwoStageEstimate:
    def test_noiseless_self_prediction_returns_pilots(self, rng):
        A = random_cloud(rng, 8, scale=3.0)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        h_hat = eit_gpr_estimate(A, y, A, single([0.5, 0.5, 1.0]), noise_var=0.0)
        assert_allclose(h_hat, y, rtol=1e-7, atol=1e-9)

    def test_equals_posterior_mean(self, rng):
        A = random_cloud(rng, 10)
        B = random_cloud(rng, 6)
        kernel = single([0.0, 3.0, 1.0], sigma2=1.3)
        y = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        mean, _ = gpr_posterior(A, y, B, kernel, 0.4)
        h_hat = eit_gpr_estimate(A, y, B, kernel, 0.4)
        assert np.abs(mean - h_hat).max() < 1e-12 * max(1.0, np.abs(mean).max())

    def test_cross_matrix_shape(self, rng):
        A = random_cloud(rng, 7)
        B = random_cloud(rng, 3)
        W = cross_kernel_matrix(B, A, single([1.0, 0.0, 0.0]))
        assert W.shape == (3, 7)
        direct = em_kernel_scalar(B[1], A[4], single([1.0, 0.0, 0.0]).sub_params[0])
        assert W[1, 4] == pytest.approx(direct, rel=1e-12)


class TestKernelEntropy:
    def test_identity(self):
        n = 9
        assert kernel_entropy(np.eye(n)) == pytest.approx(n * np.log(np.pi * np.e), rel=1e-12)

    def test_scaling(self):
        n, c = 6, 2.7
        assert kernel_entropy(c * np.eye(n)) == pytest.approx(
            n * np.log(np.pi * np.e * c), rel=1e-12)

    def test_rejects_indefinite_matrix(self):
        with pytest.raises(ValueError):
            kernel_entropy(np.diag([1.0, -1.0]))

    def test_floor_keeps_entropy_finite(self):
        H = kernel_entropy(np.diag([1.0, 0.0]))
        assert np.isfinite(H)
