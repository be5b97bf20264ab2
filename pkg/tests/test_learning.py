"""Likelihood, analytic gradients, and the hyperparameter fitting loop."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from emgpr import (
    ArmijoState,
    KernelParams,
    MixedKernel,
    SampleSet,
    armijo_ascent_step,
    assemble_kernel_matrix,
    estimate_azimuth,
    grad_mu,
    grad_weights,
    init_sigma2,
    learn_kernel,
    log_likelihood,
    project_simplex,
    sv_channel,
    ula_geometry,
    user_position,
    geometric_channel,
    add_awgn,
)
from emgpr.learning import _mixed_gram_raw
from conftest import F_C, K0, WAVELENGTH


def mixed(mus, weights=None, sigma2=1.0):
    params = tuple(KernelParams(mu=np.asarray(m, dtype=float), sigma2=sigma2, k0=K0)
                   for m in mus)
    if weights is None:
        weights = np.full(len(params), 1.0 / len(params))
    return MixedKernel(params, np.asarray(weights, dtype=float))


def ula_samples(n=8):
    return ula_geometry(n, WAVELENGTH / 2, F_C, "y").sample_set()


class TestLogLikelihood:
    def test_identity_kernel_values(self):
        # two co-located cross-polarized samples and sigma2 = 3(1 - nv)
        # make K_y exactly the identity
        nv = 0.25
        pos = np.zeros((2, 3))
        pols = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        A = SampleSet.from_arrays(pos, np.zeros(2), pols)
        kernel = mixed([[0, 0, 0]], sigma2=3 * (1 - nv))
        K = assemble_kernel_matrix(A, kernel, nv).matrix
        assert_allclose(K, np.eye(2), atol=1e-14)
        assert log_likelihood(A, np.zeros(2), kernel, nv) == pytest.approx(0.0, abs=1e-12)
        y = np.array([1.0 + 1.0j, 2.0])
        assert log_likelihood(A, y, kernel, nv) == pytest.approx(-6.0, rel=1e-12)

    def test_matches_dense_oracle(self, rng):
        A = ula_samples(10)
        kernel = mixed([[1.0, 0.5, 2.0], [-2.0, 0.0, 1.0]], [0.3, 0.7], sigma2=1.7)
        nv = 0.4
        y = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        val = log_likelihood(A, y, kernel, nv)
        K = assemble_kernel_matrix(A, kernel, nv).matrix
        ref = -(y.conj() @ np.linalg.inv(K) @ y).real - np.linalg.slogdet(K)[1]
        assert val == pytest.approx(ref, rel=1e-9)


class TestGradients:
    def fd_loglik(self, A, y, params, weights, nv):
        return lambda p_list, w: _loglik_of(A, y, p_list, w, nv)

    def test_grad_mu_matches_finite_differences(self, rng):
        A = ula_samples(8)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        nv = 0.5
        for _ in range(6):
            mus = rng.uniform(-3, 3, (2, 3))
            kernel = mixed(mus, [0.4, 0.6], sigma2=1.4)
            for s in range(2):
                g = grad_mu(A, y, kernel, nv, s)
                h = 1e-6 * max(1.0, np.abs(mus[s]).max())
                for k in range(3):
                    up, dn = mus.copy(), mus.copy()
                    up[s, k] += h
                    dn[s, k] -= h
                    fd = (
                        log_likelihood(A, y, mixed(up, [0.4, 0.6], 1.4), nv)
                        - log_likelihood(A, y, mixed(dn, [0.4, 0.6], 1.4), nv)
                    ) / (2 * h)
                    assert g[k] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_grad_weights_matches_finite_differences(self, rng):
        A = ula_samples(8)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        nv = 0.5
        mus = rng.uniform(-2, 2, (3, 3))
        weights = np.array([0.2, 0.5, 0.3])
        kernel = mixed(mus, weights, sigma2=1.2)
        g = grad_weights(A, y, kernel, nv)
        params = kernel.sub_params
        h = 1e-6
        for s in range(3):
            up, dn = weights.copy(), weights.copy()
            up[s] += h
            dn[s] -= h
            fd = (_loglik_of(A, y, params, up, nv) - _loglik_of(A, y, params, dn, nv)) / (2 * h)
            assert g[s] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_identical_subkernels_have_equal_gradients(self, rng):
        A = ula_samples(6)
        y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        mus = np.tile(np.array([1.0, 0.0, 2.0]), (2, 1))
        kernel = mixed(mus, [0.5, 0.5], sigma2=1.1)
        assert_allclose(grad_mu(A, y, kernel, 0.3, 0), grad_mu(A, y, kernel, 0.3, 1), rtol=1e-10)
        gw = grad_weights(A, y, kernel, 0.3)
        assert gw[0] == pytest.approx(gw[1], rel=1e-10)

    def test_zero_pilots_leave_logdet_term(self, rng):
        # with y = 0 the quadratic term vanishes: the gradient reduces
        # to -w_s tr(dK K_y^{-1}) for each coordinate
        A = ula_samples(6)
        y = np.zeros(6, dtype=complex)
        kernel = mixed([[0.5, 0.2, 1.0]], sigma2=1.3)
        nv = 0.7
        g = grad_mu(A, y, kernel, nv, 0)
        from emgpr._pairwise import PairwiseGeometry

        K = assemble_kernel_matrix(A, kernel, nv).matrix
        Kinv = np.linalg.inv(K)
        D = PairwiseGeometry(A, k0=K0).gram_grad_mu(kernel.sub_params[0])
        expected = -np.array([np.trace(D[k] @ Kinv).real for k in range(3)])
        assert_allclose(g, expected, rtol=1e-9, atol=1e-12)

    def test_translation_invariance(self, rng):
        A = ula_samples(8)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        kernel = mixed([[1.0, -0.5, 2.0]], sigma2=1.6)
        g0 = grad_mu(A, y, kernel, 0.4, 0)
        g1 = grad_mu(A.translated([3.7, -1.2, 9.0]), y, kernel, 0.4, 0)
        assert_allclose(g0, g1, rtol=1e-9)


def _loglik_of(A, y, params, weights, nv):
    """Likelihood at raw (possibly off-simplex) weights."""
    from emgpr.learning import _loglik_chol

    K = _mixed_gram_raw(A, params, weights, nv)
    return _loglik_chol(K, np.asarray(y, dtype=complex))[0]


class TestInitSigma2:
    def test_zero_pilots(self):
        assert init_sigma2(np.zeros(4, dtype=complex), 1.0) == 0.0

    def test_unit_pilots_unit_noise(self):
        y = np.ones(8, dtype=complex)
        assert init_sigma2(y, 1.0) == pytest.approx(1.0)

    def test_constant_energy(self):
        c = 2.5
        y = np.sqrt(c) * np.exp(1j * np.linspace(0, 3, 5))
        assert init_sigma2(y, 0.3) == pytest.approx(2 * c / 1.3, rel=1e-12)


class TestProjectSimplex:
    def test_symmetric_split(self):
        assert_allclose(project_simplex([0.6, 0.6]), [0.5, 0.5])

    def test_feasible_unchanged(self):
        w = np.array([0.2, 0.3, 0.5])
        assert_allclose(project_simplex(w), w)

    def test_clamps_to_vertex(self):
        assert_allclose(project_simplex([1.5, -0.2]), [1.0, 0.0])

    def test_variational_characterization(self, rng):
        # the projection p of x satisfies <x - p, w - p> <= 0 for every
        # simplex point w
        for _ in range(30):
            x = rng.uniform(-2, 2, 4)
            p = project_simplex(x)
            assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
            for _ in range(20):
                w = rng.dirichlet(np.ones(4))
                assert (x - p) @ (w - p) <= 1e-10


class TestArmijo:
    def test_quadratic_toy_converges(self):
        target = np.array([1.0, -2.0, 0.5])

        def objective(theta):
            return -float(np.sum((theta - target) ** 2))

        state = ArmijoState(point=np.zeros(3), value=objective(np.zeros(3)))
        for _ in range(100):
            grad = -2.0 * (state.point - target)
            state = armijo_ascent_step(state, grad, grad, objective)
            if np.linalg.norm(state.point - target) < 1e-6:
                break
        assert np.linalg.norm(state.point - target) < 1e-6

    def test_zero_gradient_is_noop(self):
        state = ArmijoState(point=np.array([1.0]), value=0.0, step_size=0.7)
        out = armijo_ascent_step(state, np.zeros(1), np.zeros(1), lambda t: 0.0)
        assert out is state

    def test_accepted_step_strictly_increases(self):
        def objective(theta):
            return -float(theta[0] ** 2)

        start = np.array([2.0])
        grad = np.array([-4.0])  # d(-t^2)/dt at t=2
        state = ArmijoState(point=start, value=objective(start))
        out = armijo_ascent_step(state, grad, grad, objective)
        assert out.accepted == 1
        assert out.value > state.value

    def test_rejection_decays_step_size(self):
        # objective already at the maximum: every trial fails
        def objective(theta):
            return -float(np.sum(theta**2))

        state = ArmijoState(point=np.zeros(2), value=0.0, step_size=1.0)
        out = armijo_ascent_step(state, np.array([1.0, 0.0]), np.array([1.0, 0.0]), objective)
        assert out.rejected == 1
        assert out.step_size == pytest.approx(0.5)
        assert_allclose(out.point, state.point)

    def test_projection_applied_to_trial(self):
        # gradient points off-simplex; the accepted point must stay on it
        def objective(w):
            return float(w @ np.array([1.0, 0.0]))

        state = ArmijoState(point=np.array([0.5, 0.5]), value=0.5)
        out = armijo_ascent_step(state, np.array([1.0, -1.0]), np.array([1.0, -1.0]),
                                 objective, project=project_simplex)
        assert out.accepted == 1
        assert out.point.sum() == pytest.approx(1.0)
        assert out.point.min() >= 0


class TestLearnKernel:
    def test_zero_iterations_returns_initialization(self, rng):
        A = ula_samples(8)
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        report = learn_kernel(A, y, 0.5, S=2, n_iter=0, k0=K0)
        from emgpr.learning import initial_directions

        assert_allclose(report.mus, initial_directions(2))
        assert_allclose(report.weights, [0.5, 0.5])
        assert report.n_iterations == 0

    def test_degenerate_pilots_raise(self):
        A = ula_samples(4)
        with pytest.raises(ValueError, match="degenerate"):
            learn_kernel(A, np.zeros(4, dtype=complex), 0.5, S=1, n_iter=3, k0=K0)

    def test_objective_trace_monotone_and_weights_feasible(self, rng):
        geom = ula_geometry(16, WAVELENGTH / 2, F_C, "y")
        h = sv_channel(geom, -15.0, 6, 10.0, seed=5).h
        y, nv = add_awgn(h, 5.0, seed=6)
        report = learn_kernel(geom.sample_set(), y, nv, S=2, n_iter=10, k0=geom.wavenumber)
        trace = np.array(report.objective_trace)
        assert np.all(np.diff(trace) >= -1e-9 * (1 + np.abs(trace[:-1])))
        assert report.weights.min() >= 0
        assert report.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_recovers_concentration_direction(self, rng):
        # data drawn from the kernel itself: the fitted direction should
        # align with the truth (the norm is not identifiable)
        geom = ula_geometry(32, WAVELENGTH / 2, F_C, "y")
        A = geom.sample_set()
        mu_true = 8.0 * np.array([np.sin(np.deg2rad(25)), 0, np.cos(np.deg2rad(25))])
        kernel = mixed([mu_true], sigma2=1.0)
        K = assemble_kernel_matrix(A, kernel, 0.0).matrix
        L = np.linalg.cholesky(K + 1e-12 * np.eye(32))
        angles = []
        for seed in range(3):
            g = np.random.default_rng(seed)
            h = L @ ((g.standard_normal(32) + 1j * g.standard_normal(32)) / np.sqrt(2))
            y, nv = add_awgn(h, 10.0, seed=100 + seed)
            report = learn_kernel(A, y, nv, S=1, n_iter=40, k0=geom.wavenumber)
            angles.append(estimate_azimuth(report.mus[0]))
        assert abs(np.mean(angles) - 25.0) < 5.0

    def test_mid_run_failure_rolls_back(self, rng, monkeypatch):
        # a factorization failure inside a sweep must restore the last
        # feasible hyperparameters instead of propagating
        import emgpr.learning as learning_mod

        geom = ula_geometry(8, WAVELENGTH / 2, F_C, "y")
        h = sv_channel(geom, -15.0, 6, 10.0, seed=1).h
        y, nv = add_awgn(h, 5.0, seed=2)
        calls = {"n": 0}
        real = learning_mod._information_matrix

        def flaky(K, yy):
            calls["n"] += 1
            if calls["n"] > 4:
                raise np.linalg.LinAlgError("synthetic breakdown")
            return real(K, yy)

        monkeypatch.setattr(learning_mod, "_information_matrix", flaky)
        report = learn_kernel(geom.sample_set(), y, nv, S=1, n_iter=20, k0=geom.wavenumber)
        assert not report.converged
        assert np.isfinite(report.objective_trace).all()
        assert np.isfinite(report.mus).all()

    def test_geometric_channel_azimuth_smoke(self):
        geom = ula_geometry(32, WAVELENGTH / 2, F_C, "y")
        h = geometric_channel(geom, user_position(geom, -15.0, 10.0)).h
        h = h * np.sqrt(32 / np.sum(np.abs(h) ** 2))
        y, nv = add_awgn(h, 0.0, seed=42)
        report = learn_kernel(geom.sample_set(), y, nv, S=1, n_iter=40, k0=geom.wavenumber)
        assert abs(estimate_azimuth(report.mus[0]) - (-15.0)) < 4.0


class TestEstimateAzimuth:
    def test_broadside(self):
        assert estimate_azimuth([0.0, 0.0, 1.0]) == pytest.approx(0.0)

    def test_diagonal(self):
        assert estimate_azimuth([-1.0, 0.0, 1.0]) == pytest.approx(-45.0)

    def test_reference_slope(self):
        mu = np.array([-0.268, 0.0, 1.0])
        assert estimate_azimuth(mu) == pytest.approx(-15.0, abs=0.05)

    def test_folds_into_half_circle(self):
        assert estimate_azimuth([0.2588, 0.0, -0.9659]) == pytest.approx(-15.0, abs=0.01)

    def test_rejects_vanishing_direction(self):
        with pytest.raises(ValueError):
            estimate_azimuth([1e-8, 0.0, 1e-8])
