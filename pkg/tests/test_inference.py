import numpy as np
import pytest
from scipy.stats import multivariate_normal, norm

from statvar import inference, linalg, priors, process, reparam
from statvar.errors import (
    AllDivergent,
    DimensionMismatch,
    NonFinite,
    NotStationary,
    TooFewDraws,
)


def random_stationary(rng, m, p, scale=0.5):
    sigma = linalg.random_spd(m, rng)
    plist = [scale * reparam.a_to_p(rng.standard_normal((m, m))) for _ in range(p)]
    model, _ = reparam.reverse_map(sigma, plist)
    return model


class TestLogLikelihoodExact:
    def test_iid_standard_normal(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[0.0]]])
        got = inference.log_likelihood_exact(model, np.zeros((3, 1)))
        np.testing.assert_allclose(got, 3 * (-0.5 * np.log(2 * np.pi)), atol=1e-12)

    def test_two_term_factorisation(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[0.5]]])
        got = inference.log_likelihood_exact(model, np.array([[1.0], [1.0]]))
        want = norm.logpdf(1.0, 0.0, np.sqrt(4.0 / 3.0)) + norm.logpdf(1.0, 0.5, 1.0)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            m = int(rng.integers(1, 4))
            p = int(rng.integers(1, 4))
            n = int(rng.integers(p + 1, 9))
            model = random_stationary(rng, m, p)
            data = process.simulate(model, n, seed=int(rng.integers(10000)))
            got = inference.log_likelihood_exact(model, data)
            cov = process.block_toeplitz(process.autocovariances(model, n - 1), n)
            want = multivariate_normal.logpdf(data.reshape(-1), np.zeros(n * m), cov)
            assert abs(got - want) < 1e-8

    def test_errors(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[1.5]]])
        with pytest.raises(NotStationary):
            inference.log_likelihood_exact(model, np.zeros((5, 1)))
        good = process.VarModel(sigma=[[1.0]], phi=[[[0.5]]])
        with pytest.raises(DimensionMismatch):
            inference.log_likelihood_exact(good, np.zeros((5, 2)))


class TestLogPosterior:
    def test_composition_contract(self):
        rng = np.random.default_rng(1)
        data = process.simulate(random_stationary(rng, 2, 1), 40, seed=3)
        spec = priors.prior1(1)
        post = inference.PosteriorModel(data, spec)
        theta = post.initial_theta(np.random.default_rng(5), 0.4)
        point = post.unpack(theta)
        model = post.model_from_theta(theta)
        want = (priors.log_prior(point, spec)
                + inference.log_likelihood_exact(model, data))
        # log-Cholesky and log-precision Jacobian terms, assembled by hand
        m = 2
        svec = theta[post.n_coeff:post.n_coeff + post.n_sigma]
        logdiag = svec[[0, 2]]
        want += m * np.log(2.0) + np.dot([m + 1, m], logdiag)
        raw_hyper = theta[post.n_coeff + post.n_sigma:]
        want += raw_hyper[post._log_mask].sum()
        np.testing.assert_allclose(post.value(theta), want, atol=1e-8)

    def test_permutation_invariance_with_data(self):
        # The natural-space posterior kernel is exactly invariant under a
        # common permutation of series and parameters.  The coordinate-space
        # value differs by the log-Cholesky Jacobian, whose weights depend
        # on the diagonal ordering, so the Jacobian terms are subtracted
        # before comparing.
        rng = np.random.default_rng(2)
        data = process.simulate(random_stationary(rng, 3, 1), 30, seed=7)
        spec = priors.prior1(1)
        perm = np.eye(3)[[1, 2, 0]]
        post = inference.PosteriorModel(data, spec)
        theta = post.initial_theta(np.random.default_rng(8), 0.3)
        point = post.unpack(theta)
        conj = priors.ParameterPoint(
            sigma=perm @ point.sigma @ perm.T,
            aseq=[perm @ a @ perm.T for a in point.aseq],
            hyper=point.hyper)
        post_perm = inference.PosteriorModel(data @ perm.T, spec)
        theta2 = post_perm.pack(conj)

        def kernel(pm, th):
            svec = th[pm.n_coeff:pm.n_coeff + pm.n_sigma]
            jac = (pm.m * np.log(2.0) + float(svec @ pm._jac_weights)
                   + th[pm.n_coeff + pm.n_sigma:][pm._log_mask].sum())
            return pm.value(th) - jac

        np.testing.assert_allclose(kernel(post_perm, theta2),
                                   kernel(post, theta), atol=1e-8)

    def test_overflow_guard(self):
        rng = np.random.default_rng(3)
        data = process.simulate(random_stationary(rng, 2, 1), 30, seed=9)
        post = inference.PosteriorModel(data, priors.prior1(1))
        theta = post.initial_theta(np.random.default_rng(0), 0.3)
        theta[0] = 1e308
        assert post.value(theta) == -np.inf
        val, grad = post.value_and_grad(theta)
        assert val == -np.inf and np.all(grad == 0)


class TestGradient:
    def test_fd_agreement_all_kinds(self):
        rng = np.random.default_rng(4)
        data = process.simulate(random_stationary(rng, 2, 2), 50, seed=11)
        for spec in [priors.prior1(2), priors.sparse_spec(2),
                     priors.rml_vague_spec(2), priors.semi_conjugate_spec(2)]:
            post = inference.PosteriorModel(data, spec)
            theta = post.initial_theta(np.random.default_rng(12), 0.3)
            grad_ad = post.gradient(theta, method="ad")
            grad_fd = post.gradient(theta, method="fd")
            rel = np.abs(grad_ad - grad_fd) / np.maximum(1e-4, np.abs(grad_fd))
            assert rel.max() < 1e-4, spec.kind

    def test_nonfinite_raises(self):
        rng = np.random.default_rng(5)
        data = process.simulate(random_stationary(rng, 2, 1), 30, seed=13)
        post = inference.PosteriorModel(data, priors.prior1(1))
        theta = np.full(post.dim, 1e308)
        with pytest.raises(NonFinite):
            post.gradient(theta, method="ad")

    def test_gaussian_prior_gradient_exact(self):
        # with only normal terms in play the AD gradient is -(x - mean)/var
        x = np.array([0.3, -0.7, 2.0])
        mean, var = 0.5, 2.0
        from statvar.autodiff import seed

        def logp(t):
            r = t - mean
            return (-0.5 * r * r / var).sum()

        out = logp(seed(x))
        np.testing.assert_allclose(out.tan, -(x - mean) / var, atol=1e-14)

    def test_gradient_vanishes_at_mode(self):
        from scipy.optimize import minimize

        rng = np.random.default_rng(6)
        data = process.simulate(random_stationary(rng, 2, 1), 80, seed=17)
        post = inference.PosteriorModel(data, priors.prior1(1))
        theta0 = post.initial_theta(np.random.default_rng(2), 0.2)

        def neg(t):
            v, g = post.value_and_grad(t)
            return -v, -g

        res = minimize(neg, theta0, jac=True, method="BFGS",
                       options={"gtol": 1e-8, "maxiter": 500})
        assert np.linalg.norm(post.gradient(res.x)) < 1e-4


class TestLeapfrog:
    def test_time_reversibility(self):
        rng = np.random.default_rng(7)
        data = process.simulate(random_stationary(rng, 2, 1), 40, seed=19)
        post = inference.PosteriorModel(data, priors.prior1(1))
        theta = post.initial_theta(np.random.default_rng(3), 0.2)
        minv = np.full(post.dim, 1.0)
        mom = rng.standard_normal(post.dim)
        th1, mom1, _, _, ok = inference.leapfrog(post, theta, mom, 0.01, 8, minv)
        assert ok
        th2, mom2, _, _, ok = inference.leapfrog(post, th1, -mom1, 0.01, 8, minv)
        assert ok
        np.testing.assert_allclose(th2, theta, atol=1e-8)
        np.testing.assert_allclose(-mom2, mom, atol=1e-8)


class _StdNormalTarget:
    """Stubbed d-dimensional standard normal target."""

    def __init__(self, dim):
        self.dim = dim

    def theta_names(self):
        return [f"x{i}" for i in range(self.dim)]

    def initial_theta(self, rng, jitter):
        return rng.uniform(-jitter, jitter, self.dim)

    def value_and_grad(self, theta):
        return -0.5 * float(theta @ theta), -theta


class _HostileTarget(_StdNormalTarget):
    """Finite only exactly at the origin: every proposal diverges."""

    def value_and_grad(self, theta):
        if np.all(theta == 0):
            return 0.0, np.zeros(self.dim)
        return -np.inf, np.zeros(self.dim)

    def initial_theta(self, rng, jitter):
        return np.zeros(self.dim)


class TestHmc:
    def test_standard_normal_target(self):
        cfg = inference.HmcConfig(chains=4, iterations=1500, warmup=500,
                                  seed=21, max_leapfrog=32)
        draws = inference._sample(_StdNormalTarget(10), cfg)
        flat = draws.flat()
        ess = np.array([inference.effective_sample_size(draws.theta[:, :, k])
                        for k in range(10)])
        mcse = flat.std(axis=0) / np.sqrt(ess)
        assert np.all(np.abs(flat.mean(axis=0)) < 4 * mcse)
        assert np.all(np.abs(flat.var(axis=0) - 1.0) < 0.1)
        assert draws.divergences.sum() == 0

    def test_deterministic(self):
        cfg = inference.HmcConfig(chains=2, iterations=200, warmup=100, seed=5)
        a = inference._sample(_StdNormalTarget(3), cfg)
        b = inference._sample(_StdNormalTarget(3), cfg)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.logpost, b.logpost)

    def test_all_divergent(self):
        cfg = inference.HmcConfig(chains=1, iterations=60, warmup=30, seed=1)
        with pytest.raises(AllDivergent):
            inference._sample(_HostileTarget(2), cfg)

    def test_var_smoke_fit(self):
        truth = process.VarModel(sigma=np.eye(2),
                                 phi=[np.array([[0.5, 0.1], [-0.1, 0.3]])])
        data = process.simulate(truth, 200, seed=23)
        cfg = inference.HmcConfig(chains=2, iterations=400, warmup=200,
                                  seed=29, max_leapfrog=16)
        draws = inference.run_hmc(data, priors.prior1(1), cfg)
        tr = draws.transformed()
        # probability-one stationarity of transformed draws
        for row in tr["phi"]:
            ok, _ = process.is_stationary(list(row))
            assert ok
        est = tr["phi"].mean(axis=0)[0]
        sd = tr["phi"].std(axis=0)[0]
        assert np.all(np.abs(est - truth.phi[0]) < 4 * sd)
        assert tr["pacf"].shape == (draws.chains * draws.kept, 1, 2, 2)

    def test_fd_fallback_runs(self):
        truth = process.VarModel(sigma=np.eye(1), phi=[np.array([[0.5]])])
        data = process.simulate(truth, 60, seed=31)
        cfg = inference.HmcConfig(chains=1, iterations=40, warmup=20, seed=3,
                                  max_leapfrog=8, grad_method="fd")
        draws = inference.run_hmc(data, priors.prior1(1), cfg)
        assert draws.theta.shape[1] == 20


class TestDiagnostics:
    def test_identical_chains(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(2000)
        rhat = inference.split_rhat(np.vstack([x, x]))
        assert abs(rhat - 1.0) < 0.01

    def test_iid_ess(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((2, 5000))
        ess = inference.effective_sample_size(x)
        assert abs(ess - 10000) < 1500

    def test_ar1_ess(self):
        rng = np.random.default_rng(10)
        n = 50000
        x = np.empty(n)
        x[0] = 0.0
        for t in range(1, n):
            x[t] = 0.9 * x[t - 1] + rng.standard_normal()
        ess = inference.effective_sample_size(x[None, :])
        want = n * (1 - 0.9) / (1 + 0.9)
        assert abs(ess - want) / want < 0.3

    def test_too_few(self):
        draws = inference.Draws(
            theta=np.zeros((1, 100, 2)), logpost=np.zeros((1, 100)),
            names=["a", "b"], accept_rate=np.ones(1), divergences=np.zeros(1),
            step_size=np.ones(1), inv_mass_diag=np.ones((1, 2)))
        with pytest.raises(TooFewDraws):
            inference.diagnostics(draws)

    def test_spread_chains_flagged(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal(500)
        b = rng.standard_normal(500) + 5.0
        assert inference.split_rhat(np.vstack([a, b])) > 1.5
