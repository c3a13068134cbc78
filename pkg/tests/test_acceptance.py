"""Acceptance suite: one test per release criterion, each printing a
pass/fail line.  Run with `pytest tests/test_acceptance.py -v -s`."""

import time

import numpy as np
from scipy.stats import kstest, norm

from statvar import inference, linalg, priors, process, reparam, scoring


def _report(num, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {num:2d}: {description} {detail}")
    assert ok, f"criterion {num}: {description} {detail}"


def _random_pacf(rng, m, scale):
    return scale * reparam.a_to_p(rng.standard_normal((m, m)))


class TestAcceptance:
    def test_01_bijection_roundtrip(self):
        rng = np.random.default_rng(101)
        start = time.time()
        worst = 0.0
        for m in (1, 2, 3):
            for p in (1, 2, 4):
                for _ in range(500):
                    sigma = linalg.random_spd(m, rng)
                    plist = [_random_pacf(rng, m, 0.9 * rng.uniform(0.3, 1.0))
                             for _ in range(p)]
                    model, gammas = reparam.reverse_map(sigma, plist)
                    p_back, trace = reparam.forward_map(model)
                    err = max(np.abs(a - b).max() for a, b in zip(p_back, plist))
                    model_back, _ = reparam.reverse_map(sigma, p_back)
                    err = max(err, max(np.abs(a - b).max()
                                       for a, b in zip(model_back.phi, model.phi)))
                    err = max(err, max(np.abs(a - b).max()
                                       for a, b in zip(trace.gammas, gammas)))
                    worst = max(worst, err)
        elapsed = time.time() - start
        _report(1, "bijection roundtrips recover inputs",
                worst < 1e-8 and elapsed < 60,
                f"(max abs err {worst:.2e}, {elapsed:.1f}s over 4500 cases)")

    def test_02_stationarity_by_construction(self):
        spec = priors.prior1(4)
        bad = 0
        for seed in range(10000):
            point = priors.sample_prior(spec, 3, 4, seed=seed)
            plist = [reparam.a_to_p(a) for a in point.aseq]
            model, _ = reparam.reverse_map(point.sigma, plist)
            ok, _ = process.is_stationary(model.phi)
            bad += not ok
        _report(2, "10000 prior draws are all stationary", bad == 0,
                f"({10000 - bad}/10000)")

    def test_03_structure_preservation(self):
        rng = np.random.default_rng(103)
        worst = 0.0
        for _ in range(200):
            m = int(rng.integers(2, 5))
            r = float(rng.uniform(-0.99, 0.99)) / m
            forms = [reparam.ScaledAllOnes(dim=m, scale=r),
                     reparam.ScaledIdentity(dim=m, scale=float(rng.uniform(-0.99, 0.99))),
                     reparam.DiagonalForm(values=tuple(rng.uniform(-0.99, 0.99, m))),
                     reparam.ZeroForm(dim=m)]
            r1 = float(rng.uniform(-0.9, 0.9))
            r2 = float(rng.uniform(-1, 1)) * min(1 - abs(r1), (1 - abs(r1)) / (m - 1)) * 0.95
            if abs(r1 - r2) < 1 and abs(r1 + (m - 1) * r2) < 1:
                forms.append(reparam.TwoParamExchangeable(dim=m, diag=r1, offdiag=r2))
            for form in forms:
                closed = reparam.structure_p_to_a(form).assemble()
                matrix = reparam.p_to_a(form.assemble())
                worst = max(worst, np.abs(closed - matrix).max())
        _report(3, "closed-form structured maps match the matrix map",
                worst < 1e-10, f"(max abs err {worst:.2e})")

    def test_04_univariate_levinson_durbin(self):
        rng = np.random.default_rng(104)
        worst = 0.0
        for _ in range(100):
            p = int(rng.integers(1, 7))
            sigma = np.array([[float(rng.uniform(0.2, 3.0))]])
            plist = [np.array([[rng.uniform(-0.95, 0.95)]]) for _ in range(p)]
            model, _ = reparam.reverse_map(sigma, plist)
            gammas = [g[0, 0] for g in process.autocovariances(model, p)]
            # independent scalar Levinson-Durbin recursion
            pacf = []
            coeffs = np.zeros(p)
            var = gammas[0]
            for k in range(1, p + 1):
                acc = gammas[k] - sum(coeffs[j] * gammas[k - 1 - j]
                                      for j in range(k - 1))
                rho = acc / var
                pacf.append(rho)
                new = coeffs.copy()
                new[k - 1] = rho
                for j in range(k - 1):
                    new[j] = coeffs[j] - rho * coeffs[k - 2 - j]
                coeffs = new
                var *= 1.0 - rho * rho
            got = np.array([pm[0, 0] for pm in reparam.forward_map(model)[0]])
            worst = max(worst, np.abs(got - np.array(pacf)).max())
        _report(4, "univariate pacf equals Levinson-Durbin oracle",
                worst < 1e-10, f"(max abs err {worst:.2e})")

    @staticmethod
    def _companion_radius_batch(phi):
        n, p = phi.shape
        comp = np.zeros((n, p, p))
        comp[:, 0, :] = phi
        for k in range(1, p):
            comp[:, k, k - 1] = 1.0
        return np.abs(np.linalg.eigvals(comp)).max(axis=1)

    def test_05_stationary_region_volume(self):
        rng = np.random.default_rng(2024)
        n = 100000
        phi2 = np.column_stack([rng.uniform(-2, 2, n), rng.uniform(-1, 1, n)])
        frac2 = (self._companion_radius_batch(phi2) < 1).mean()
        se2 = np.sqrt(0.5 * 0.5 / n)
        ok2 = abs(frac2 - 0.5) < 3 * se2
        # spot check the batch radius against the library routine
        for row in phi2[:50]:
            _, r = process.is_stationary([np.array([[row[0]]]), np.array([[row[1]]])])
            assert abs(r - self._companion_radius_batch(row[None])[0]) < 1e-10

        phi3 = np.column_stack([rng.uniform(-3, 3, n), rng.uniform(-3, 3, n),
                                rng.uniform(-1, 1, n)])
        frac3 = (self._companion_radius_batch(phi3) < 1).mean()
        want3 = (16.0 / 3.0) / 72.0  # U_3 over the [-3,3]^2 x [-1,1] box
        se3 = np.sqrt(want3 * (1 - want3) / n)
        ok3 = abs(frac3 - want3) < 3 * se3
        _report(5, "stationary-region volume fractions match U_p",
                ok2 and ok3,
                f"(p=2: {frac2:.4f} vs 0.5; p=3: {frac3:.4f} vs {want3:.4f})")

    def test_06_beta_marginals(self):
        rng = np.random.default_rng(77)
        accepted = []
        while len(accepted) < 20000:
            n = 100000
            phi = np.column_stack([rng.uniform(-3, 3, n), rng.uniform(-3, 3, n),
                                   rng.uniform(-1, 1, n)])
            radius = self._companion_radius_batch(phi)
            accepted.extend(phi[radius < 1 - 1e-8].tolist())
        accepted = np.asarray(accepted[:20000])
        rhos = np.empty((20000, 3))
        for i, row in enumerate(accepted):
            model = process.VarModel(sigma=[[1.0]],
                                     phi=[[[row[0]]], [[row[1]]], [[row[2]]]])
            rhos[i] = [pm[0, 0] for pm in reparam.forward_map(model)[0]]
        pvals = []
        for i, (a, b) in enumerate([(1, 1), (1, 2), (2, 2)]):
            u = (rhos[:, i] + 1.0) / 2.0
            pvals.append(kstest(u, "beta", args=(a, b)).pvalue)
        _report(6, "uniform-over-region pacfs follow the Beta laws",
                all(pv > 0.01 for pv in pvals),
                "(KS p-values " + ", ".join(f"{pv:.3f}" for pv in pvals) + ")")

    def test_07_likelihood_oracle(self):
        from scipy.stats import multivariate_normal

        rng = np.random.default_rng(107)
        worst = 0.0
        for _ in range(200):
            m = int(rng.integers(1, 4))
            p = int(rng.integers(1, 4))
            n = int(rng.integers(p + 1, 9))
            sigma = linalg.random_spd(m, rng)
            plist = [_random_pacf(rng, m, 0.7) for _ in range(p)]
            model, _ = reparam.reverse_map(sigma, plist)
            data = process.simulate(model, n, seed=int(rng.integers(10 ** 6)))
            got = inference.log_likelihood_exact(model, data)
            cov = process.block_toeplitz(process.autocovariances(model, n - 1), n)
            want = multivariate_normal.logpdf(data.reshape(-1), np.zeros(n * m), cov)
            worst = max(worst, abs(got - want))
        _report(7, "factorised likelihood equals brute-force joint density",
                worst < 1e-8, f"(max abs err {worst:.2e})")

    def test_08_gradient_correctness(self):
        rng = np.random.default_rng(108)
        sigma = linalg.random_spd(2, rng)
        plist = [_random_pacf(rng, 2, 0.6) for _ in range(2)]
        truth, _ = reparam.reverse_map(sigma, plist)
        data = process.simulate(truth, 60, seed=9)
        post = inference.PosteriorModel(data, priors.prior1(2))
        worst = 0.0
        for k in range(50):
            theta = post.initial_theta(np.random.default_rng([108, k]), 0.4)
            grad_ad = post.gradient(theta, method="ad")
            grad_fd = post.gradient(theta, method="fd")
            rel = np.abs(grad_ad - grad_fd) / np.maximum(np.abs(grad_fd), 1e-4)
            worst = max(worst, rel.max())
        _report(8, "AD gradient matches finite differences",
                worst < 1e-4, f"(max rel err {worst:.2e} over 50 points)")

    def test_09_sampler_calibration(self):
        start = time.time()
        truth = process.VarModel(
            sigma=np.array([[1.0, 0.3], [0.3, 1.0]]),
            phi=[np.array([[0.5, 0.15], [-0.1, 0.3]])])
        data = process.simulate(truth, 300, seed=42)
        cfg = inference.HmcConfig(chains=4, iterations=2000, warmup=1000,
                                  seed=2025, max_leapfrog=32)
        draws = inference.run_hmc(data, priors.prior1(1), cfg)
        diag = inference.diagnostics(draws)
        elapsed = time.time() - start
        tr = draws.transformed()
        stationary = all(process.is_stationary(list(row))[0] for row in tr["phi"])
        est = tr["phi"].mean(axis=0)[0]
        sd = tr["phi"].std(axis=0)[0]
        within = np.all(np.abs(est - truth.phi[0]) < 4 * sd)
        ok = (diag["rhat"].max() < 1.05 and diag["ess"].min() > 400
              and within and stationary and elapsed < 600)
        _report(9, "sampler calibration on simulated VAR(1)", ok,
                f"(max rhat {diag['rhat'].max():.3f}, min ess "
                f"{diag['ess'].min():.0f}, all stationary {stationary}, "
                f"{elapsed:.0f}s)")

    def test_10_prior_moments(self):
        nrep, nbatch = 20000, 20
        for label, spec, want_var in [("prior 1", priors.prior1(1), 1.0),
                                      ("prior 2", priors.prior2(1), 10.0)]:
            draws = np.array([priors.sample_prior(spec, 2, 1, seed=s).aseq[0]
                              for s in range(nrep)])
            diag = draws[:, [0, 1], [0, 1]]
            batches = diag.reshape(nbatch, nrep // nbatch, 2)
            means = batches.mean(axis=(1, 2))
            variances = batches.var(axis=(1, 2))
            cors = np.array([np.corrcoef(b[:, 0], b[:, 1])[0, 1] for b in batches])

            def check(est, want):
                se = est.std(ddof=1) / np.sqrt(nbatch)
                return abs(est.mean() - want) < 3 * se, est.mean(), se

            ok_m, mean_est, _ = check(means, 0.0)
            ok_v, var_est, _ = check(variances, want_var)
            ok_c, cor_est, _ = check(cors, 0.7)
            _report(10, f"{label} Monte Carlo moments", ok_m and ok_v and ok_c,
                    f"(mean {mean_est:.3f}, var {var_est:.3f} vs {want_var}, "
                    f"cor {cor_est:.3f} vs 0.7)")

    def test_11_scoring_rules(self):
        rng = np.random.default_rng(111)
        x = rng.standard_normal(10 ** 6)
        crps = scoring.crps_sample(x, 0.0)
        want = 2 * norm.pdf(0.0) - 1.0 / np.sqrt(np.pi)
        ok_gauss = abs(crps - want) < 0.002
        y = rng.standard_normal(1000)
        ok_reduce = scoring.energy_score(y[:, None], [0.2]) == scoring.crps_sample(y, 0.2)
        diffs = []
        for _ in range(20):
            z = rng.standard_normal(int(rng.integers(2, 500)))
            target = float(rng.standard_normal())
            diffs.append(abs(scoring.crps_sample(z, target)
                             - scoring.crps_pairwise(z, target)))
        ok_forms = max(diffs) < 1e-10
        _report(11, "scoring-rule identities", ok_gauss and ok_reduce and ok_forms,
                f"(gaussian crps {crps:.5f} vs {want:.5f}, sorted-vs-squared "
                f"max diff {max(diffs):.1e})")

    def test_12_end_to_end_comparison(self):
        wins = 0
        details = []
        for rep in range(10):
            rng = np.random.default_rng([915, rep])
            r1 = rng.uniform(0.75, 0.9)
            r2 = rng.uniform(0.0, (1 - r1) / 2 * 0.9)
            p1 = reparam.TwoParamExchangeable(dim=3, diag=r1, offdiag=r2).assemble()
            r1b = rng.uniform(0.2, 0.5)
            r2b = rng.uniform(0.0, (1 - r1b) / 2 * 0.9)
            p2 = reparam.TwoParamExchangeable(dim=3, diag=r1b, offdiag=r2b).assemble()
            sigma = linalg.symmetrize(0.8 * np.eye(3) + 0.2 * np.ones((3, 3)))
            truth, _ = reparam.reverse_map(sigma, [p1, p2])
            data = process.simulate(truth, 240, seed=int(rng.integers(2 ** 31)))
            train = data[:-40]
            cfg = inference.HmcConfig(chains=2, iterations=500, warmup=250,
                                      seed=rep, max_leapfrog=16)
            es = {}
            for label, spec in [("exch", priors.prior1(2)),
                                ("semi", priors.semi_conjugate_spec(2))]:
                draws = inference.run_hmc(train, spec, cfg)
                tr = draws.transformed()
                row = scoring.score_entry(label, tr["phi"], tr["sigma"], data,
                                          40, seed=rep + 1000, subset=[0, 1, 2])
                es[label] = row.es_subset
            wins += es["exch"] <= es["semi"]
            details.append(f"{es['exch']:.3f}/{es['semi']:.3f}")
        _report(12, "stationary exchangeable prior wins the ES comparison",
                wins >= 7, f"({wins}/10 wins; exch/semi ES: {'; '.join(details)})")
