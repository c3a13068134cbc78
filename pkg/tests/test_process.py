import numpy as np
import pytest

from statvar import linalg, process
from statvar.errors import NotStationary


class TestIsStationary:
    def test_unit_root(self):
        ok, radius = process.is_stationary([np.array([[1.5]]), np.array([[-0.5]])])
        assert not ok
        np.testing.assert_allclose(radius, 1.0, atol=1e-10)

    def test_zero_coefficients(self):
        ok, radius = process.is_stationary([np.zeros((2, 2))])
        assert ok and radius == 0.0

    def test_scalar_ar1(self):
        ok, radius = process.is_stationary([np.array([[0.9]])])
        assert ok
        np.testing.assert_allclose(radius, 0.9, atol=1e-12)


class TestAutocovariances:
    def test_ar1_geometric_decay(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[0.5]]])
        gammas = process.autocovariances(model, 2)
        np.testing.assert_allclose([g[0, 0] for g in gammas],
                                   [4.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0], atol=1e-10)

    def test_decoupled_ar1(self):
        model = process.VarModel(sigma=np.eye(2), phi=[0.5 * np.eye(2)])
        gammas = process.autocovariances(model, 3)
        for j, g in enumerate(gammas):
            np.testing.assert_allclose(g, (4.0 / 3.0) * 0.5 ** j * np.eye(2), atol=1e-10)

    def test_white_noise(self):
        sigma = np.array([[2.0, 0.5], [0.5, 1.0]])
        model = process.VarModel(sigma=sigma, phi=[np.zeros((2, 2))])
        gammas = process.autocovariances(model, 2)
        np.testing.assert_allclose(gammas[0], sigma, atol=1e-12)
        np.testing.assert_allclose(gammas[1], 0, atol=1e-12)
        np.testing.assert_allclose(gammas[2], 0, atol=1e-12)

    def test_yule_walker_identity(self):
        # Sigma = Gamma_0 - sum_i phi_i Gamma_i
        rng = np.random.default_rng(0)
        from statvar import reparam
        for _ in range(10):
            m, p = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            sigma = linalg.random_spd(m, rng)
            plist = [0.5 * reparam.a_to_p(rng.standard_normal((m, m))) for _ in range(p)]
            model, _ = reparam.reverse_map(sigma, plist)
            gammas = process.autocovariances(model, p)
            recon = gammas[0].copy()
            for i in range(p):
                recon -= model.phi[i] @ gammas[i + 1]
            np.testing.assert_allclose(recon, sigma, atol=1e-8 * np.abs(sigma).max())

    def test_not_stationary(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[1.01]]])
        with pytest.raises(NotStationary):
            process.autocovariances(model, 1)


class TestBlockToeplitz:
    def test_symmetric_psd(self):
        rng = np.random.default_rng(1)
        from statvar import reparam
        for _ in range(10):
            m, p = int(rng.integers(1, 4)), int(rng.integers(1, 5))
            sigma = linalg.random_spd(m, rng)
            plist = [0.6 * reparam.a_to_p(rng.standard_normal((m, m))) for _ in range(p)]
            model, _ = reparam.reverse_map(sigma, plist)
            gmat = process.block_toeplitz(process.autocovariances(model, p - 1), p)
            np.testing.assert_allclose(gmat, gmat.T, atol=1e-12)
            assert np.linalg.eigvalsh(gmat).min() > -1e-8 * np.abs(gmat).max()


class TestSimulate:
    def test_white_noise_mean(self):
        model = process.VarModel(sigma=np.eye(2), phi=[np.zeros((2, 2))])
        traj = process.simulate(model, 3, seed=0)
        assert traj.shape == (3, 2)
        big = process.simulate(model, 20000, seed=1)
        assert np.abs(big.mean(axis=0)).max() < 4.0 / np.sqrt(20000)

    def test_lag1_autocovariance(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[0.5]]])
        traj = process.simulate(model, 100000, seed=2)[:, 0]
        lag1 = np.mean(traj[:-1] * traj[1:])
        # asymptotic sd of the lag-1 autocovariance estimator, roughly
        se = np.sqrt(2.0 * (4.0 / 3.0) ** 2 / 100000)
        assert abs(lag1 - 2.0 / 3.0) < 3 * se

    def test_deterministic(self):
        model = process.VarModel(sigma=np.eye(2), phi=[0.4 * np.eye(2)])
        a = process.simulate(model, 50, seed=11)
        b = process.simulate(model, 50, seed=11)
        np.testing.assert_array_equal(a, b)

    def test_not_stationary(self):
        model = process.VarModel(sigma=[[1.0]], phi=[[[1.5]]])
        with pytest.raises(NotStationary):
            process.simulate(model, 10, seed=0)

    def test_short_series(self):
        model = process.VarModel(sigma=np.eye(2), phi=[0.4 * np.eye(2), 0.1 * np.eye(2)])
        traj = process.simulate(model, 1, seed=3)
        assert traj.shape == (1, 2)
