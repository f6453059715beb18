import numpy as np
import pytest

from spectrain.errors import InvalidInput
from spectrain.linalg import dft, eig, idft, svd


class TestSvd:
    def test_identity(self):
        U, s, V = svd(np.eye(3))
        np.testing.assert_allclose(s, [1.0, 1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(np.abs(U), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(np.abs(V), np.eye(3), atol=1e-12)

    def test_diagonal(self):
        U, s, V = svd(np.diag([3.0, 2.0, 1.0]))
        np.testing.assert_allclose(s, [3.0, 2.0, 1.0], atol=1e-14)

    def test_roundtrip_random(self):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((8, 5))
        U, s, V = svd(M)
        rec = U @ np.diag(s) @ V.T
        assert np.linalg.norm(rec - M) <= 1e-10 * np.linalg.norm(M)

    def test_rejects_nonfinite(self):
        M = np.array([[1.0, np.nan], [0.0, 1.0]])
        with pytest.raises(InvalidInput):
            svd(M)

    def test_properties_randomized(self):
        # round-trip, column orthonormality, descending order; 100 draws
        rng = np.random.default_rng(42)
        for _ in range(100):
            m = int(rng.integers(1, 65))
            n = int(rng.integers(1, 65))
            M = rng.standard_normal((m, n))
            U, s, V = svd(M)
            k = s.size
            assert np.all(np.diff(s) <= 1e-12)
            assert np.all(s >= 0)
            np.testing.assert_allclose(U.T @ U, np.eye(k), atol=1e-10)
            np.testing.assert_allclose(V.T @ V, np.eye(k), atol=1e-10)
            rec = (U * s) @ V.T
            assert np.linalg.norm(rec - M) <= 1e-10 * max(np.linalg.norm(M), 1e-30)


class TestEig:
    def test_diagonal(self):
        w, V = eig(np.diag([0.5, 0.9]))
        np.testing.assert_allclose(sorted(w.real), [0.5, 0.9], atol=1e-14)
        np.testing.assert_allclose(w.imag, 0, atol=1e-14)

    def test_rotation(self):
        th = np.pi / 4
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        w, _ = eig(R)
        expected = {np.exp(1j * th), np.exp(-1j * th)}
        for lam in w:
            assert min(abs(lam - e) for e in expected) < 1e-12

    def test_companion_matrix(self):
        # companion of (z - 0.3)(z - 0.7) = z^2 - z + 0.21
        C = np.array([[0.0, -0.21], [1.0, 1.0]])
        w, _ = eig(C)
        np.testing.assert_allclose(sorted(w.real), [0.3, 0.7], atol=1e-12)

    def test_residual_bound_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 33))
            M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            w, V = eig(M)
            scale = np.linalg.norm(M, 2)
            for j in range(n):
                v = V[:, j]
                assert abs(np.linalg.norm(v) - 1.0) < 1e-12
                assert np.linalg.norm(M @ v - w[j] * v) <= 1e-8 * scale


class TestDft:
    def test_constant(self):
        c = 2.5
        X = dft(np.full(8, c))
        np.testing.assert_allclose(X[0], 8 * c, atol=1e-12)
        np.testing.assert_allclose(X[1:], 0, atol=1e-12)

    def test_single_bin(self):
        n = np.arange(16)
        x = np.exp(2j * np.pi * 3 * n / 16)
        X = dft(x)
        np.testing.assert_allclose(X[3], 16, atol=1e-10)
        mask = np.ones(16, bool)
        mask[3] = False
        np.testing.assert_allclose(X[mask], 0, atol=1e-10)

    def test_matches_naive_sum(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        X = dft(x)
        n = np.arange(32)
        naive = np.array([np.sum(x * np.exp(-2j * np.pi * k * n / 32)) for k in range(32)])
        np.testing.assert_allclose(X, naive, atol=1e-10)

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        back = idft(dft(x))
        assert np.linalg.norm(back - x) <= 1e-10 * np.linalg.norm(x)

    def test_parseval_randomized(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            N = int(rng.integers(1, 200))
            x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            X = dft(x)
            lhs = np.sum(np.abs(x) ** 2)
            rhs = np.sum(np.abs(X) ** 2) / N
            assert abs(lhs - rhs) <= 1e-9 * lhs

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            dft(np.array([]))
