"""Transform pair and frame configuration."""

from fractions import Fraction

import numpy as np
import pytest

from afdm_sim import AfdmConfig, daft, daft_matrix, default_params, idaft


def random_frame(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


class TestConfig:
    def test_default_chirp_rate_large_frame(self):
        cfg = default_params(512, 2, 2)
        assert cfg.c1 == Fraction(5, 1024)
        assert cfg.delay_stride == 5
        assert cfg.grid_size == 15

    def test_default_chirp_rate_minimal_frame(self):
        cfg = default_params(2, 0, 0)
        assert cfg.c1 == Fraction(1, 4)
        assert cfg.grid_size == 1

    def test_grid_must_fit_frame(self):
        with pytest.raises(ValueError, match="does not fit"):
            default_params(4, 2, 2)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError, match="positive"):
            default_params(0, 0, 0)

    def test_rejects_negative_bounds(self):
        with pytest.raises(ValueError, match="nonnegative"):
            AfdmConfig(8, -1, 0, Fraction(1, 16), 0.01)

    def test_first_chirp_rate_must_give_integer_stride(self):
        with pytest.raises(ValueError, match="integer"):
            AfdmConfig(8, 0, 0, Fraction(1, 3), 0.01)

    def test_second_rate_is_recorded_per_frame_length(self):
        a = default_params(64, 1, 1)
        b = default_params(128, 1, 1)
        assert a.c2 == pytest.approx(2 * b.c2)


class TestTransformPair:
    @pytest.mark.parametrize("n", [2, 8, 64, 512])
    def test_round_trip(self, n):
        cfg = default_params(n, 0, 0)
        rng = np.random.default_rng(n)
        x = random_frame(rng, n)
        np.testing.assert_allclose(daft(idaft(x, cfg), cfg), x, atol=1e-10)

    def test_zero_frame(self):
        cfg = default_params(8, 1, 1)
        np.testing.assert_array_equal(idaft(np.zeros(8), cfg), np.zeros(8))

    def test_zero_rates_reduce_to_dft(self):
        cfg = AfdmConfig(16, 0, 0, Fraction(0), 0.0)
        rng = np.random.default_rng(1)
        x = random_frame(rng, 16)
        np.testing.assert_allclose(idaft(x, cfg), np.fft.ifft(x, norm="ortho"), atol=1e-12)
        np.testing.assert_allclose(daft(x, cfg), np.fft.fft(x, norm="ortho"), atol=1e-12)

    def test_unitary(self):
        cfg = default_params(8, 1, 1)
        rng = np.random.default_rng(2)
        for _ in range(20):
            r = random_frame(rng, 8)
            assert np.linalg.norm(daft(r, cfg)) == pytest.approx(np.linalg.norm(r), abs=1e-12)

    def test_basis_vectors_recovered(self):
        cfg = default_params(8, 1, 1)
        for k in range(8):
            e = np.zeros(8, dtype=complex)
            e[k] = 1.0
            np.testing.assert_allclose(daft(idaft(e, cfg), cfg), e, atol=1e-12)

    def test_length_mismatch(self):
        cfg = default_params(8, 1, 1)
        with pytest.raises(ValueError, match="length-8"):
            daft(np.zeros(9), cfg)
        with pytest.raises(ValueError, match="length-8"):
            idaft(np.zeros(7), cfg)

    @pytest.mark.parametrize("n,alpha,delay", [(8, 1, 1), (12, 1, 1), (64, 2, 2)])
    def test_fft_route_matches_dense_matrix(self, n, alpha, delay):
        cfg = default_params(n, alpha, delay)
        rng = np.random.default_rng(3)
        mat = daft_matrix(cfg)
        for _ in range(10):
            r = random_frame(rng, n)
            np.testing.assert_allclose(daft(r, cfg), mat @ r, atol=1e-10)
            np.testing.assert_allclose(idaft(r, cfg), mat.conj().T @ r, atol=1e-10)
