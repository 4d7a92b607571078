"""Tests for the single-level 2-D Haar transform and its adjoints."""

import numpy as np
import pytest

from hsilab.wavelet import WaveletQuad, dwt2_haar, dwt_backward, idwt2_haar, idwt_backward

RECON_TOL = 1e-12
ADJOINT_TOL = 1e-12
FD_STEP = 1e-6


def _rand_quad(rng, shape):
    return WaveletQuad(*(rng.normal(size=shape) for _ in range(4)))


class TestAnalysis:
    def test_unit_block_formulas(self):
        """A single 2x2 block [[a,b],[c,d]] maps to the four kernel responses."""
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        q = dwt2_haar(x)
        assert q.ll[0, 0] == 1 + 2 + 3 + 4
        assert q.lh[0, 0] == -1 - 2 + 3 + 4
        assert q.hl[0, 0] == -1 + 2 - 3 + 4
        assert q.hh[0, 0] == 1 - 2 - 3 + 4

    def test_constant_input(self):
        """A constant map gives ll = 4c and zero detail bands."""
        x = np.full((2, 3, 8, 6), 2.5)
        q = dwt2_haar(x)
        np.testing.assert_array_equal(q.ll, np.full((2, 3, 4, 3), 10.0))
        assert not q.lh.any() and not q.hl.any() and not q.hh.any()

    def test_energy_scaling(self):
        """The integer kernels quadruple total energy: sum of subband squares = 4 * input energy."""
        rng = np.random.default_rng(0)
        x = rng.normal(size=(3, 5, 16, 12))
        q = dwt2_haar(x)
        lhs = sum(np.sum(band**2) for band in (q.ll, q.lh, q.hl, q.hh))
        np.testing.assert_allclose(lhs, 4.0 * np.sum(x**2), rtol=1e-13)

    def test_odd_extent_rejected(self):
        with pytest.raises(ValueError, match="even"):
            dwt2_haar(np.ones((2, 3, 7, 8)))
        with pytest.raises(ValueError, match="even"):
            idwt_backward(np.ones((5, 8)))

    def test_linearity(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=(2, 4, 6, 8))[0], rng.normal(size=(6, 8))
        qx, qy = dwt2_haar(x), dwt2_haar(y)
        qs = dwt2_haar(2.0 * x - 3.0 * y)
        np.testing.assert_allclose(qs.hh, 2.0 * qx.hh - 3.0 * qy.hh, atol=1e-12)


class TestRoundTrip:
    def test_perfect_reconstruction(self):
        """idwt(dwt(x)) == x to 1e-12 over random maps of mixed shapes."""
        rng = np.random.default_rng(2)
        for _ in range(50):
            c, b = rng.integers(1, 4), rng.integers(1, 6)
            h, w = 2 * rng.integers(1, 12), 2 * rng.integers(1, 12)
            x = rng.normal(size=(c, b, h, w))
            np.testing.assert_allclose(idwt2_haar(dwt2_haar(x)), x, atol=RECON_TOL)

    def test_synthesis_example(self):
        """ll = 4, details 0 synthesizes a constant-1 map."""
        shape = (1, 1, 3, 2)
        q = WaveletQuad(
            ll=np.full(shape, 4.0),
            lh=np.zeros(shape),
            hl=np.zeros(shape),
            hh=np.zeros(shape),
        )
        np.testing.assert_array_equal(idwt2_haar(q), np.ones((1, 1, 6, 4)))


class TestAdjoints:
    def test_dwt_backward_is_adjoint(self):
        """<dwt(x), q> == <x, dwt_backward(q)> for random x, q."""
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.normal(size=(2, 3, 8, 10))
            q = _rand_quad(rng, (2, 3, 4, 5))
            fx = dwt2_haar(x)
            lhs = sum(
                np.sum(a * b)
                for a, b in zip((fx.ll, fx.lh, fx.hl, fx.hh), (q.ll, q.lh, q.hl, q.hh))
            )
            rhs = np.sum(x * dwt_backward(q))
            np.testing.assert_allclose(lhs, rhs, rtol=ADJOINT_TOL, atol=ADJOINT_TOL)

    def test_idwt_backward_is_adjoint(self):
        """<idwt(q), y> == <q, idwt_backward(y)> for random q, y."""
        rng = np.random.default_rng(4)
        for _ in range(20):
            q = _rand_quad(rng, (1, 2, 5, 4))
            y = rng.normal(size=(1, 2, 10, 8))
            lhs = np.sum(idwt2_haar(q) * y)
            gy = idwt_backward(y)
            rhs = sum(
                np.sum(a * b)
                for a, b in zip((q.ll, q.lh, q.hl, q.hh), (gy.ll, gy.lh, gy.hl, gy.hh))
            )
            np.testing.assert_allclose(lhs, rhs, rtol=ADJOINT_TOL, atol=ADJOINT_TOL)

    def test_constant_ll_gradient(self):
        """A constant-1 ll gradient back-propagates to constant-1 spatial gradient."""
        shape = (1, 1, 3, 3)
        q = WaveletQuad(
            ll=np.ones(shape), lh=np.zeros(shape), hl=np.zeros(shape), hh=np.zeros(shape)
        )
        np.testing.assert_array_equal(dwt_backward(q), np.ones((1, 1, 6, 6)))

    def test_finite_difference(self):
        """d/dx sum(dwt(x).lh) matches central differences."""
        rng = np.random.default_rng(5)
        x = rng.normal(size=(4, 6))
        ones = np.ones((2, 3))
        zeros = np.zeros((2, 3))
        grad = dwt_backward(WaveletQuad(ll=zeros, lh=ones, hl=zeros, hh=zeros))
        for idx in np.ndindex(x.shape):
            xp, xm = x.copy(), x.copy()
            xp[idx] += FD_STEP
            xm[idx] -= FD_STEP
            fd = (np.sum(dwt2_haar(xp).lh) - np.sum(dwt2_haar(xm).lh)) / (2 * FD_STEP)
            np.testing.assert_allclose(grad[idx], fd, atol=1e-8)


def test_quad_shape_mismatch_rejected():
    with pytest.raises(ValueError, match="differ"):
        WaveletQuad(np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 3)))
