import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mather_lab.errors import Aliasing
from mather_lab.fourier import FourierSeries, dft_forward, dft_inverse, grid_points


def test_constant_transform():
    c = dft_forward(np.ones((8, 8)))
    assert c.mean == pytest.approx(1.0)
    assert np.abs(c.coeffs).sum() == pytest.approx(1.0)


def test_cosine_coefficients():
    X = grid_points(16, 2)
    samples = np.cos(2 * np.pi * X[:, 0]).reshape(16, 16)
    c = dft_forward(samples, K=4)
    assert c.coefficient((1, 0)) == pytest.approx(0.5, abs=1e-15)
    assert c.coefficient((-1, 0)) == pytest.approx(0.5, abs=1e-15)
    c.coeffs[c.K + 1, c.K] = 0
    c.coeffs[c.K - 1, c.K] = 0
    assert np.abs(c.coeffs).max() < 1e-15


@pytest.mark.parametrize("n", [1, 2, 3])
def test_roundtrip_random_band8(n):
    rng = np.random.default_rng(n)
    f = FourierSeries.random_real(n, 8 if n < 3 else 4, rng)
    N = 2 * f.K + 3
    back = dft_forward(dft_inverse(f, N), f.K)
    assert np.abs(back.coeffs - f.coeffs).max() < 1e-12


def test_aliasing_guard():
    f = FourierSeries.random_real(2, 5, np.random.default_rng(0))
    with pytest.raises(Aliasing):
        dft_inverse(f, 10)
    with pytest.raises(Aliasing):
        dft_forward(np.zeros((10, 10)), K=5)


def test_evaluate_matches_grid_and_parseval():
    rng = np.random.default_rng(1)
    f = FourierSeries.random_real(2, 6, rng)
    N = 20
    grid = dft_inverse(f, N)
    pts = grid_points(N, 2)
    assert np.abs(f(pts) - grid.ravel()).max() < 1e-12
    assert np.mean(grid**2) == pytest.approx(np.sum(np.abs(f.coeffs) ** 2), abs=1e-10)


def test_hermitian_flag_and_real_values():
    f = FourierSeries.random_real(2, 3, np.random.default_rng(2))
    assert f.is_hermitian() and f.real
    pts = np.random.default_rng(3).random((100, 2))
    # the half-spectrum evaluation equals the complex sum
    full = np.exp(2j * np.pi * pts @ f.modes().T) @ f.coeffs.ravel()
    assert np.abs(full.imag).max() < 1e-12
    assert np.abs(f(pts) - full.real).max() < 1e-12


def test_derivative_of_sine():
    s = FourierSeries.sine((1, 2), 1.0)
    pts = np.random.default_rng(4).random((50, 2))
    d = s.derivative(1)
    assert np.allclose(d(pts), 4 * np.pi * np.cos(2 * np.pi * (pts[:, 0] + 2 * pts[:, 1])), atol=1e-12)
    w = np.array([1.0, 0.3])
    assert np.allclose(s.directional(w)(pts), 2 * np.pi * (1 + 0.6) * np.cos(2 * np.pi * (pts @ [1, 2])))


def test_json_roundtrip():
    f = FourierSeries.random_real(2, 2, np.random.default_rng(5))
    back = FourierSeries.from_json(f.to_json())
    assert np.array_equal(back.coeffs, f.coeffs)
    assert set(f.to_dict()) == {"n", "K", "entries"}


@given(st.integers(0, 3), st.integers(1, 4), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_algebra(K, k, scale):
    a = FourierSeries.cosine((k, 0), K=k + K)
    b = FourierSeries.sine((0, k))
    pts = np.random.default_rng(0).random((20, 2))
    assert np.allclose((a + scale * b)(pts), a(pts) + scale * b(pts), atol=1e-12)
    assert np.allclose((a - b + 0.5)(pts), a(pts) - b(pts) + 0.5, atol=1e-12)
