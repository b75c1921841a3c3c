import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mather_lab.errors import NearResonance, NonzeroMean, SingularHessian
from mather_lab.fourier import FourierSeries, grid_points
from mather_lab.linres import (
    Observable,
    alpha_expansion,
    expand,
    finite_difference_response,
    linear_response,
    richardson,
    response_json,
    response_report,
    solve_c1_quadratic,
    solve_cohomological,
    solve_conjugacy,
    velocity_correction,
    conjugacy_residual,
)

NU = (math.sqrt(5) - 1) / 2
OMEGA = np.array([1.0, NU])


def zero_mean(f):
    c = f.coeffs.copy()
    c[(f.K,) * f.n] = 0.0
    return FourierSeries(c, f.real)


def cohomological_residual(f, u, omega, N):
    X = grid_points(N, f.n)
    return np.abs(u.directional(omega)(X) - (f.mean.real - f(X))).max()


def test_constant_f_gives_zero_corrector():
    u = solve_cohomological(FourierSeries.constant(2.5, 2), OMEGA)
    assert np.all(u.coeffs == 0)


def test_cosine_corrector():
    f = FourierSeries.cosine((1, 0))
    u = solve_cohomological(f, OMEGA)
    X = np.random.default_rng(0).random((200, 2))
    # <omega, grad u> = -cos(2 pi x1) is solved by -sin(2 pi x1) / (2 pi)
    assert np.abs(u(X) + np.sin(2 * np.pi * X[:, 0]) / (2 * np.pi)).max() < 1e-15
    assert cohomological_residual(f, u, OMEGA, 16) < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_cohomological_residual_band8(seed):
    f = FourierSeries.random_real(2, 8, np.random.default_rng(seed))
    u = solve_cohomological(f, OMEGA)
    assert u.mean == 0
    assert cohomological_residual(f, u, OMEGA, 128) < 1e-10


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=20, deadline=None)
def test_cohomological_residual_property(seed, K):
    f = FourierSeries.random_real(2, K, np.random.default_rng(seed))
    u = solve_cohomological(f, OMEGA)
    assert cohomological_residual(f, u, OMEGA, 4 * K + 2) < 1e-10


def test_resonance_detected():
    f = FourierSeries.cosine((1, -2))
    with pytest.raises(NearResonance) as info:
        solve_cohomological(f, [1.0, 0.5])
    assert tuple(abs(k) for k in info.value.k) == (1, 2)


def test_velocity_correction_examples():
    u0 = FourierSeries.zeros(2, 2)
    assert all(np.all(W.coeffs == 0) for W in velocity_correction(u0, [0, 0], np.eye(2)))
    f = FourierSeries.cosine((1, 2))
    u = solve_cohomological(f, OMEGA)
    W = velocity_correction(u, [0, 0], np.eye(2))
    k = np.array([1, 2])
    # coefficient k f_k / <k, omega> with sign fixed by <omega, grad u> = [f] - f
    for j in range(2):
        assert W[j].coefficient((1, 2)) == pytest.approx(-k[j] * 0.5 / (k @ OMEGA), abs=1e-14)
        assert np.count_nonzero(W[j].coeffs) == 2
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    Wc = velocity_correction(u, [0.1, -0.2], A)
    assert np.allclose([w.mean.real for w in Wc], A @ [0.1, -0.2], atol=1e-15)


def test_c1_is_zero():
    f = FourierSeries.random_real(2, 5, np.random.default_rng(1))
    u = solve_cohomological(f, OMEGA)
    for A in (np.eye(2), np.diag([1.0, 2.0]), np.array([[2.0, 0.5], [0.5, 1.0]])):
        assert np.abs(solve_c1_quadratic(A, u)).max() < 1e-12
    with pytest.raises(SingularHessian):
        solve_c1_quadratic(np.array([[1.0, 0.0], [0.0, 0.0]]), u)
    with pytest.raises(SingularHessian):
        solve_c1_quadratic(np.array([[1.0, 0.2], [0.0, 1.0]]), u)


def test_conjugacy_examples():
    zero = [FourierSeries.zeros(2, 2), FourierSeries.zeros(2, 2)]
    assert all(np.all(p.coeffs == 0) for p in solve_conjugacy(zero, OMEGA))
    W = [FourierSeries.sine((2, 1), 0.4), FourierSeries.zeros(2, 2)]
    psi = solve_conjugacy(W, OMEGA)
    k = np.array([2, 1])
    assert psi[0].coefficient((2, 1)) == pytest.approx(-W[0].coefficient((2, 1)) / (2j * np.pi * (k @ OMEGA)),
                                                       abs=1e-15)
    X = grid_points(12, 2)
    assert np.abs(psi[0].directional(OMEGA)(X) + W[0](X)).max() < 1e-12
    with pytest.raises(NonzeroMean):
        solve_conjugacy([FourierSeries.constant(0.1, 2), FourierSeries.zeros(2, 1)], OMEGA)


def test_alpha_expansion_examples():
    f = FourierSeries.constant(0.3, 2) + FourierSeries.cosine((1, 1))
    assert alpha_expansion(f, OMEGA, [0, 0]) == pytest.approx(0.3)
    assert alpha_expansion(zero_mean(f), OMEGA, [0, 0]) == 0.0
    assert alpha_expansion(zero_mean(f), OMEGA, [1, 0]) == pytest.approx(1.0)


def test_expand_pipeline():
    f = FourierSeries.random_real(2, 3, np.random.default_rng(2))
    exp = expand(f, OMEGA, np.eye(2))
    assert exp.u1.mean == 0
    assert exp.alpha1 == pytest.approx(f.mean.real)
    assert exp.field(OMEGA, 0.01).n == 2
    X = np.random.default_rng(3).random((5, 2))
    assert np.allclose(exp.conjugacy(0.0)(X), X)


def test_observable_gradients():
    for g in (Observable.constant(2.0), Observable.linear_velocity([1.0, -2.0]),
              Observable.mode_times_velocity((1, 2), 1, 0.7)):
        assert g.gradient_error(2, 1000) < 1e-6


def test_response_trivial_cases():
    f = FourierSeries.random_real(2, 3, np.random.default_rng(4))
    assert linear_response(Observable.constant(), f, OMEGA, np.eye(2)) == 0.0
    assert abs(linear_response(Observable.linear_velocity([1.0, 2.0]), zero_mean(f), OMEGA, np.eye(2))) < 1e-14
    D = finite_difference_response(Observable.mode_times_velocity((1, 0), 1), FourierSeries.constant(1.0, 2),
                                   OMEGA, np.eye(2), [1e-2, 5e-3])
    assert D == [0.0, 0.0]
    with pytest.raises(ValueError):
        finite_difference_response(Observable.constant(), f, OMEGA, np.eye(2), [1e-3, 1e-2])


def test_response_hand_expanded_instance():
    # g = cos(2 pi x1) v2, f = cos(2 pi x1), A = I:
    # psi1 = (sin(2 pi x1)/(2 pi), 0), W = (-cos(2 pi x1), 0), so R = -nu/2
    g = Observable.mode_times_velocity((1, 0), 1)
    f = FourierSeries.cosine((1, 0))
    R = linear_response(g, f, OMEGA, np.eye(2))
    assert R == pytest.approx(-NU / 2, abs=1e-14)
    eps = [1e-2, 5e-3, 2.5e-3]
    D = finite_difference_response(g, f, OMEGA, np.eye(2), eps)
    assert richardson(eps, D) == pytest.approx(R, abs=1e-6)
    # |D - R| <= C eps with a bounded C; on this instance the first-order
    # term of D - R vanishes and the remainder is nu eps^2 / 16
    C = [abs(d - R) / e for d, e in zip(D, eps)]
    assert max(C) < 1e-3
    assert D[0] - R == pytest.approx(NU * eps[0] ** 2 / 16, rel=1e-2)


def test_response_first_order_on_generic_instance():
    rng = np.random.default_rng(5)
    f = zero_mean(FourierSeries.random_real(2, 3, rng))
    A = np.array([[1.5, 0.2], [0.2, 0.8]])
    g = Observable.mode_times_velocity((1, 1), 0, 1.3)
    R = linear_response(g, f, OMEGA, A)
    # the small divisor at k = (2, -3) makes psi1 of size ~10, so the asymptotic
    # regime starts once eps * |psi1| << 1
    eps = [4e-4, 2e-4, 1e-4, 5e-5]
    D = finite_difference_response(g, f, OMEGA, A, eps)
    C = [(d - R) / e for d, e in zip(D, eps)]
    assert max(C) / min(C) < 1.01
    assert richardson(eps, D) == pytest.approx(R, abs=1e-5)


def test_richardson_on_polynomial():
    eps = np.array([0.1, 0.05, 0.025])
    vals = 2.0 + 3 * eps - 5 * eps**2
    assert richardson(eps, vals) == pytest.approx(2.0, abs=1e-12)


def test_conjugacy_residual_second_order():
    f = FourierSeries.cosine((1, 0)) + 0.5 * FourierSeries.sine((1, 1))
    res = {e: conjugacy_residual(f, OMEGA, np.eye(2), e, T=2.0) for e in (1e-2, 1e-3)}
    C = [res[e] / e**2 for e in res]
    assert 0.5 <= C[0] / C[1] <= 2.0


def test_report_json():
    g = Observable.mode_times_velocity((1, 0), 1)
    rep = response_report(g, FourierSeries.cosine((1, 0)), OMEGA, np.eye(2), [1e-2, 5e-3])
    d = json.loads(response_json(rep))
    assert set(d) >= {"alpha1", "c1", "response", "fd_ladder"}
    assert d["fd_ladder"][1]["eps"] == 5e-3
    assert d["c1"] == [0.0, 0.0]
