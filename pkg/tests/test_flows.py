import math

import numpy as np
import pytest

from mather_lab.errors import BadDelta, DimensionMismatch, NoReturn, NotCoprime, StepTooLarge
from mather_lab.flows import (
    AttractingField,
    ConstantField,
    FourierField,
    RationalConstantField,
    attracting_field,
    integrate,
    mane_action,
    poincare_map,
)
from mather_lab.fourier import FourierSeries
from mather_lab.measures import line_family, min_dist_to_lines, wrap

NU = (math.sqrt(5) - 1) / 2


def fourier_field():
    return FourierField([FourierSeries.constant(1.0, 2) + 0.1 * FourierSeries.cosine((0, 1)),
                         FourierSeries.constant(NU, 2) + 0.05 * FourierSeries.sine((1, 1))])


def test_mane_action_zero_locus_and_unit():
    V = fourier_field()
    rng = np.random.default_rng(0)
    x = rng.random((10, 2))
    assert np.abs(mane_action(x, V(x), V)).max() == 0.0
    assert np.allclose(mane_action(x, V(x) + np.array([1.0, 0.0]), V), 0.5, atol=1e-15)
    with pytest.raises(DimensionMismatch):
        mane_action(x, np.zeros((10, 3)), V)


def test_mane_action_attracting_direct_formula():
    V = attracting_field(1, 3, 0.05)
    rng = np.random.default_rng(1)
    x, v = rng.random((20, 2)), rng.standard_normal((20, 2))
    s = 3 * x[:, 1] - x[:, 0]
    direct = 0.5 * ((v[:, 0] - 1) ** 2 + (v[:, 1] - 1 / 3 + 0.05 * np.sin(2 * np.pi * s)) ** 2)
    assert np.allclose(mane_action(x, v, V), direct, atol=1e-14)


def test_attracting_validation():
    with pytest.raises(BadDelta):
        attracting_field(1, 3, 0.3)
    with pytest.raises(BadDelta):
        attracting_field(1, 3, -0.01)
    with pytest.raises(NotCoprime):
        attracting_field(2, 4, 0.1)


def test_attracting_delta_zero_is_rational_constant():
    rng = np.random.default_rng(2)
    x = rng.random((50, 2))
    assert np.array_equal(attracting_field(1, 3, 0.0)(x), RationalConstantField(1, 3)(x))


def test_attracting_on_lines_has_slope_exactly():
    V = attracting_field(2, 5, 0.1)
    pts = line_family(2, 5).sample(per_line=7).points
    # sampled lines sit at s = integer up to rounding
    assert np.abs(V(pts)[:, 1] - 0.4).max() < 1e-14
    assert V(np.array([0.0, 0.0]))[1] == 0.4


def s_velocity(V, s):
    """ds/dt along the field at strip coordinate s (independent of position along the line)."""
    x = np.zeros((np.size(s), 2))
    x[:, 1] = np.asarray(s) / V.q
    w = V(x)
    return V.q * w[:, 1] - V.p * w[:, 0]


@pytest.mark.parametrize("delta", [0.01, 0.05, 0.2])
def test_transverse_eigenvalue_finite_difference(delta):
    V = attracting_field(1, 3, delta)
    h = 1e-6
    slope = (s_velocity(V, h) - s_velocity(V, -h))[0] / (2 * h)
    assert slope == pytest.approx(V.transverse_rate, rel=1e-8)
    assert V.transverse_rate == pytest.approx(-2 * math.pi * 3 * delta)
    # midline repels
    mid = (s_velocity(V, 0.5 + h) - s_velocity(V, 0.5 - h))[0] / (2 * h)
    assert mid > 0


def test_integrate_constant_closed_form():
    traj = integrate(ConstantField([1.0, NU]), [0.0, 0.0], 10.0, 1e-3)
    expected = np.array([10.0 % 1.0, (10 * NU) % 1.0])
    assert np.abs(traj.endpoint - expected).max() < 1e-12
    t = traj.times
    assert np.allclose(np.diff(t), t[1] - t[0], rtol=0, atol=1e-12)
    assert len(traj.points) == len(traj.velocities) == len(t)


def test_integrate_rational_period():
    traj = integrate(RationalConstantField(1, 3), [0.0, 0.0], 3.0, 1e-3)
    d = np.abs(traj.endpoint - np.rint(traj.endpoint))
    assert d.max() < 1e-10
    forced = integrate(RationalConstantField(1, 3), [0.0, 0.0], 3.0, 1e-3, method="rk4")
    d = np.abs(forced.endpoint - np.rint(forced.endpoint))
    assert d.max() < 1e-10


def test_integrate_errors():
    with pytest.raises(StepTooLarge):
        integrate(ConstantField([1.0, 0.5]), [0, 0], 1.0, 0.02)
    with pytest.raises(ValueError):
        integrate(ConstantField([1.0, 0.5]), [0, 0], 0.0, 1e-3)
    with pytest.raises(DimensionMismatch):
        integrate(ConstantField([1.0, 0.5]), [0, 0, 0], 1.0, 1e-3)


def test_rk4_fourth_order():
    # closed-form oracle: the s-dynamics of the attracting field integrate exactly
    # start near the repelling midline so the error is not damped to rounding level
    V = attracting_field(1, 3, 0.2)
    x0 = np.array([0.0, 0.45 / 3])
    exact = V.exact_flow(x0, 1.0)[0]
    errs = []
    for dt in (0.01, 0.005, 0.0025):
        traj = integrate(V, x0, 1.0, dt, wrap_coords=False)
        errs.append(np.abs(traj.endpoint - exact).max())
    assert errs[0] / errs[1] >= 14
    assert errs[1] / errs[2] >= 14


def test_rk4_on_constant_field_is_exact_to_rounding():
    V = ConstantField([1.0, NU])
    x0 = np.array([0.3, 0.4])
    for dt in (0.01, 0.005):
        rk = integrate(V, x0, 5.0, dt, wrap_coords=False, method="rk4").endpoint
        assert np.abs(rk - (x0 + 5.0 * np.array([1.0, NU]))).max() < 1e-11


def test_exact_flow_satisfies_ode():
    V = attracting_field(2, 5, 0.1)
    x0 = np.random.default_rng(3).random((5, 2))
    h = 1e-6
    for t in (0.0, 0.7, 3.0):
        deriv = (V.exact_flow(x0, t + h) - V.exact_flow(x0, t - h)) / (2 * h)
        assert np.allclose(deriv, V(V.exact_flow(x0, t)), atol=1e-7)


def test_attracting_long_run_converges_to_lines():
    V = attracting_field(1, 3, 0.05)
    x0 = np.array([0.0, 0.1])
    traj = integrate(V, x0, 2000.0, 1e-2, record_every=1000)
    L = line_family(1, 3)
    final = float(min_dist_to_lines(traj.endpoint, L))
    assert final < 1e-6
    # the closed form predicts contraction at rate exp(-2 pi q delta t)
    predicted = float(min_dist_to_lines(V.exact_flow(x0, 2000.0)[0], L))
    assert final == pytest.approx(predicted, abs=1e-9)


def test_trajectories_realize_zero_action():
    V = fourier_field()
    traj = integrate(V, [0.2, 0.7], 5.0, 1e-3, record_every=10)
    # velocity estimated from the unwrapped path by central differences
    raw = integrate(V, [0.2, 0.7], 5.0, 1e-3, wrap_coords=False)
    vdiff = (raw.points[2:] - raw.points[:-2]) / (2 * (raw.times[1] - raw.times[0]))
    act = mane_action(raw.points[1:-1], vdiff, V)
    assert act.max() <= 1e-8
    assert np.all(mane_action(traj.points, traj.velocities, V) == 0.0)


def test_trajectory_csv(tmp_path):
    traj = integrate(ConstantField([1.0, NU]), [0.0, 0.0], 0.05, 1e-2)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0].split(",") == ["t", "x1", "x2", "v1", "v2"]
    assert len(rows) == 1 + len(traj.times)


def test_batch_integration_matches_single():
    V = attracting_field(1, 2, 0.1)
    X0 = np.random.default_rng(4).random((4, 2))
    batch = integrate(V, X0, 1.0, 1e-2)
    for i in range(4):
        single = integrate(V, X0[i], 1.0, 1e-2)
        assert np.array_equal(batch.points[:, i], single.points)


def test_poincare_examples():
    assert poincare_map(RationalConstantField(1, 3), 0.1) == pytest.approx(0.1 + 1 / 3, abs=1e-15)
    assert poincare_map(ConstantField([1.0, NU]), 0.8) == pytest.approx(wrap(0.8 + NU), abs=1e-15)
    with pytest.raises(NoReturn):
        poincare_map(ConstantField([-1.0, 0.2]), 0.1)


def test_poincare_numeric_matches_closed_form():
    V = attracting_field(1, 3, 0.05)
    y0 = 0.1
    # an exact return: x advances by 1 in unit time
    expected = float(wrap(V.exact_flow([0.0, y0], 1.0)[0, 1]))
    assert poincare_map(V, y0) == pytest.approx(expected, abs=1e-9)


def test_poincare_period_three_cycle():
    V = attracting_field(1, 3, 0.05)
    y = 0.02
    for _ in range(3 * 30):
        y = poincare_map(V, y, dt=1e-2)
    # converged to a point of the cycle y -> y + 1/3
    y3 = y
    for _ in range(3):
        y3 = poincare_map(V, y3, dt=1e-2)
    assert abs(wrap(y3 - y + 0.5) - 0.5) < 1e-6
    assert min(abs(y - j / 3) for j in range(4)) < 1e-6


def test_fourier_field_requires_hermitian():
    bad = FourierSeries.from_modes({(1, 0): 1.0}, 2)
    with pytest.raises(ValueError):
        FourierField([bad, FourierSeries.constant(1.0, 2)])
    assert FourierField([FourierSeries.constant(1.0, 2), FourierSeries.constant(NU, 2)]).is_constant
    assert not fourier_field().is_constant
    assert isinstance(attracting_field(1, 3, 0.1), AttractingField)
