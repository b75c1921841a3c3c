import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mather_lab.errors import DimensionMismatch, EmptyWindow, NotCoprime
from mather_lab.flows import ConstantField, FourierField, RationalConstantField, Trajectory, integrate
from mather_lab.fourier import FourierSeries
from mather_lab.measures import (
    BASE,
    TANGENT,
    DiscreteMeasure,
    GridDensity,
    empirical_from_trajectory,
    graph_lift,
    line_family,
    min_dist_to_lines,
    pushforward,
    torus_cost,
    torus_distance,
    wrap,
)
from mather_lab.transport import w1_exact

coords = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def test_wrap_into_unit_interval():
    x = wrap([-1e-18, 1.0, 2.5, -0.25])
    assert np.all((x >= 0) & (x < 1))
    assert x.tolist() == [0.0, 0.0, 0.5, 0.75]


def test_torus_distance_examples():
    assert torus_distance([0, 0], [0.5, 0.5]) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert torus_distance([0.1, 0.1], [0.9, 0.9]) == pytest.approx(math.sqrt(0.08), abs=1e-15)
    assert torus_distance([0.3, 0.7], [0.3, 0.7]) == 0.0
    with pytest.raises(DimensionMismatch):
        torus_distance([0, 0], [0, 0, 0])


def brute_distance(x, y):
    """Oracle: explicit minimum over the 3^n integer shifts."""
    n = len(x)
    best = math.inf
    for shift in np.ndindex(*([3] * n)):
        z = np.array(shift) - 1
        best = min(best, float(np.linalg.norm(np.asarray(x) - np.asarray(y) + z)))
    return best


@given(st.lists(st.tuples(coords, coords, coords), min_size=3, max_size=3))
@settings(max_examples=200, deadline=None)
def test_torus_metric_axioms(triple):
    x, y, z = (wrap(np.array(p)) for p in triple)
    dxy = torus_distance(x, y)
    assert dxy == pytest.approx(brute_distance(x, y), abs=1e-12)
    assert dxy == torus_distance(y, x)
    assert dxy <= torus_distance(x, z) + torus_distance(z, y) + 1e-12
    assert dxy <= math.sqrt(3) / 2 + 1e-15


def test_triangle_inequality_many_triples():
    rng = np.random.default_rng(1)
    x, y, z = rng.random((3, 10_000, 2))
    assert np.all(torus_distance(x, y) <= torus_distance(x, z) + torus_distance(z, y) + 1e-12)


def test_cost_matrix_matches_pairwise():
    rng = np.random.default_rng(2)
    X, Y = rng.random((7, 3)), rng.random((5, 3))
    C = torus_cost(X, Y)
    for i in range(7):
        for j in range(5):
            assert C[i, j] == pytest.approx(torus_distance(X[i], Y[j]), abs=1e-15)
    U, V = rng.random((7, 3)), rng.random((5, 3))
    CL = torus_cost(X, Y, U, V)
    assert CL[3, 2] == pytest.approx(math.sqrt(C[3, 2] ** 2 + np.sum((U[3] - V[2]) ** 2)), abs=1e-15)


def test_discrete_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure(np.zeros((2, 2)), [0.5, 0.4])
    with pytest.raises(DimensionMismatch):
        DiscreteMeasure(np.zeros((2, 2)), [1.0])
    mu = DiscreteMeasure.uniform(np.random.default_rng(0).random((5, 2)))
    assert mu.space_tag == BASE
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_measure_serialization_roundtrip():
    rng = np.random.default_rng(3)
    mu = DiscreteMeasure(rng.random((6, 2)), np.full(6, 1 / 6), rng.standard_normal((6, 2)))
    assert mu.space_tag == TANGENT
    for back in (DiscreteMeasure.from_json(mu.to_json()), DiscreteMeasure.from_binary(mu.to_binary())):
        assert np.array_equal(back.points, mu.points)
        assert np.array_equal(back.velocities, mu.velocities)
        assert np.array_equal(back.weights, mu.weights)
    blob = mu.project().to_binary()
    assert blob[:4] == b"MLM1"
    assert DiscreteMeasure.from_binary(blob).space_tag == BASE


def test_line_family_gaps():
    assert line_family(1, 3).gap == pytest.approx(1 / math.sqrt(10), abs=1e-15)
    assert line_family(0, 1).gap == 1.0
    assert line_family(1, 2).gap == pytest.approx(1 / math.sqrt(5), abs=1e-15)
    assert line_family(1, 3).k == 3
    with pytest.raises(NotCoprime):
        line_family(2, 4)


def test_line_gap_cross_checked_by_sampling():
    # the largest nearest-line distance on the torus is half the gap
    L = line_family(1, 2)
    rng = np.random.default_rng(4)
    pts = rng.random((200_000, 2))
    assert min_dist_to_lines(pts, L).max() == pytest.approx(L.gap / 2, rel=1e-2)


def test_min_dist_examples():
    assert min_dist_to_lines([0.3, 0.5], line_family(0, 1)) == pytest.approx(0.5)
    L = line_family(1, 3)
    on_line = L.sample(per_line=16).points
    assert np.abs(min_dist_to_lines(on_line, L)).max() < 1e-15


def test_min_dist_matches_dense_sampling_oracle():
    L = line_family(1, 3)
    x = np.array([0.0, 0.5 / 3 * 0.5])
    dense = L.sample(per_line=200_000).points
    oracle = torus_distance(dense, x).min()
    assert min_dist_to_lines(x, L) == pytest.approx(oracle, abs=1e-6)


def test_min_dist_is_one_lipschitz():
    L = line_family(2, 5)
    rng = np.random.default_rng(5)
    x, y = rng.random((2, 20_000, 2))
    y[:10_000] = wrap(x[:10_000] + 1e-3 * rng.standard_normal((10_000, 2)))
    gap = np.abs(min_dist_to_lines(x, L) - min_dist_to_lines(y, L)) - torus_distance(x, y)
    assert gap.max() <= 1e-9


def test_line_family_flow_invariant():
    # with x-spacing 1/40, every t in {0.1, 1, q} maps the sampling onto itself
    L = line_family(1, 3)
    mu = L.sample(per_line=40)
    for t in (0.1, 1.0, 3.0):
        moved = pushforward(mu, lambda p: wrap(p + t * L.velocity))
        assert np.abs(min_dist_to_lines(moved.points, L)).max() < 1e-12
        assert w1_exact(moved, mu)[0].value <= 1e-6


def test_pushforward_examples():
    mu = DiscreteMeasure.uniform(np.random.default_rng(6).random((10, 2)))
    same = pushforward(mu, lambda p: p)
    assert np.array_equal(same.points, mu.points) and np.array_equal(same.weights, mu.weights)
    grid = GridDensity.uniform(16).to_discrete()
    shifted = pushforward(grid, lambda p: wrap(p + np.array([3 / 16, 5 / 16])))
    back = GridDensity.from_points(shifted.points, shifted.weights, 16)
    assert np.allclose(back.masses, 1 / 256, atol=1e-15)


def test_graph_lift_examples():
    omega = np.array([1.0, (math.sqrt(5) - 1) / 2])
    lift = graph_lift(GridDensity.uniform(8), ConstantField(omega))
    assert lift.integrate(lambda x, v: np.sum(v**2, axis=1)) == pytest.approx(omega @ omega, abs=1e-14)
    L = line_family(1, 3)
    lift = graph_lift(L, RationalConstantField(1, 3))
    assert lift.integrate(lambda x, v: v[:, 0]) == pytest.approx(1.0)
    assert lift.integrate(lambda x, v: v[:, 1]) == pytest.approx(1 / 3)
    # Fourier field on a cloud: direct summation oracle
    rng = np.random.default_rng(7)
    mu = DiscreteMeasure.uniform(rng.random((50, 2)))
    V = FourierField([FourierSeries.cosine((1, 0)), FourierSeries.sine((1, 1))])
    direct = np.mean([np.cos(2 * np.pi * x[0]) ** 2 + x[1] * np.sin(2 * np.pi * (x[0] + x[1]))
                      for x in mu.points])
    val = graph_lift(mu, V).integrate(lambda x, v: v[:, 0] ** 2 + x[:, 1] * v[:, 1])
    assert val == pytest.approx(direct, abs=1e-13)


def test_lift_then_project_is_identity():
    mu = DiscreteMeasure.uniform(np.random.default_rng(8).random((20, 2)))
    lifted = graph_lift(mu, ConstantField([1.0, 0.3])).to_discrete()
    assert lifted.space_tag == TANGENT
    back = lifted.project()
    assert np.array_equal(back.points, mu.points) and np.array_equal(back.weights, mu.weights)


def test_grid_density_mass_conservation():
    rng = np.random.default_rng(9)
    pts = rng.random((1000, 2))
    g = GridDensity.from_points(pts, None, 10)
    assert g.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert g.integrate(lambda x: np.ones(len(x))) == pytest.approx(1.0)


def test_empirical_from_trajectory():
    traj = integrate(ConstantField([1.0, 0.5]), [0.0, 0.0], 2.0, 1e-2)
    emp = empirical_from_trajectory(traj, burn_in=1.0)
    assert emp.space_tag == TANGENT
    assert len(emp) == 101
    assert np.allclose(emp.velocities, [1.0, 0.5])
    assert np.allclose(emp.points[:, 1], wrap(0.5 * traj.times[traj.times >= 1.0]))
    with pytest.raises(EmptyWindow):
        empirical_from_trajectory(traj, burn_in=2.0)
    bare = Trajectory(traj.times, traj.points)
    assert empirical_from_trajectory(bare).space_tag == BASE
