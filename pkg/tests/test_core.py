import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hgeom import core
from hgeom.core import Point
from hgeom.errors import DimensionError

coord = st.floats(-5, 5, allow_nan=False)


@st.composite
def points(draw, n=None):
    n = draw(st.integers(1, 3)) if n is None else n
    vals = draw(st.lists(coord, min_size=2 * n + 1, max_size=2 * n + 1))
    return Point.from_array(np.array(vals))


@st.composite
def point_triples(draw):
    n = draw(st.integers(1, 3))
    return draw(points(n)), draw(points(n)), draw(points(n))


def close(p, q, tol=1e-9):
    return np.allclose(p.as_array(), q.as_array(), atol=tol, rtol=tol)


def test_group_law_example():
    p = Point([1.0], [0.0], 0.0)
    q = Point([0.0], [1.0], 0.0)
    assert core.group_mul(p, q) == Point([1.0], [1.0], 2.0)
    assert core.group_mul(q, p) == Point([1.0], [1.0], -2.0)


def test_dilation_and_gauge_examples():
    assert core.dilate(2.0, Point([1.0], [1.0], 1.0)) == Point([2.0], [2.0], 4.0)
    assert core.gauge_norm(Point([1.0], [0.0], 0.0)) == pytest.approx(1.0)
    assert core.gauge_norm(Point([0.0], [0.0], 1.0)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        core.dilate(0.0, Point.origin(1))


def test_point_validation():
    with pytest.raises(DimensionError):
        Point([1.0, 2.0], [0.0], 0.0)
    with pytest.raises(ValueError):
        Point([np.nan], [0.0], 0.0)


@given(point_triples())
def test_group_associative(pqr):
    p, q, r = pqr
    lhs = core.group_mul(core.group_mul(p, q), r)
    rhs = core.group_mul(p, core.group_mul(q, r))
    assert close(lhs, rhs, 1e-9)


@given(points())
def test_inverse_and_identity(p):
    e = Point.origin(p.n)
    assert close(core.group_mul(p, core.group_inv(p)), e)
    assert close(core.group_mul(e, p), p)


@given(points(), st.floats(0.1, 10))
def test_gauge_norm_homogeneous(p, R):
    assert core.gauge_norm(core.dilate(R, p)) == pytest.approx(R * core.gauge_norm(p), rel=1e-12, abs=1e-12)


@given(point_triples(), st.floats(0.1, 10))
def test_dilation_is_automorphism(pqr, R):
    p, q, _ = pqr
    lhs = core.dilate(R, core.group_mul(p, q))
    rhs = core.group_mul(core.dilate(R, p), core.dilate(R, q))
    assert close(lhs, rhs, 1e-8)


@given(st.integers(1, 4), st.data())
def test_j_is_orthogonal_and_squares_to_minus_one(n, data):
    h = np.array(data.draw(st.lists(coord, min_size=2 * n, max_size=2 * n)))
    g = np.array(data.draw(st.lists(coord, min_size=2 * n, max_size=2 * n)))
    assert np.allclose(core.j_apply(core.j_apply(h)), -h)
    assert core.inner(core.j_apply(h), g) == pytest.approx(-core.inner(h, core.j_apply(g)), abs=1e-9)
    assert core.inner(core.j_apply(h), h) == pytest.approx(0.0, abs=1e-9)


def test_connection_table():
    n = 2
    E = core.frame_basis(n)
    X = lambda i: E[i]
    Y = lambda i: E[n + i]
    T = E[2 * n]
    for i in range(n):
        for j in range(n):
            d = 1.0 if i == j else 0.0
            assert np.allclose(core.connection_term(X(i), Y(j)), 2 * d * T)
            assert np.allclose(core.connection_term(Y(i), X(j)), -2 * d * T)
            assert np.allclose(core.connection_term(X(i), X(j)), 0)
            assert np.allclose(core.connection_term(Y(i), Y(j)), 0)
        assert np.allclose(core.connection_term(X(i), T), -2 * Y(i))
        assert np.allclose(core.connection_term(Y(i), T), 2 * X(i))
        assert np.allclose(core.connection_term(T, X(i)), -2 * Y(i))
        assert np.allclose(core.connection_term(T, Y(i)), 2 * X(i))
    assert np.allclose(core.connection_term(T, T), 0)


@given(st.integers(1, 3), st.data())
def test_connection_is_metric(n, data):
    vec = st.lists(coord, min_size=2 * n + 1, max_size=2 * n + 1)
    z, v, w = (np.array(data.draw(vec)) for _ in range(3))
    # constant-coefficient fields: Z<V, W> = 0
    lhs = core.inner(core.connection_term(z, v), w) + core.inner(v, core.connection_term(z, w))
    assert lhs == pytest.approx(0.0, abs=1e-8)


def _euclidean_bracket(v, w, p, h=1e-6):
    """[V, W] for constant-coefficient frame fields via Euclidean Jacobians."""
    base = p.as_array()

    def jac(u):
        cols = []
        for k in range(base.size):
            e = np.zeros(base.size)
            e[k] = h
            fp = core.frame_to_euclidean(u, Point.from_array(base + e))
            fm = core.frame_to_euclidean(u, Point.from_array(base - e))
            cols.append((fp - fm) / (2 * h))
        return np.array(cols).T

    vv, ww = core.frame_to_euclidean(v, p), core.frame_to_euclidean(w, p)
    euc = jac(w) @ vv - jac(v) @ ww
    return np.linalg.solve(core.frame_matrix(p).T, euc)


@given(st.data())
def test_bracket_two_routes(data):
    n = data.draw(st.integers(1, 3))
    p = data.draw(points(n))
    vec = st.lists(st.floats(-2, 2), min_size=2 * n + 1, max_size=2 * n + 1)
    v, w = np.array(data.draw(vec)), np.array(data.draw(vec))
    zero = np.zeros_like(v)
    via_connection = core.lie_bracket(v, w, zero, zero)
    assert np.allclose(via_connection, _euclidean_bracket(v, w, p), atol=1e-6)
    # <[V, W], T> = 4 <J V^H, W^H> for horizontal V, W
    vh, wh = core.ambient(v[:-1]), core.ambient(w[:-1])
    br = core.lie_bracket(vh, wh, zero, zero)
    assert br[-1] == pytest.approx(4 * core.inner(core.j_apply(v[:-1]), w[:-1]), abs=1e-9)
    assert np.allclose(br[:-1], 0)


def test_frame_matrix_matches_frame_to_euclidean(rng):
    p = Point.from_array(rng.normal(size=5))
    m = core.frame_matrix(p)
    for k in range(5):
        assert np.allclose(m[k], core.frame_to_euclidean(np.eye(5)[k], p))


def test_position_jet_and_t_derivative(rng):
    p = Point.from_array(rng.normal(size=5))
    z = core.ambient(rng.normal(size=4))
    # along horizontal Z, the t-coordinate changes by the T-part of Z in Euclidean form
    assert core.t_derivative(p, z) == pytest.approx(core.frame_to_euclidean(z, p)[-1])
    jet = core.position_jet(p, z)
    nabla = core.covariant_derivative(jet, z)
    # nabla_Z xi^H = Z^H + 2<JZ, xi^H> T
    assert np.allclose(nabla[:-1], z[:-1])
    h = core.horizontal_position(p)
    assert nabla[-1] == pytest.approx(2 * core.inner(core.j_apply(z[:-1]), h))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        core.dim_of(np.zeros(4))
    with pytest.raises(DimensionError):
        core.connection_term(np.zeros(3), np.zeros(5))
    with pytest.raises(DimensionError):
        core.group_mul(Point.origin(1), Point.origin(2))
