import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swimrom.kernels import stokeslet, stokeslet_batch, stresslet, stresslet_batch

coord = st.floats(-5.0, 5.0, allow_nan=False, width=64)
point = st.tuples(coord, coord, coord).map(np.array)


def test_stokeslet_unit_separation():
    # r = e_x, |r| = 1: G = (I + rr^T) / (8 pi)
    G = stokeslet(np.array([1.0, 0.0, 0.0]), np.zeros(3))
    expected = (np.eye(3) + np.outer([1, 0, 0], [1, 0, 0])) / (8 * np.pi)
    np.testing.assert_allclose(G, expected, rtol=1e-14)


def test_stokeslet_decay():
    x = np.array([2.0, -1.0, 0.5])
    G1 = stokeslet(x, np.zeros(3))
    G2 = stokeslet(10 * x, np.zeros(3))
    np.testing.assert_allclose(G2, G1 / 10, rtol=1e-13)


def test_stresslet_decay():
    x = np.array([1.5, 0.3, -0.7])
    n = np.array([0.0, 0.0, 1.0])
    T1 = stresslet(x, np.zeros(3), n)
    T2 = stresslet(5 * x, np.zeros(3), n)
    np.testing.assert_allclose(T2, T1 / 25, rtol=1e-13)


def test_coincident_points_rejected():
    x = np.array([0.3, 0.1, -0.2])
    with pytest.raises(ValueError):
        stokeslet(x, x)
    with pytest.raises(ValueError):
        stresslet(x, x, np.array([0.0, 0.0, 1.0]))


@settings(max_examples=50, deadline=None)
@given(point, point)
def test_stokeslet_symmetry(x, y):
    # G is symmetric in its tensor indices and in exchanging x and y
    if np.linalg.norm(x - y) < 1e-6:
        return
    G = stokeslet(x, y)
    np.testing.assert_allclose(G, G.T, atol=1e-12)
    np.testing.assert_allclose(G, stokeslet(y, x), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(point, point)
def test_batch_matches_pointwise(x, y):
    if np.linalg.norm(x - y) < 1e-6:
        return
    n = np.array([0.0, 1.0, 0.0])
    r = (x - y)[None, :]
    np.testing.assert_allclose(stokeslet_batch(r)[0], stokeslet(x, y),
                               rtol=1e-13)
    np.testing.assert_allclose(stresslet_batch(r, n[None, :])[0],
                               stresslet(x, y, n), rtol=1e-13, atol=1e-15)


def test_stresslet_normal_contraction():
    # contracted form: T n = -(3/4pi) r (r.n) (r r^T) / |r|^5 acting on b
    x = np.array([1.0, 1.0, 0.0])
    y = np.zeros(3)
    n = np.array([0.0, 0.0, 1.0])
    # r.n = 0 here, so the whole kernel vanishes
    np.testing.assert_allclose(stresslet(x, y, n), np.zeros((3, 3)),
                               atol=1e-15)
