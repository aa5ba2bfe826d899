import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mehdsg.quadrature import gauss_legendre_rule, gauss_lobatto_rule, lobatto_points_for_order, tensor_rule


def test_lobatto_two_points():
    r = gauss_lobatto_rule(2)
    np.testing.assert_array_equal(r.nodes, [0.0, 1.0])
    np.testing.assert_array_equal(r.weights, [0.5, 0.5])


def test_lobatto_three_points():
    r = gauss_lobatto_rule(3)
    np.testing.assert_allclose(r.nodes, [0.0, 0.5, 1.0], atol=1e-15)
    np.testing.assert_allclose(r.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)
    assert r.weights[0] == pytest.approx(1 / 6, abs=1e-15)


def test_lobatto_too_few_points():
    with pytest.raises(ValueError):
        gauss_lobatto_rule(1)


def test_legendre_small_rules():
    r = gauss_legendre_rule(1)
    np.testing.assert_allclose(r.nodes, [0.5])
    np.testing.assert_allclose(r.weights, [1.0])
    r = gauss_legendre_rule(2)
    np.testing.assert_allclose(r.nodes, [0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r.weights, [0.5, 0.5], atol=1e-15)
    assert r.mean(lambda x: x**2) == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)


@pytest.mark.parametrize("n", range(1, 16))
def test_legendre_exactness(n):
    r = gauss_legendre_rule(n)
    assert r.exactness_degree() == 2 * n - 1
    assert np.all(r.weights > 0) and r.weights.sum() == pytest.approx(1.0, abs=1e-14)
    for k in range(2 * n):
        assert r.weights @ r.nodes**k == pytest.approx(1 / (k + 1), abs=1e-13)


@pytest.mark.parametrize("n", range(2, 16))
def test_lobatto_exactness(n):
    r = gauss_lobatto_rule(n)
    assert r.nodes[0] == 0.0 and r.nodes[-1] == 1.0
    assert np.all(r.weights > 0) and r.weights.sum() == pytest.approx(1.0, abs=1e-14)
    for k in range(2 * n - 2):
        assert r.weights @ r.nodes**k == pytest.approx(1 / (k + 1), abs=1e-13)
    # degree 2n-2 is not integrated exactly: the shifted Legendre P_{2n-2} has mean 0
    c = np.zeros(2 * n - 1)
    c[-1] = 1.0
    assert abs(r.weights @ np.polynomial.legendre.legval(2 * r.nodes - 1, c)) > 1e-3


@given(st.integers(2, 12), st.lists(st.floats(-1, 1), min_size=1, max_size=23), st.floats(-3, 3), st.floats(0.1, 4))
def test_random_polynomials_exact(n, coeffs, lo, width):
    hi = lo + width
    c = np.array(coeffs)
    p = np.polynomial.Polynomial(c)
    exact = (p.integ()(hi) - p.integ()(lo)) / (hi - lo)
    for rule, deg in ((gauss_legendre_rule(n), 2 * n - 1), (gauss_lobatto_rule(n), 2 * n - 3)):
        q = np.polynomial.Polynomial(c[:deg + 1])
        ex = (q.integ()(hi) - q.integ()(lo)) / (hi - lo)
        m = rule.mapped(lo, hi)
        assert m.mean(q) == pytest.approx(ex, abs=1e-12 * max(1.0, abs(ex)) + 1e-12 * max(1.0, abs(lo) + width) ** deg)
    assert np.isfinite(exact)


def test_mapped_lobatto_keeps_endpoints():
    m = gauss_lobatto_rule(5).mapped(-2.0, 3.0)
    assert m.nodes[0] == -2.0 and m.nodes[-1] == 3.0


def test_lobatto_count_for_order():
    assert [lobatto_points_for_order(k) for k in range(6)] == [2, 2, 3, 3, 4, 4]


def test_tensor_rule():
    a, b = gauss_legendre_rule(2), gauss_lobatto_rule(3)
    pts, w = tensor_rule([a, b])
    assert pts.shape == (6, 2)
    assert w.sum() == pytest.approx(1.0)
    # last rule fastest
    np.testing.assert_allclose(pts[:3, 1], b.nodes)
    assert w @ (pts[:, 0] ** 3 * pts[:, 1] ** 2) == pytest.approx(0.25 / 3, abs=1e-15)
