import math

import numpy as np
import pytest

from klfield import Domain, Grid, gauss_legendre, inner_product, integrate, make_grid

UNIT = Domain(0.0, 1.0)


def test_trapezoid_two_nodes():
    g = make_grid(UNIT, 2, "trapezoid")
    np.testing.assert_array_equal(g.nodes, [0.0, 1.0])
    np.testing.assert_array_equal(g.weights, [0.5, 0.5])


def test_trapezoid_three_nodes():
    g = make_grid(UNIT, 3, "trapezoid")
    np.testing.assert_array_equal(g.nodes, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(g.weights, [0.25, 0.5, 0.25])


def test_gauss_legendre_two_nodes():
    g = make_grid(Domain(-1.0, 1.0), 2, "gauss_legendre")
    r = 1.0 / math.sqrt(3.0)
    np.testing.assert_allclose(g.nodes, [-r, r], atol=1e-15)
    np.testing.assert_allclose(g.weights, [1.0, 1.0], atol=1e-15)
    # exact through degree 3
    for p, exact in [(0, 2.0), (1, 0.0), (2, 2.0 / 3.0), (3, 0.0)]:
        assert integrate(g, g.nodes**p) == pytest.approx(exact, abs=1e-15)


@pytest.mark.parametrize("n", [3, 5, 10, 37, 100, 257])
def test_gauss_legendre_matches_numpy(n):
    x, w = gauss_legendre(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(x, xr, atol=1e-14)
    np.testing.assert_allclose(w, wr, atol=1e-14)


@pytest.mark.parametrize("n", [5, 12, 40])
def test_gauss_legendre_polynomial_exactness(n):
    g = make_grid(Domain(-0.5, 2.0), n, "gauss_legendre")
    a, b = -0.5, 2.0
    for p in range(2 * n):
        exact = (b ** (p + 1) - a ** (p + 1)) / (p + 1)
        assert integrate(g, g.nodes**p) == pytest.approx(exact, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("rule", ["trapezoid", "gauss_legendre"])
@pytest.mark.parametrize("n", [2, 3, 10, 101, 1000, 10_000])
def test_grid_invariants(rule, n):
    d = Domain(-2.0, 3.5)
    g = make_grid(d, n, rule)
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[0] >= d.a and g.nodes[-1] <= d.b
    assert np.all(g.weights > 0)
    assert abs(g.weights.sum() - d.length) <= 1e-12 * d.length


def test_n_below_two_rejected():
    with pytest.raises(ValueError):
        make_grid(UNIT, 1)


def test_integrate_constant_and_linear():
    for rule in ("trapezoid", "gauss_legendre"):
        g = make_grid(UNIT, 17, rule)
        assert integrate(g, np.ones(g.n)) == pytest.approx(1.0, abs=1e-12)
    g = make_grid(UNIT, 101)
    assert integrate(g, g.nodes) == pytest.approx(0.5, abs=1e-12)


def test_integrate_square_with_two_point_gauss():
    g = make_grid(UNIT, 2, "gauss_legendre")
    assert integrate(g, g.nodes**2) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_length_mismatch_rejected():
    g = make_grid(UNIT, 5)
    with pytest.raises(ValueError):
        integrate(g, np.ones(4))
    with pytest.raises(ValueError):
        inner_product(g, np.ones(5), np.ones(6))


def test_inner_products():
    g = make_grid(UNIT, 101)
    one = np.ones(g.n)
    assert inner_product(g, one, one) == pytest.approx(1.0, abs=1e-12)
    assert inner_product(g, one, g.nodes) == pytest.approx(0.5, abs=1e-12)
    g = make_grid(UNIT, 201)
    s = np.sin(2 * np.pi * g.nodes)
    c = np.cos(2 * np.pi * g.nodes)
    assert abs(inner_product(g, s, c)) <= 1e-10


def test_trapezoid_second_order():
    errors = []
    for n in (11, 21, 41, 81):
        g = make_grid(UNIT, n)
        errors.append(abs(integrate(g, np.exp(g.nodes)) - (math.e - 1.0)))
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert all(1.9 <= p <= 2.1 for p in orders), orders


def test_grid_json_round_trip():
    g = make_grid(Domain(0.0, 2.0), 33, "gauss_legendre")
    assert g.to_dict() == {"rule": "gauss_legendre", "n": 33, "domain": [0.0, 2.0]}
    h = Grid.from_dict(g.to_dict())
    assert np.array_equal(h.nodes, g.nodes) and np.array_equal(h.weights, g.weights)


def test_grid_json_unknown_key_rejected():
    with pytest.raises(ValueError):
        Grid.from_dict({"rule": "trapezoid", "n": 5, "nodes": [0, 1]})


def test_grid_arrays_read_only():
    g = make_grid(UNIT, 5)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0
