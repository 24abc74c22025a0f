#!/usr/bin/env python3
"""Tests for Legendre and Lagrange bases and the Gauss rules."""
import numpy as np
import pytest

from errors import DomainError
from polyquad import (MAX_NODES, LegendreBasis, gauss_legendre_rule, gauss_lobatto_rule, integration_matrix,
                      lagrange_derivative_matrix, lagrange_eval, lagrange_matrix, legendre_eval)


def test_legendre_values():
    """Endpoint-normalized Legendre values on (0, 1)."""
    basis = LegendreBasis((0.0, 1.0), 4)
    assert legendre_eval(basis, 0, 0.37) == pytest.approx(1.0)
    assert legendre_eval(basis, 1, 0.0) == pytest.approx(-1.0)
    assert legendre_eval(basis, 2, 0.5) == pytest.approx(-0.5)
    for r in range(5):
        assert legendre_eval(basis, r, 1.0) == pytest.approx(1.0)
    print("✓ Legendre values match the closed forms")


def test_legendre_errors():
    basis = LegendreBasis((0.0, 1.0), 3)
    with pytest.raises(DomainError):
        legendre_eval(basis, 4, 0.5)
    with pytest.raises(DomainError):
        legendre_eval(basis, 1, 1.5)
    print("✓ Legendre domain errors raised")


def test_legendre_orthogonality():
    basis = LegendreBasis((2.0, 5.0), 6)
    rule = gauss_legendre_rule(8, (2.0, 5.0))
    table = basis.table(rule.nodes)
    gram = table.T @ (rule.weights[:, None] * table)
    expected = np.diag([basis.norm_squared(r) for r in range(7)])
    np.testing.assert_allclose(gram, expected, atol=1e-13)
    print("✓ Legendre basis is orthogonal with the stated norms")


def test_gauss_legendre_small_rules():
    rule = gauss_legendre_rule(1)
    np.testing.assert_allclose(rule.nodes, [0.5])
    np.testing.assert_allclose(rule.weights, [1.0])

    rule = gauss_legendre_rule(2)
    root = np.sqrt(3.0) / 6.0
    np.testing.assert_allclose(rule.nodes, [0.5 - root, 0.5 + root], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [0.5, 0.5], atol=1e-15)
    assert rule.integrate(lambda t: t ** 3) == pytest.approx(0.25, abs=1e-15)
    print("✓ Gauss-Legendre 1- and 2-point rules")


def test_gauss_lobatto_small_rules():
    rule = gauss_lobatto_rule(2)
    np.testing.assert_allclose(rule.nodes, [0.0, 1.0])
    np.testing.assert_allclose(rule.weights, [0.5, 0.5])

    rule = gauss_lobatto_rule(3)
    np.testing.assert_allclose(rule.nodes, [0.0, 0.5, 1.0], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)
    assert rule.integrate(lambda t: t ** 3) == pytest.approx(0.25, abs=1e-15)
    print("✓ Gauss-Lobatto 2- and 3-point rules")


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8, 12, MAX_NODES])
def test_gauss_legendre_exactness(m):
    rule = gauss_legendre_rule(m, (-1.0, 2.0))
    assert rule.exactness_degree == 2 * m - 1
    assert np.all(rule.weights > 0.0)
    for k in range(2 * m):
        exact = (2.0 ** (k + 1) - (-1.0) ** (k + 1)) / (k + 1)
        assert rule.integrate(lambda t: t ** k) == pytest.approx(exact, rel=1e-11)


@pytest.mark.parametrize("m", [2, 3, 4, 7, MAX_NODES])
def test_gauss_lobatto_exactness(m):
    rule = gauss_lobatto_rule(m)
    assert rule.nodes[0] == 0.0 and rule.nodes[-1] == 1.0
    assert rule.exactness_degree == 2 * m - 3
    for k in range(2 * m - 2):
        assert rule.integrate(lambda t: t ** k) == pytest.approx(1.0 / (k + 1), rel=1e-12)


def test_rule_errors():
    with pytest.raises(DomainError):
        gauss_legendre_rule(0)
    with pytest.raises(DomainError):
        gauss_lobatto_rule(1)
    with pytest.raises(DomainError):
        gauss_legendre_rule(MAX_NODES + 1)
    with pytest.raises(DomainError):
        gauss_legendre_rule(2, (1.0, 1.0))
    print("✓ Invalid node counts and intervals rejected")


def test_lagrange_values():
    assert lagrange_eval([0.0, 1.0], 0, 1.0) == pytest.approx(0.0)
    assert lagrange_eval([0.0, 1.0], 1, 0.25) == pytest.approx(0.25)
    assert lagrange_eval([0.0, 0.5, 1.0], 1, 0.25) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        lagrange_eval([0.0, 0.5, 0.5], 0, 0.1)
    print("✓ Lagrange cardinal values")


@pytest.mark.parametrize("count", [1, 2, 4, 7])
def test_lagrange_partition_of_unity(count):
    nodes = gauss_lobatto_rule(max(count, 2)).nodes[:count] if count > 1 else np.array([0.3])
    points = np.linspace(0.0, 1.0, 23)
    np.testing.assert_allclose(lagrange_matrix(nodes, points).sum(axis=1), 1.0, atol=1e-13)
    np.testing.assert_allclose(lagrange_derivative_matrix(nodes, points).sum(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(lagrange_matrix(nodes, nodes), np.eye(count), atol=1e-14)


def test_lagrange_derivative_reproduces_polynomials():
    nodes = gauss_legendre_rule(4).nodes
    points = np.linspace(0.0, 1.0, 9)
    values = nodes ** 3 - 2.0 * nodes
    np.testing.assert_allclose(lagrange_derivative_matrix(nodes, points) @ values, 3.0 * points ** 2 - 2.0,
                               atol=1e-12)
    print("✓ Lagrange derivative matrix differentiates cubics exactly")


def test_integration_matrix_collocation_tables():
    """Gauss nodes give the implicit midpoint tableau, Lobatto nodes the trapezoidal IIIA tableau."""
    gauss = gauss_legendre_rule(1).nodes
    np.testing.assert_allclose(integration_matrix(gauss, gauss), [[0.5]])
    lobatto = gauss_lobatto_rule(2).nodes
    np.testing.assert_allclose(integration_matrix(lobatto, lobatto), [[0.0, 0.0], [0.5, 0.5]], atol=1e-15)
    nodes = gauss_legendre_rule(3).nodes
    row_sums = integration_matrix(nodes, nodes).sum(axis=1)
    np.testing.assert_allclose(row_sums, nodes, atol=1e-14)
    print("✓ Integration matrices match the collocation tableaux")


if __name__ == "__main__":
    test_legendre_values()
    test_legendre_errors()
    test_legendre_orthogonality()
    test_gauss_legendre_small_rules()
    test_gauss_lobatto_small_rules()
    for m in [1, 2, 3, 5, 8, 12, MAX_NODES]:
        test_gauss_legendre_exactness(m)
    for m in [2, 3, 4, 7, MAX_NODES]:
        test_gauss_lobatto_exactness(m)
    print("✓ Quadrature exactness degrees")
    test_rule_errors()
    test_lagrange_values()
    for count in [1, 2, 4, 7]:
        test_lagrange_partition_of_unity(count)
    print("✓ Lagrange partition of unity")
    test_lagrange_derivative_reproduces_polynomials()
    test_integration_matrix_collocation_tables()
    print("\n✓ All polyquad tests passed!")
