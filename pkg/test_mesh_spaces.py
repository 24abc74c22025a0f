#!/usr/bin/env python3
"""Tests for meshes, spatial assembly and space-time solutions."""
import numpy as np
import pytest

from errors import DataError, DomainError
from mesh_spaces import (SpaceTimeSolution, assemble_spatial, build_spatial_mesh, build_temporal_mesh,
                         reference_nodes)
from polyquad import gauss_legendre_rule
from projection import project_initial_displacement


def test_temporal_mesh():
    mesh = build_temporal_mesh(10.0, 128, 1)
    assert mesh.h == pytest.approx(0.078125)
    assert mesh.num_slabs == 128
    assert mesh.dimension == 129

    single = build_temporal_mesh(1.0, 1, 2)
    assert single.slab(0) == (0.0, 1.0)
    assert single.dimension == 3

    explicit = build_temporal_mesh(1.0, 0, 1, nodes=[0.0, 0.3, 1.0])
    np.testing.assert_allclose(explicit.widths, [0.3, 0.7])
    assert explicit.locate(0.3) == 0
    assert explicit.locate(0.31) == 1
    print("✓ Temporal meshes: uniform, single slab, explicit nodes")


def test_mesh_errors():
    with pytest.raises(DomainError):
        build_temporal_mesh(1.0, 0, 1)
    with pytest.raises(DomainError):
        build_temporal_mesh(-1.0, 4, 1)
    with pytest.raises(DomainError):
        build_temporal_mesh(1.0, 4, 0)
    with pytest.raises(DomainError):
        build_temporal_mesh(1.0, 0, 1, nodes=[0.0, 0.5, 0.5, 1.0])
    with pytest.raises(DomainError):
        build_temporal_mesh(2.0, 0, 1, nodes=[0.0, 0.5, 1.0])
    with pytest.raises(DomainError):
        build_temporal_mesh(1.0, 4, 1).locate(1.5)
    with pytest.raises(DomainError):
        build_spatial_mesh(0.0, 1.0, 1, 1)
    with pytest.raises(DomainError):
        build_spatial_mesh(0.0, 1.0, 4, 9)
    print("✓ Invalid meshes rejected")


def test_spatial_dofs():
    mesh = build_spatial_mesh(0.0, 1.0, 4, 2)
    assert mesh.num_dofs == 7
    np.testing.assert_allclose(mesh.dof_coordinates(), np.linspace(0.0, 1.0, 9)[1:-1])
    assert list(mesh.element_dofs(0)) == [-1, 0, 1]
    assert list(mesh.element_dofs(3)) == [5, 6, -1]


def test_p1_matrices():
    """Uniform P1 with c = 1: K = tridiag(-1, 2, -1) / h, M = h tridiag(1, 4, 1) / 6."""
    N_x = 6
    h = 1.0 / N_x
    ops = assemble_spatial(build_spatial_mesh(0.0, 1.0, N_x, 1), 1.0)
    n = N_x - 1
    tri = np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    np.testing.assert_allclose(ops.stiffness.toarray(), tri / h, atol=1e-12)
    mass = np.diag(np.full(n, 4.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    np.testing.assert_allclose(ops.mass.toarray(), h * mass / 6.0, atol=1e-14)
    print("✓ P1 mass and stiffness match the hand-computed matrices")


def test_variable_wave_speed_entry():
    """Two elements on (0, 1), c = 1 + x: K[0, 0] = integral of (1 + x)^2 |phi'|^2."""
    ops = assemble_spatial(build_spatial_mesh(0.0, 1.0, 2, 1), lambda x: 1.0 + x)
    rule = gauss_legendre_rule(10, (0.0, 1.0))
    expected = rule.mapped(0.0, 0.5).integrate(lambda x: (1.0 + x) ** 2 * 4.0) \
        + rule.mapped(0.5, 1.0).integrate(lambda x: (1.0 + x) ** 2 * 4.0)
    assert ops.stiffness[0, 0] == pytest.approx(expected, rel=1e-13)
    print("✓ Variable wave speed stiffness entry")


def test_nonpositive_wave_speed():
    mesh = build_spatial_mesh(-1.0, 1.0, 4, 1)
    with pytest.raises(DataError):
        assemble_spatial(mesh, lambda x: x)
    with pytest.raises(DataError):
        assemble_spatial(mesh, 0.0)


@pytest.mark.parametrize("p_x", [1, 2, 3])
def test_matrices_symmetric_positive_definite(p_x):
    ops = assemble_spatial(build_spatial_mesh(0.0, 2.0, 5, p_x), lambda x: 1.0 + 0.5 * np.sin(x))
    for matrix in (ops.mass, ops.stiffness):
        dense = matrix.toarray()
        np.testing.assert_allclose(dense, dense.T, atol=1e-13)
        assert np.min(np.linalg.eigvalsh(dense)) > 0.0
    rhs = np.arange(ops.num_dofs, dtype=float)
    np.testing.assert_allclose(ops.mass @ ops.solve_mass(rhs), rhs, atol=1e-10)
    np.testing.assert_allclose(ops.stiffness @ ops.solve_stiffness(rhs), rhs, atol=1e-10)


@pytest.mark.parametrize("p_x", [1, 2])
def test_stiffness_energy_converges(p_x):
    """u_h^T K u_h for the elliptic projection of sin(pi x) approaches the exact energy at rate 2 p_x."""
    exact = np.pi ** 2 / 2.0
    errors = []
    for N_x in (8, 16):
        ops = assemble_spatial(build_spatial_mesh(0.0, 1.0, N_x, p_x), 1.0)
        u = project_initial_displacement(ops, lambda x: np.sin(np.pi * x), lambda x: np.pi * np.cos(np.pi * x))
        errors.append(abs(u @ (ops.stiffness @ u) - exact))
    rate = np.log2(errors[0] / errors[1])
    assert rate == pytest.approx(2 * p_x, abs=0.2)


def test_space_time_solution_evaluation():
    mesh = build_temporal_mesh(2.0, 4, 2)
    times = np.concatenate([[0.0]] + [mesh.nodes[i] + (mesh.nodes[i + 1] - mesh.nodes[i]) * reference_nodes(2)[1:]
                                      for i in range(4)])
    coefficients = np.vstack([times ** 2, 3.0 - times])
    solution = SpaceTimeSolution(coefficients, mesh)
    np.testing.assert_allclose(solution.evaluate(1.3), [1.69, 1.7], atol=1e-13)
    np.testing.assert_allclose(solution.nodal_values()[:, 0], mesh.nodes ** 2, atol=1e-13)
    np.testing.assert_allclose(solution.derivative_slab(2, [0.5])[:, 0], [2.0 * 1.25, -1.0], atol=1e-12)
    with pytest.raises(DomainError):
        SpaceTimeSolution(coefficients[:, :-1], mesh)
    print("✓ Space-time solutions evaluate and differentiate exactly")


if __name__ == "__main__":
    test_temporal_mesh()
    test_mesh_errors()
    test_spatial_dofs()
    print("✓ Spatial DOF numbering")
    test_p1_matrices()
    test_variable_wave_speed_entry()
    test_nonpositive_wave_speed()
    print("✓ Nonpositive wave speed raises DataError")
    for p_x in [1, 2, 3]:
        test_matrices_symmetric_positive_definite(p_x)
    print("✓ Mass and stiffness are SPD with working solves")
    for p_x in [1, 2]:
        test_stiffness_energy_converges(p_x)
    print("✓ Stiffness energy converges at rate 2 p_x")
    test_space_time_solution_evaluation()
    print("\n✓ All mesh_spaces tests passed!")
