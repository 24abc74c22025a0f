#!/usr/bin/env python3
"""Tests for temporal projections, initial-data projections and velocity reconstruction."""
import numpy as np
import pytest

from mesh_spaces import SpaceTimeSolution, assemble_spatial, build_spatial_mesh, build_temporal_mesh
from polyquad import gauss_legendre_rule
from projection import (DgCoefficients, differentiate, interpolate_gl, postprocess_displacement, project_dg,
                        project_initial_displacement, project_initial_velocity, reconstruct_velocity)


def _random_solution(rng, N_t=3, p_t=2, n=4, T=1.5):
    mesh = build_temporal_mesh(T, N_t, p_t)
    return SpaceTimeSolution(rng.normal(size=(n, mesh.dimension)), mesh)


def test_project_dg_examples():
    mesh = build_temporal_mesh(1.0, 4, 1)
    np.testing.assert_allclose(project_dg(lambda t: 1.0, mesh).coefficients, 1.0, atol=1e-14)

    single = build_temporal_mesh(1.0, 1, 1)
    assert project_dg(lambda t: t, single).coefficients[0, 0, 0] == pytest.approx(0.5)

    # t^2 projected to linears: t - 1/6 = 1/3 L_0 + 1/2 L_1
    quadratic = build_temporal_mesh(1.0, 1, 2)
    np.testing.assert_allclose(project_dg(lambda t: t * t, quadratic).coefficients[0, 0], [1 / 3, 1 / 2],
                               atol=1e-14)
    print("✓ L2 projection examples")


def test_projection_orthogonality():
    """u - Pi u is orthogonal to every polynomial of degree p_t - 1 on each slab."""
    mesh = build_temporal_mesh(2.0, 3, 3)
    u = lambda t: np.array([np.sin(3.0 * t), np.exp(-t)])
    projected = project_dg(u, mesh)
    rule = gauss_legendre_rule(12)
    tau = rule.nodes
    for i in range(mesh.num_slabs):
        a, b = mesh.slab(i)
        residual = np.column_stack([u(a + (b - a) * s) for s in tau]) - projected.evaluate_slab(i, tau)
        for k in range(mesh.p_t):
            moment = (residual * tau ** k) @ rule.weights
            np.testing.assert_allclose(moment, 0.0, atol=1e-10)
    print("✓ Projection residual is orthogonal to the test space")


def test_interpolate_gl_examples():
    single = build_temporal_mesh(1.0, 1, 1)
    assert interpolate_gl(lambda t: t * t, single).coefficients[0, 0, 0] == pytest.approx(0.25)
    assert project_dg(lambda t: t * t, single).coefficients[0, 0, 0] == pytest.approx(1 / 3)

    mesh = build_temporal_mesh(1.0, 2, 3)
    quadratic = lambda t: 1.0 - 2.0 * t + 0.5 * t * t
    np.testing.assert_allclose(interpolate_gl(quadratic, mesh).coefficients,
                               project_dg(quadratic, mesh).coefficients, atol=1e-13)
    print("✓ Gauss-Legendre interpolation examples")


@pytest.mark.parametrize("p_t", [1, 2, 3, 5])
def test_gauss_node_identity(p_t):
    """For degree-p_t functions, the L2 projection equals the Gauss-node interpolant."""
    rng = np.random.default_rng(p_t)
    solution = _random_solution(rng, p_t=p_t)
    np.testing.assert_allclose(project_dg(solution, solution.temporal_mesh).coefficients,
                               interpolate_gl(solution, solution.temporal_mesh).coefficients, atol=1e-11)


def test_initial_displacement_projection():
    assert not project_initial_displacement(assemble_spatial(build_spatial_mesh(0.0, 1.0, 4, 1)), None).any()

    ops = assemble_spatial(build_spatial_mesh(0.0, 1.0, 8, 1))
    u = project_initial_displacement(ops, lambda x: np.sin(np.pi * x), lambda x: np.pi * np.cos(np.pi * x))
    np.testing.assert_allclose(u, ops.interpolate(lambda x: np.sin(np.pi * x)), atol=1e-10)

    ops = assemble_spatial(build_spatial_mesh(0.0, 1.0, 5, 2), lambda x: 1.0 + x)
    discrete = lambda x: x * (1.0 - x)
    np.testing.assert_allclose(project_initial_displacement(ops, discrete), ops.interpolate(discrete), atol=1e-12)
    print("✓ Elliptic projection examples")


def test_initial_velocity_projection():
    ops = assemble_spatial(build_spatial_mesh(0.0, 1.0, 2, 1))
    np.testing.assert_allclose(project_initial_velocity(ops, lambda x: x * (1.0 - x)), [5.0 / 16.0], atol=1e-14)
    assert not project_initial_velocity(ops, None).any()

    ops = assemble_spatial(build_spatial_mesh(-1.0, 1.0, 6, 3))
    cubic = lambda x: (1.0 - x * x) * (0.5 + x)
    np.testing.assert_allclose(project_initial_velocity(ops, cubic), ops.interpolate(cubic), atol=1e-12)
    print("✓ L2 projection of the initial velocity")


def test_reconstruction_examples():
    single = build_temporal_mesh(1.0, 1, 1)
    v0 = np.array([2.0, -1.0])
    zero = DgCoefficients(single, np.zeros((1, 2, 1)))
    reconstructed = reconstruct_velocity(zero, v0)
    np.testing.assert_allclose(reconstructed.evaluate(0.25), v0 * 0.5, atol=1e-14)
    np.testing.assert_allclose(reconstructed.nodal_values(), [v0, -v0], atol=1e-14)

    mesh = build_temporal_mesh(1.0, 3, 2)
    constant = DgCoefficients(mesh, np.zeros((3, 2, 2)))
    constant.coefficients[:, :, 0] = v0
    np.testing.assert_allclose(reconstruct_velocity(constant, v0).coefficients, v0[:, None], atol=1e-13)
    print("✓ Velocity reconstruction examples")


@pytest.mark.parametrize("p_t", [1, 2, 4])
def test_reconstruction_properties(p_t):
    """Pi of the reconstruction is dtU, it starts at V0h and depends linearly on both."""
    rng = np.random.default_rng(10 + p_t)
    mesh = build_temporal_mesh(1.0, 4, p_t)
    dtU = DgCoefficients(mesh, rng.normal(size=(4, 3, p_t)))
    v0 = rng.normal(size=3)
    reconstructed = reconstruct_velocity(dtU, v0)
    np.testing.assert_allclose(project_dg(reconstructed, mesh).coefficients, dtU.coefficients, atol=1e-12)
    np.testing.assert_allclose(reconstructed.nodal_values()[0], v0)

    other = DgCoefficients(mesh, rng.normal(size=(4, 3, p_t)))
    w0 = rng.normal(size=3)
    combined = reconstruct_velocity(DgCoefficients(mesh, 2.0 * dtU.coefficients - other.coefficients),
                                    2.0 * v0 - w0)
    np.testing.assert_allclose(combined.coefficients,
                               2.0 * reconstructed.coefficients - reconstruct_velocity(other, w0).coefficients,
                               atol=1e-12)


def test_differentiate_exact():
    """d/dt of a t^2 on quadratic slabs is 2 a t, with matching one-sided limits."""
    mesh = build_temporal_mesh(1.5, 3, 2)
    times = np.linspace(0.0, 1.5, mesh.dimension)
    a = np.array([1.0, -3.0])
    derivative = differentiate(SpaceTimeSolution(np.outer(a, times ** 2), mesh))
    assert derivative.order == 2
    np.testing.assert_allclose(derivative.evaluate_slab(1, [0.5])[:, 0], 2.0 * a * 0.75, atol=1e-12)
    np.testing.assert_allclose(derivative.left_limit(2), 2.0 * a * 1.0, atol=1e-12)
    np.testing.assert_allclose(derivative.right_limit(1), 2.0 * a * 0.5, atol=1e-12)


def test_postprocess_examples():
    single = build_temporal_mesh(1.0, 1, 1)
    ramp = SpaceTimeSolution(np.array([[0.0, 2.0]]), single)
    squared = postprocess_displacement(ramp, np.zeros(1))
    assert squared.degree == 2
    np.testing.assert_allclose(squared.coefficients[0], [0.0, 0.25, 1.0], atol=1e-14)

    mesh = build_temporal_mesh(2.0, 4, 2)
    ones = SpaceTimeSolution(np.ones((3, mesh.dimension)), mesh)
    shifted = postprocess_displacement(ones, np.zeros(3))
    np.testing.assert_allclose(shifted.evaluate(1.3), 1.3, atol=1e-13)

    u0 = np.array([1.0, -2.0])
    still = postprocess_displacement(SpaceTimeSolution(np.zeros((2, mesh.dimension)), mesh), u0)
    np.testing.assert_allclose(still.evaluate(0.7), u0)
    print("✓ Postprocessed displacement examples")


if __name__ == "__main__":
    test_project_dg_examples()
    test_projection_orthogonality()
    test_interpolate_gl_examples()
    for p_t in [1, 2, 3, 5]:
        test_gauss_node_identity(p_t)
    print("✓ Gauss-node identity")
    test_initial_displacement_projection()
    test_initial_velocity_projection()
    test_reconstruction_examples()
    for p_t in [1, 2, 4]:
        test_reconstruction_properties(p_t)
    print("✓ Reconstruction is unique and linear")
    test_differentiate_exact()
    test_postprocess_examples()
    print("\n✓ All projection tests passed!")
