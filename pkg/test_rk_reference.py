#!/usr/bin/env python3
"""Tests for the Gauss and Lobatto IIIA/IIIB reference integrators and the symplecticity checks."""
import numpy as np
import pytest

from errors import ConvergenceError, DomainError
from presets import build_problem
from rk_reference import (SemiDiscreteSystem, canonical_map, explicit_euler_step, gauss_collocation_step,
                          gauss_rk_step, hamiltonian, integrate_reference, lobatto_3ab_step, reference_step_map,
                          stormer_verlet_step, symplectic_residual)
from solver_linear import MethodId
from solver_semilinear import FixedPointConfig, solve_semilinear

TIGHT = FixedPointConfig(tolerance=1e-14)


def _oscillator_error(stages, steps, T=1.0):
    system = SemiDiscreteSystem.oscillator()
    u, v = np.array([1.0]), np.array([0.0])
    h = T / steps
    for k in range(steps):
        u, v = gauss_rk_step(system, u, v, k * h, h, stages)
    return abs(u[0] - np.cos(T)) + abs(v[0] + np.sin(T))


def test_one_stage_gauss_is_midpoint():
    lam, h = -1.0, 0.1
    midpoint = (1.0 + 0.5 * h * lam) / (1.0 - 0.5 * h * lam)
    rhs = lambda t, y: lam * y
    picard = gauss_collocation_step(rhs, 1.0, 0.0, h, 1)
    newton = gauss_collocation_step(rhs, 1.0, 0.0, h, 1, jacobian=lambda t, y: np.array([[lam]]))
    assert picard[0] == pytest.approx(midpoint, abs=1e-13)
    assert newton[0] == pytest.approx(midpoint, abs=1e-14)
    print("✓ One-stage Gauss collocation is the implicit midpoint rule")


def test_two_stage_lobatto_is_stormer_verlet():
    system = SemiDiscreteSystem.oscillator(mass=2.0, stiffness=3.0)
    state = (np.array([0.7]), np.array([-0.4]))
    verlet = state
    h = 0.2
    for k in range(10):
        state = lobatto_3ab_step(system, *state, k * h, h, 2)
        verlet = stormer_verlet_step(system, *verlet, k * h, h)
    np.testing.assert_allclose(state[0], verlet[0], atol=1e-12)
    np.testing.assert_allclose(state[1], verlet[1], atol=1e-12)
    print("✓ Two-stage Lobatto IIIA/IIIB matches Stormer-Verlet")


@pytest.mark.parametrize("stages", [1, 2])
def test_gauss_order(stages):
    rate = np.log2(_oscillator_error(stages, 16) / _oscillator_error(stages, 32))
    assert rate == pytest.approx(2 * stages, abs=0.1)


def test_step_errors():
    system = SemiDiscreteSystem.oscillator()
    u, v = np.array([1.0]), np.array([0.0])
    with pytest.raises(DomainError):
        gauss_rk_step(system, u, v, 0.0, 0.1, 0)
    with pytest.raises(DomainError):
        lobatto_3ab_step(system, u, v, 0.0, 0.1, 1)
    with pytest.raises(DomainError):
        gauss_rk_step(system, u, v, 0.0, 0.0, 1)
    with pytest.raises(DomainError):
        integrate_reference(build_problem("manufactured", 2, 4, 1, 1), MethodId.STABILIZED)
    print("✓ Invalid stage counts and methods rejected")


def test_picard_failure_raises():
    with pytest.raises(ConvergenceError):
        gauss_collocation_step(lambda t, y: -50.0 * y, 1.0, 0.0, 1.0, 1, fp=FixedPointConfig(max_iterations=3))


def test_exact_rotation_is_symplectic():
    h = 0.4

    def rotation(q, p):
        return q * np.cos(h) + p * np.sin(h), -q * np.sin(h) + p * np.cos(h)

    assert symplectic_residual(rotation, 1) <= 1e-14
    assert symplectic_residual(rotation, 1, state=(np.array([0.3]), np.array([1.2]))) <= 1e-9


def test_gauss_symplectic_on_fe_system():
    problem = build_problem("manufactured", 2, 4, 1, 1)
    system = SemiDiscreteSystem.from_problem(problem).homogeneous()
    step = reference_step_map(system, MethodId.GAUSS_RK, 0.0, 0.3, 1)
    assert symplectic_residual(step, problem.num_dofs) <= 1e-11
    print("✓ Gauss map preserves the canonical form on the FE system")


def test_nonlinear_reference_maps_symplectic():
    """Sine-Gordon oscillator, Jacobian by central differences."""
    system = SemiDiscreteSystem.oscillator(nonlinear=np.sin, potential=lambda u: float(np.sum(1.0 - np.cos(u))))
    state = (np.array([0.8]), np.array([0.3]))
    for method, stages in ((MethodId.GAUSS_RK, 2), (MethodId.LOBATTO_IIIAB, 3)):
        step = reference_step_map(system, method, 0.0, 0.25, stages, TIGHT)
        assert symplectic_residual(step, 1, state=state) <= 1e-6


def test_explicit_euler_is_not_symplectic():
    h = 0.3
    system = SemiDiscreteSystem.oscillator()
    residual = symplectic_residual(canonical_map(system, explicit_euler_step, 0.0, h), 1)
    assert residual == pytest.approx(h * h, rel=1e-10)
    assert residual >= 0.05
    print("✓ Explicit Euler violates the canonical form by h^2")


def test_hamiltonian_values():
    system = SemiDiscreteSystem.oscillator(stiffness=3.0, nonlinear=np.sin,
                                           potential=lambda u: float(np.sum(1.0 - np.cos(u))))
    assert hamiltonian(system, np.zeros(1), np.zeros(1)) == 0.0
    expected = 0.5 * (4.0 + 3.0) + (1.0 - np.cos(1.0))
    assert hamiltonian(system, np.array([1.0]), np.array([2.0])) == pytest.approx(expected)


def test_gauss_conserves_quadratic_energy():
    problem = build_problem("manufactured", 2, 6, 1, 2)
    system = SemiDiscreteSystem.from_problem(problem).homogeneous()
    u, v = problem.initial_data()
    initial = hamiltonian(system, u, v)
    for k in range(20):
        u, v = gauss_rk_step(system, u, v, 0.05 * k, 0.05, 2)
    assert hamiltonian(system, u, v) == pytest.approx(initial, rel=1e-12)
    print("✓ Gauss steps conserve the quadratic energy")


def test_integrate_reference_shapes():
    problem = build_problem("manufactured", 5, 6, 2, 1)
    bundle = integrate_reference(problem, MethodId.GAUSS_RK)
    assert bundle.U.nodal_values().shape == (6, problem.num_dofs)
    assert bundle.momentum.shape == (6, problem.num_dofs)
    assert bundle.V is None
    assert bundle.iterations == [1] * 5
    assert bundle.blowup_slab is None


@pytest.mark.parametrize("scheme,reference", [(MethodId.GAUSS_LEGENDRE, MethodId.GAUSS_RK),
                                              (MethodId.GAUSS_LOBATTO, MethodId.LOBATTO_IIIAB)])
def test_space_time_schemes_match_references(scheme, reference):
    """GL and Lobatto space-time schemes agree with their collocation counterparts at the nodes."""
    fp = FixedPointConfig(tolerance=1e-13)
    problem = build_problem("fig2", 4, 10, 2, 1)
    space_time = solve_semilinear(problem, method=scheme, fp=fp).U.nodal_values()
    nodal = integrate_reference(problem, reference, fp=fp).U.nodal_values()
    scale = max(1.0, float(np.max(np.abs(nodal))))
    assert np.max(np.abs(space_time - nodal)) <= 1e-9 * scale


if __name__ == "__main__":
    test_one_stage_gauss_is_midpoint()
    test_two_stage_lobatto_is_stormer_verlet()
    for stages in [1, 2]:
        test_gauss_order(stages)
    print("✓ Gauss s-stage order 2s")
    test_step_errors()
    test_picard_failure_raises()
    test_exact_rotation_is_symplectic()
    print("✓ Exact rotation has zero symplectic residual")
    test_gauss_symplectic_on_fe_system()
    test_nonlinear_reference_maps_symplectic()
    print("✓ Nonlinear reference maps are symplectic")
    test_explicit_euler_is_not_symplectic()
    test_hamiltonian_values()
    test_gauss_conserves_quadratic_energy()
    test_integrate_reference_shapes()
    for scheme, reference in [(MethodId.GAUSS_LEGENDRE, MethodId.GAUSS_RK),
                              (MethodId.GAUSS_LOBATTO, MethodId.LOBATTO_IIIAB)]:
        test_space_time_schemes_match_references(scheme, reference)
    print("✓ Space-time schemes match their collocation references")
    print("\n✓ All rk_reference tests passed!")
