#!/usr/bin/env python3
"""Tests for the Picard slab iteration, the nonlinearities and the semilinear schemes."""
import numpy as np
import pytest

from diagnostics import EnergyVariant, energy_trace
from errors import ConvergenceError, DataError, DomainError
from presets import build_problem
from solver_linear import MethodId, solve_linear
from solver_semilinear import (FixedPointConfig, Nonlinearity, SEMILINEAR_METHODS, klein_gordon_defocusing,
                               klein_gordon_linear, semilinear_equivalence_check, sine_gordon, slab_fixed_point,
                               solve_semilinear, zero_nonlinearity)


def test_fixed_point_defaults():
    fp = FixedPointConfig()
    assert (fp.tolerance, fp.max_iterations, fp.damping) == (1e-12, 100, 1.0)
    assert FixedPointConfig.from_dict({"damping": 0.5}).to_dict() == {"tolerance": 1e-12, "max_iterations": 100,
                                                                      "damping": 0.5}
    for bad in ({"tolerance": 0.0}, {"max_iterations": 0}, {"damping": 0.0}, {"damping": 1.5}):
        with pytest.raises(DomainError):
            FixedPointConfig(**bad)
    print("✓ Fixed-point settings validated")


def test_scalar_fixed_point():
    solve = lambda x: 0.1 * np.sin(x) + 1.0
    x, iterations = slab_fixed_point(solve, np.zeros(1))
    assert iterations <= 20
    assert abs(x[0] - solve(x)[0]) <= 1e-12

    again, iterations = slab_fixed_point(solve, x)
    assert iterations == 1
    np.testing.assert_allclose(again, x, atol=1e-12)

    damped, damped_iterations = slab_fixed_point(solve, np.zeros(1), FixedPointConfig(damping=0.5))
    np.testing.assert_allclose(damped, x, atol=1e-11)
    assert damped_iterations > 1
    print("✓ Picard iteration converges, restarts in one step and accepts damping")


def test_fixed_point_linear_mode_solves_once():
    calls = []

    def solve(x):
        calls.append(1)
        return x + 1.0

    result, iterations = slab_fixed_point(solve, np.zeros(2), linear=True)
    assert iterations == 1 and len(calls) == 1
    np.testing.assert_allclose(result, 1.0)


def test_fixed_point_failures():
    with pytest.raises(ConvergenceError) as info:
        slab_fixed_point(lambda x: x + 1.0, np.zeros(1), FixedPointConfig(max_iterations=5), slab=3)
    assert info.value.slab == 3
    assert info.value.residual == pytest.approx(1.0)

    overflow, iterations = slab_fixed_point(lambda x: np.full_like(x, np.inf), np.zeros(2))
    assert iterations == 1 and np.all(np.isinf(overflow))
    print("✓ Non-convergence raises with slab and residual, overflow returns at once")


@pytest.mark.parametrize("g", [sine_gordon(), sine_gordon(0.7), klein_gordon_linear(2.0),
                               klein_gordon_defocusing(2.0), klein_gordon_defocusing(1.5, 0.5)])
def test_primitives(g):
    assert g.check_primitive() <= 1e-6


def test_bad_primitives():
    with pytest.raises(DataError):
        Nonlinearity(np.sin, lambda u: 1.0 - np.cos(2.0 * u)).check_primitive()
    with pytest.raises(DataError):
        Nonlinearity(np.cos, np.sin).check_primitive()
    with pytest.raises(DomainError):
        klein_gordon_defocusing(0.0)
    assert not klein_gordon_defocusing(2.0).transcendental
    assert klein_gordon_defocusing(1.5).transcendental
    print("✓ Primitive checks reject inconsistent pairs")


@pytest.mark.parametrize("method", SEMILINEAR_METHODS)
def test_zero_nonlinearity_matches_linear(method):
    problem = build_problem("manufactured", 4, 6, 2, 1)
    semilinear = solve_semilinear(problem, zero_nonlinearity(), method)
    linear = solve_linear(problem, method)
    np.testing.assert_allclose(semilinear.U.coefficients, linear.U.coefficients, atol=1e-12)
    assert semilinear.iterations == [1] * 4


def test_sine_gordon_iterations():
    problem = build_problem("fig2", 4, 20, 1, 1)
    bundle = solve_semilinear(problem, method=MethodId.STABILIZED)
    assert len(bundle.iterations) == 4
    assert max(bundle.iterations) <= 20
    assert bundle.blowup_slab is None


def test_unknown_scheme_rejected():
    with pytest.raises(DomainError):
        solve_semilinear(build_problem("fig2", 2, 10, 1, 1), method=MethodId.GAUSS_RK)


def test_sine_gordon_equivalence():
    problem = build_problem("fig2", 4, 8, 1, 1)
    result = semilinear_equivalence_check(problem, fp=FixedPointConfig(tolerance=1e-13))
    assert result["displacement"] <= 1e-9 * result["scale"]
    assert result["velocity"] <= 1e-9 * result["scale"]
    print("✓ Stabilized2nd and DgCgFirstOrder agree on sine-Gordon")


def test_small_nonlinearity_is_first_order():
    """(U_eps - U_0) / eps settles as eps shrinks."""
    problem = build_problem("fig2", 4, 20, 1, 1)
    fp = FixedPointConfig(tolerance=1e-14)
    linear = solve_semilinear(problem, zero_nonlinearity()).U.coefficients
    slopes = []
    for eps in (1e-2, 1e-4):
        scaled = solve_semilinear(problem, sine_gordon().scaled(eps), fp=fp).U.coefficients
        slopes.append((scaled - linear) / eps)
    assert np.max(np.abs(slopes[0])) > 0.0
    np.testing.assert_allclose(slopes[0], slopes[1], atol=5e-2 * np.max(np.abs(slopes[1])))
    print("✓ Scaled nonlinearity perturbs the linear solution at first order")


def test_stabilized_conserves_semilinear_energy():
    problem = build_problem("fig2", 8, 40, 1, 1)
    bundle = solve_semilinear(problem, method=MethodId.STABILIZED, fp=FixedPointConfig(tolerance=5e-14),
                              load_points=12)
    trace = energy_trace(bundle, problem, EnergyVariant.SEMILINEAR)
    assert trace.max_drift() <= 1e-9
    print(f"✓ Stabilized2nd sine-Gordon energy drift {trace.max_drift():.2e}")


if __name__ == "__main__":
    test_fixed_point_defaults()
    test_scalar_fixed_point()
    test_fixed_point_linear_mode_solves_once()
    test_fixed_point_failures()
    for g in [sine_gordon(), sine_gordon(0.7), klein_gordon_linear(2.0), klein_gordon_defocusing(2.0),
              klein_gordon_defocusing(1.5, 0.5)]:
        test_primitives(g)
    print("✓ Built-in nonlinearities carry their primitives")
    test_bad_primitives()
    for method in SEMILINEAR_METHODS:
        test_zero_nonlinearity_matches_linear(method)
    print("✓ g = 0 reproduces the linear schemes")
    test_sine_gordon_iterations()
    test_unknown_scheme_rejected()
    test_sine_gordon_equivalence()
    test_small_nonlinearity_is_first_order()
    test_stabilized_conserves_semilinear_energy()
    print("\n✓ All solver_semilinear tests passed!")
