#!/usr/bin/env python
"""Example usage of the wavest solvers."""
import numpy as np

from diagnostics import EnergyVariant, VelocitySource, energy_trace, error_norms
from mesh_spaces import build_spatial_mesh, build_temporal_mesh
from presets import build_problem
from rk_reference import integrate_reference
from solver_linear import MethodId, WaveProblem, linear_equivalence_check, solve_linear
from solver_semilinear import FixedPointConfig, klein_gordon_defocusing, solve_semilinear


def print_separator():
    """Print a separator line."""
    print("\n" + "="*70 + "\n")


def example_energy_conservation():
    """Stabilized scheme on the travelling pulse: nodal energy is conserved."""
    print("EXAMPLE 1: Energy Conservation")
    print_separator()

    problem = build_problem("fig1", 32, 96, 1, 1)
    print(f"Problem: {problem}")
    bundle = solve_linear(problem, MethodId.STABILIZED)

    trace = energy_trace(bundle, problem, EnergyVariant.LINEAR, VelocitySource.RECONSTRUCTION)
    raw = energy_trace(bundle, problem, EnergyVariant.LINEAR, VelocitySource.RAW)
    print(f"  E(0) = {trace.initial:.6f}")
    print(f"  Max relative drift (reconstructed velocity): {trace.max_drift():.3e}")
    print(f"  Max relative drift (raw time derivative):    {raw.max_drift():.3e}")
    print("✓ Reconstructed velocity conserves energy" if trace.max_drift() <= 1e-10
          else "✗ Energy drift above 1e-10")


def example_sine_gordon_errors():
    """Semilinear solve on the breather with the error norms of the exact solution."""
    print("EXAMPLE 2: Sine-Gordon Breather")
    print_separator()

    for N_t, N_x in [(4, 160), (8, 320)]:
        problem = build_problem("fig2", N_t, N_x, 1, 1)
        bundle = solve_semilinear(problem, method=MethodId.STABILIZED)
        report = error_norms(bundle, problem.exact.displacement, problem.exact.velocity, problem.exact.gradient)
        iterations = max(bundle.iterations) if bundle.iterations else 0
        print(f"  N_t={N_t:3d} N_x={N_x:4d}: max fixed-point iterations {iterations}")
        for name, value in report.norms.items():
            print(f"    {name:12s} {value:.3e}")


def example_equivalence():
    """Second-order stabilized scheme and first-order DG-CG give the same displacement."""
    print("EXAMPLE 3: Scheme Equivalence")
    print_separator()

    problem = build_problem("manufactured", 6, 8, 2, 2)
    result = linear_equivalence_check(problem)
    print(f"  Displacement discrepancy: {result['displacement']:.3e}")
    print(f"  Velocity discrepancy:     {result['velocity']:.3e}")
    passed = max(result['displacement'], result['velocity']) <= 1e-9 * result['scale']
    print("✓ Stabilized2nd matches DgCgFirstOrder" if passed else "✗ Schemes disagree")

    problem = build_problem("fig2", 4, 10, 2, 1)
    fp = FixedPointConfig(tolerance=1e-13)
    space_time = solve_semilinear(problem, method=MethodId.GAUSS_LEGENDRE, fp=fp)
    reference = integrate_reference(problem, MethodId.GAUSS_RK, fp=fp)
    gap = np.max(np.abs(space_time.U.nodal_values() - reference.U.nodal_values()))
    print(f"  GaussLegendre2nd vs 2-stage Gauss RK at the nodes: {gap:.3e}")


def example_custom_problem():
    """A user-defined problem: variable wave speed and a defocusing Klein-Gordon term."""
    print("EXAMPLE 4: Custom Problem")
    print_separator()

    problem = WaveProblem(
        build_spatial_mesh(-5.0, 5.0, 80, 2),
        build_temporal_mesh(2.0, 40, 2),
        wave_speed=lambda x: 1.0 + 0.2 * np.tanh(x),
        initial_displacement=lambda x: np.exp(-x ** 2),
        initial_velocity=None,
        nonlinearity=klein_gordon_defocusing(2.0),
        name="custom",
    )
    print(f"Problem: {problem}")
    for method in (MethodId.STABILIZED, MethodId.DGCG):
        bundle = solve_semilinear(problem, method=method)
        trace = energy_trace(bundle, problem, EnergyVariant.SEMILINEAR)
        print(f"  {method.value:16s} energy drift {trace.max_drift():.3e}, "
              f"iterations per slab {min(bundle.iterations)}-{max(bundle.iterations)}")


def main():
    """Run all examples."""
    print("\n" + "="*70)
    print("  wavest - Usage Examples")
    print("="*70)

    example_energy_conservation()
    print_separator()

    example_sine_gordon_errors()
    print_separator()

    example_equivalence()
    print_separator()

    example_custom_problem()

    print("\n" + "="*70)
    print("  All examples completed successfully!")
    print("="*70 + "\n")


if __name__ == "__main__":
    main()
