"""Semilinear space-time solvers: d_tt U - div(c^2 grad U) + g(U) = F.

Every scheme reuses the slab systems of solver_linear. The nonlinear load is
moved to the right-hand side and resolved slab by slab with a damped Picard
iteration; the linear slab operator is factorized once per slab width.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from errors import ConvergenceError, DataError, DomainError
from solver_linear import (DgCgSlab, MethodId, SecondOrderSlab, SolutionBundle, WaveProblem, march_dgcg,
                           march_second_order)
from projection import project_dg

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_ITERATIONS = 100
DEFAULT_DAMPING = 1.0

SEMILINEAR_METHODS = (MethodId.STABILIZED, MethodId.DGCG, MethodId.GAUSS_LEGENDRE, MethodId.GAUSS_LOBATTO,
                      MethodId.UNSTABILIZED)


class NonlinearityLabel(str, Enum):
    SINE_GORDON = "SineGordon"
    KLEIN_GORDON_LINEAR = "KleinGordonLinear"
    KLEIN_GORDON_DEFOCUSING = "KleinGordonDefocusing"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class Nonlinearity:
    """A pointwise nonlinearity g with its primitive G, G(0) = 0.

    `transcendental` marks a G that Gauss quadrature cannot integrate exactly
    on polynomials; `vanishes` marks g = 0.
    """
    g: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    label: NonlinearityLabel = NonlinearityLabel.CUSTOM
    transcendental: bool = True
    vanishes: bool = False

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.g(u)

    def scaled(self, factor: float) -> "Nonlinearity":
        """factor * g with primitive factor * G."""
        g, G = self.g, self.G
        return Nonlinearity(lambda u: factor * g(u), lambda u: factor * G(u), NonlinearityLabel.CUSTOM,
                            self.transcendental, self.vanishes or factor == 0.0)

    def check_primitive(self, samples: Optional[np.ndarray] = None, epsilon: float = 1e-4,
                        tolerance: float = 1e-6) -> float:
        """Max |(G(u+e) - G(u-e)) / 2e - g(u)| over samples; raises DataError when it is too large."""
        if samples is None:
            samples = np.linspace(-3.0, 3.0, 61)
        samples = np.asarray(samples, dtype=float)
        if abs(float(self.g(np.zeros(1))[0])) > 0.0 or abs(float(self.G(np.zeros(1))[0])) > 0.0:
            raise DataError(f"{self.label.value}: g(0) and G(0) must vanish")
        central = (self.G(samples + epsilon) - self.G(samples - epsilon)) / (2.0 * epsilon)
        mismatch = float(np.max(np.abs(central - self.g(samples))))
        scale = max(1.0, float(np.max(np.abs(self.g(samples)))))
        if mismatch > tolerance * scale:
            raise DataError(f"{self.label.value}: G is not a primitive of g (mismatch {mismatch:.3e})")
        return mismatch


def sine_gordon(c: float = 1.0) -> Nonlinearity:
    """g(u) = c^2 sin u, G(u) = c^2 (1 - cos u)."""
    c2 = c * c
    return Nonlinearity(lambda u: c2 * np.sin(u), lambda u: c2 * (1.0 - np.cos(u)), NonlinearityLabel.SINE_GORDON)


def klein_gordon_linear(c: float = 1.0) -> Nonlinearity:
    c2 = c * c
    return Nonlinearity(lambda u: c2 * u, lambda u: 0.5 * c2 * u * u, NonlinearityLabel.KLEIN_GORDON_LINEAR,
                        transcendental=False)


def klein_gordon_defocusing(rho: float, c: float = 1.0) -> Nonlinearity:
    """g(u) = c^4 u + c^2 |u|^rho u."""
    if not rho > 0.0:
        raise DomainError(f"defocusing exponent must be positive, got {rho}")
    c2, c4 = c * c, c ** 4

    def g(u):
        return c4 * u + c2 * np.abs(u) ** rho * u

    def G(u):
        return 0.5 * c4 * u * u + c2 * np.abs(u) ** (rho + 2.0) / (rho + 2.0)

    even_integer = float(rho).is_integer() and int(rho) % 2 == 0
    return Nonlinearity(g, G, NonlinearityLabel.KLEIN_GORDON_DEFOCUSING, transcendental=not even_integer)


def zero_nonlinearity() -> Nonlinearity:
    return Nonlinearity(np.zeros_like, np.zeros_like, NonlinearityLabel.CUSTOM, transcendental=False, vanishes=True)


NONLINEARITIES: Dict[str, Callable[..., Nonlinearity]] = {
    NonlinearityLabel.SINE_GORDON.value: sine_gordon,
    NonlinearityLabel.KLEIN_GORDON_LINEAR.value: klein_gordon_linear,
    NonlinearityLabel.KLEIN_GORDON_DEFOCUSING.value: klein_gordon_defocusing,
}


@dataclass(frozen=True)
class FixedPointConfig:
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    damping: float = DEFAULT_DAMPING

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise DomainError(f"fixed-point tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not 0.0 < self.damping <= 1.0:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "FixedPointConfig":
        data = data or {}
        return cls(float(data.get("tolerance", DEFAULT_TOLERANCE)),
                   int(data.get("max_iterations", DEFAULT_MAX_ITERATIONS)),
                   float(data.get("damping", DEFAULT_DAMPING)))

    def to_dict(self) -> dict:
        return {"tolerance": self.tolerance, "max_iterations": self.max_iterations, "damping": self.damping}


def slab_fixed_point(solve: Callable[[np.ndarray], np.ndarray], guess: np.ndarray,
                     fp: Optional[FixedPointConfig] = None, slab: int = 0,
                     linear: bool = False) -> Tuple[np.ndarray, int]:
    """Iterate x <- x + damping (solve(x) - x) until the sup-norm update is below tolerance.

    `solve` maps the current iterate to the linear slab solution with the
    nonlinear load frozen at that iterate. A non-finite iterate is returned
    at once so the caller can report blow-up.
    """
    fp = fp or FixedPointConfig()
    if linear:
        return solve(guess), 1
    current = np.asarray(guess, dtype=float)
    residual = np.inf
    for iteration in range(1, fp.max_iterations + 1):
        candidate = solve(current)
        if not np.all(np.isfinite(candidate)):
            return candidate, iteration
        update = candidate - current
        residual = float(np.max(np.abs(update)))
        current = current + fp.damping * update if fp.damping != 1.0 else candidate
        if residual <= fp.tolerance:
            return current, iteration
    raise ConvergenceError(f"fixed point did not converge in {fp.max_iterations} iterations", slab, residual)


def _nonlinear_load(problem: WaveProblem, g: Optional[Nonlinearity]):
    if g is None:
        return None
    operators = problem.operators
    return lambda u: operators.nonlinear_load(g, u)


def _fixed_point(fp: FixedPointConfig, linear: bool):
    return lambda solve, guess, slab: slab_fixed_point(solve, guess, fp, slab, linear)


def solve_semilinear(problem: WaveProblem, g: Optional[Nonlinearity] = None,
                     method: MethodId = MethodId.STABILIZED, fp: Optional[FixedPointConfig] = None,
                     progress: bool = False, load_points: Optional[int] = None) -> SolutionBundle:
    """Slab-marching solve of the semilinear problem; g defaults to the problem's nonlinearity."""
    method = MethodId(method)
    if method not in SEMILINEAR_METHODS:
        raise DomainError(f"{method.value} is not a space-time scheme")
    g = problem.nonlinearity if g is None else g
    fp = fp or FixedPointConfig()
    linear = g is None or g.vanishes
    nonlinear = _nonlinear_load(problem, g)
    fixed_point = _fixed_point(fp, linear)
    if method == MethodId.DGCG:
        bundle = march_dgcg(problem, nonlinear, fixed_point, progress, load_points)
    else:
        bundle = march_second_order(problem, method, nonlinear, fixed_point, progress, load_points)
    if bundle.iterations:
        logger.info("%s: fixed point took %d-%d iterations per slab", method.value,
                    min(bundle.iterations), max(bundle.iterations))
    return bundle


def semilinear_equivalence_check(problem: WaveProblem, g: Optional[Nonlinearity] = None,
                                 fp: Optional[FixedPointConfig] = None) -> Dict[str, float]:
    """Stabilized vs DG-CG with the same fixed-point settings.

    The velocity discrepancy compares the slab-wise L2 projections of both velocities.
    """
    stabilized = solve_semilinear(problem, g, MethodId.STABILIZED, fp)
    dgcg = solve_semilinear(problem, g, MethodId.DGCG, fp)
    mesh = problem.temporal_mesh
    projected = [project_dg(bundle.V, mesh).coefficients for bundle in (stabilized, dgcg)]
    scale = max(1.0, float(np.max(np.abs(dgcg.U.coefficients))))
    return {
        "displacement": float(np.max(np.abs(stabilized.U.coefficients - dgcg.U.coefficients))),
        "velocity": float(np.max(np.abs(projected[0] - projected[1]))),
        "scale": scale,
    }


CanonicalMap = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def slab_step_map(problem: WaveProblem, method: MethodId, g: Optional[Nonlinearity] = None,
                  fp: Optional[FixedPointConfig] = None, slab: int = 0) -> CanonicalMap:
    """One slab of a space-time scheme as a map (u, M v) -> (u, M v) at the slab ends."""
    method = MethodId(method)
    if method not in SEMILINEAR_METHODS:
        raise DomainError(f"{method.value} is not a space-time scheme")
    g = problem.nonlinearity if g is None else g
    fp = fp or FixedPointConfig()
    nonlinear = _nonlinear_load(problem, g)
    fixed_point = _fixed_point(fp, g is None or g.vanishes)
    t0, t1 = problem.temporal_mesh.slab(slab)
    operators = problem.operators

    if method == MethodId.DGCG:
        system = DgCgSlab(problem)

        def step(q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            v = operators.solve_mass(p)
            u_block, v_block, _ = system.step(q, v, t0, t1 - t0, nonlinear, fixed_point, slab)
            return u_block[:, -1], operators.mass @ v_block[:, -1]
        return step

    second_order = SecondOrderSlab(problem, method)

    def step(q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        block, momentum, _ = second_order.step(q, p, t0, t1 - t0, nonlinear, fixed_point, slab)
        return block[:, -1], momentum
    return step
