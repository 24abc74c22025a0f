"""Discrete energies, error norms against exact solutions, EOC and blow-up detection."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from errors import DomainError
from mesh_spaces import NODAL, SpaceTimeSolution
from polyquad import gauss_legendre_rule
from projection import postprocess_displacement, reconstruct_velocity

logger = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1e10

ExactField = Callable[[np.ndarray, float], np.ndarray]


class EnergyVariant(str, Enum):
    LINEAR = "LinearNodal"
    SEMILINEAR = "SemilinearNodal"
    HAMILTONIAN = "Hamiltonian"


class VelocitySource(str, Enum):
    RECONSTRUCTION = "Reconstruction"
    RAW = "RawTimeDerivative"


def detect_blowup(trace: Sequence, threshold: float = BLOWUP_THRESHOLD) -> Optional[int]:
    """Index of the first entry that is non-finite or exceeds `threshold` in sup-norm."""
    for index, entry in enumerate(trace):
        values = np.abs(np.asarray(entry, dtype=float))
        if values.size and (not np.all(np.isfinite(values)) or np.max(values) > threshold):
            return index
    return None


@dataclass
class EnergyTrace:
    """Nodal energies E(t_0..t_N) of one solution."""
    times: np.ndarray
    values: np.ndarray
    variant: EnergyVariant
    velocity_source: VelocitySource
    blowup_index: Optional[int] = None
    quadrature_exact: bool = True

    @property
    def initial(self) -> float:
        return float(self.values[0])

    def drift(self) -> np.ndarray:
        """|E(t_j) - E(0)|, relative to E(0) when E(0) is nonzero."""
        scale = abs(self.initial) if self.initial != 0.0 else 1.0
        return np.abs(self.values - self.initial) / scale

    def max_drift(self) -> float:
        drift = self.drift()
        return float(np.max(drift)) if np.all(np.isfinite(drift)) else float("inf")

    def growth_factor(self) -> float:
        if self.blowup_index is not None or not np.all(np.isfinite(self.values)):
            return float("inf")
        if self.initial == 0.0:
            return 1.0
        return float(np.max(np.abs(self.values)) / abs(self.initial))


def _nodal_velocities(bundle, source: VelocitySource) -> np.ndarray:
    U = bundle.U
    if source == VelocitySource.RECONSTRUCTION:
        if bundle.V is not None:
            return bundle.V.nodal_values()
        if U.space == NODAL:
            if bundle.momentum is None:
                raise DomainError("no velocity available for a nodal trajectory")
            return U.operators.solve_mass(bundle.momentum.T).T
        _, V0h = bundle.problem.initial_data()
        return reconstruct_velocity(U.time_derivative(), V0h).nodal_values()
    if U.space == NODAL:
        raise DomainError("a nodal trajectory has no time derivative")
    dtU = U.time_derivative()
    raw = [dtU.right_limit(0)] + [dtU.left_limit(j) for j in range(1, U.temporal_mesh.num_slabs + 1)]
    return np.array(raw)


def energy_trace(bundle, problem=None, variant: EnergyVariant = EnergyVariant.LINEAR,
                 velocity_source: VelocitySource = VelocitySource.RECONSTRUCTION,
                 potential_points: Optional[int] = None) -> EnergyTrace:
    """E(t_j) = 1/2 (V'MV + U'KU) [+ integral of G(U)] [+ (F, U)] at every temporal node."""
    problem = problem or bundle.problem
    variant = EnergyVariant(variant)
    velocity_source = VelocitySource(velocity_source)
    ops = bundle.U.operators
    mesh = bundle.U.temporal_mesh
    with np.errstate(over="ignore", invalid="ignore"):
        U = bundle.U.nodal_values()
        V = _nodal_velocities(bundle, velocity_source)
        values = 0.5 * (np.sum(V * (ops.mass @ V.T).T, axis=1) + np.sum(U * (ops.stiffness @ U.T).T, axis=1))

        exact = True
        g = problem.nonlinearity if problem is not None else None
        if variant != EnergyVariant.LINEAR and g is not None:
            quad = ops.accurate_quadrature if potential_points is None else ops.quadrature(potential_points)
            values = values + np.array([quad.integrate(g.G(quad.values(u))) if np.all(np.isfinite(u)) else np.nan
                                        for u in U])
            exact = not g.transcendental
        if variant == EnergyVariant.HAMILTONIAN and problem.has_source:
            values = values + np.array([problem.load_vector(t) @ u for t, u in zip(mesh.nodes, U)])
    blowup = detect_blowup(U)
    if blowup is None and not np.all(np.isfinite(values)):
        blowup = int(np.argmax(~np.isfinite(values)))
    return EnergyTrace(mesh.nodes.copy(), values, variant, velocity_source, blowup, exact)


@dataclass
class ErrorReport:
    """Norms of U - U_h for one run plus EOC slots filled by a ladder."""
    norms: Dict[str, float]
    h_t: float
    h_x: float
    p_t: int
    p_x: int
    eoc: Dict[str, List[float]] = field(default_factory=dict)


def _l2_in_space(quad, coefficients: np.ndarray, exact: np.ndarray, weight: Optional[np.ndarray] = None,
                 gradient: bool = False) -> np.ndarray:
    """Spatial L2 norms of the columns of exact - discrete."""
    basis = quad.gradient if gradient else quad.basis
    diff = exact - basis @ coefficients
    if weight is not None:
        diff = diff * weight[:, None]
    return np.sqrt(quad.weights @ diff ** 2)


def _sampled_max(solution: SpaceTimeSolution, quad, exact: ExactField, sample: np.ndarray,
                 weight: Optional[np.ndarray] = None, gradient: bool = False) -> float:
    mesh = solution.temporal_mesh
    worst = 0.0
    for i in range(mesh.num_slabs):
        a, b = mesh.slab(i)
        values = solution.evaluate_slab(i, sample)
        truth = np.column_stack([exact(quad.points, a + (b - a) * tau) for tau in sample])
        worst = max(worst, float(np.max(_l2_in_space(quad, values, truth, weight, gradient))))
    return worst


def error_norms(bundle, exact_u: ExactField, exact_dtu: ExactField,
                exact_grad: Optional[ExactField] = None) -> ErrorReport:
    """C0-in-time norms by sampling, L2L2 of the time derivative by tensor quadrature."""
    U = bundle.U
    mesh = U.temporal_mesh
    ops = U.operators
    quad = ops.accurate_quadrature
    p = mesh.p_t
    sample = np.concatenate([[0.0], gauss_legendre_rule(p + 3).nodes, [1.0]])

    norms = {"C0_L2_U": _sampled_max(U, quad, exact_u, sample)}
    if bundle.V is not None:
        norms["C0_L2_V"] = _sampled_max(bundle.V, quad, exact_dtu, sample)
        U0h, _ = bundle.problem.initial_data()
        ustar = postprocess_displacement(bundle.V, U0h)
        norms["C0_L2_Ustar"] = _sampled_max(ustar, quad, exact_u, sample)

    rule = gauss_legendre_rule(p + 4)
    total = 0.0
    for i in range(mesh.num_slabs):
        a, b = mesh.slab(i)
        values = U.derivative_slab(i, rule.nodes)
        truth = np.column_stack([exact_dtu(quad.points, a + (b - a) * tau) for tau in rule.nodes])
        total += (b - a) * float(rule.weights @ _l2_in_space(quad, values, truth) ** 2)
    norms["L2L2_dtU"] = float(np.sqrt(total))

    if exact_grad is not None:
        c = np.asarray(ops.wave_speed(quad.points), dtype=float)
        norms["C0_L2_gradU"] = _sampled_max(U, quad, exact_grad, sample, weight=c, gradient=True)

    mesh_x = ops.mesh
    return ErrorReport(norms, mesh.h, mesh_x.h, p, mesh_x.p_x)


def eoc(h: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Observed orders log(e_k / e_k+1) / log(h_k / h_k+1)."""
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(h) != len(errors) or len(h) < 2:
        raise DomainError("EOC needs at least two (h, error) pairs")
    if np.any(h <= 0.0) or np.any(errors <= 0.0) or not np.all(np.isfinite(errors)):
        raise DomainError("EOC needs positive mesh sizes and errors")
    if np.any(np.diff(h) >= 0.0):
        raise DomainError("mesh sizes must be strictly decreasing")
    return list(np.log(errors[:-1] / errors[1:]) / np.log(h[:-1] / h[1:]))
