"""Temporal L2 projection, Gauss-Legendre interpolation, initial-data projections,
velocity reconstruction and the postprocessed displacement.

Slab-local polynomials of the discontinuous space are stored as coefficients of
the Legendre polynomials on (0, 1) normalized by L_r(1) = 1.
"""
import logging
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from errors import DomainError
from mesh_spaces import (CONTINUOUS, POSTPROCESSED, SpaceTimeSolution, SpatialFunction, SpatialOperators,
                         TemporalMesh, as_spatial_callable, reference_nodes)
from polyquad import (MAX_NODES, LegendreBasis, gauss_legendre_rule, gauss_lobatto_rule, integration_matrix,
                      lagrange_derivative_matrix)

logger = logging.getLogger(__name__)

TimeFunction = Callable[[float], Union[float, np.ndarray]]


@lru_cache(maxsize=None)
def legendre_vandermonde(count: int, points: tuple) -> np.ndarray:
    """Entry [k, r] = L_r(points[k]) on (0, 1) for r < count."""
    return LegendreBasis((0.0, 1.0), max(count - 1, 0)).table(np.asarray(points))[:, :count]


def nodal_to_legendre(degree: int) -> np.ndarray:
    """Maps Lobatto-nodal values of a degree-`degree` polynomial to Legendre coefficients."""
    nodes = tuple(reference_nodes(degree))
    return np.linalg.inv(legendre_vandermonde(degree + 1, nodes))


def legendre_to_nodal(degree: int) -> np.ndarray:
    return legendre_vandermonde(degree + 1, tuple(reference_nodes(degree)))


class DgCoefficients:
    """Slab-wise polynomials of degree order-1, discontinuous across slabs.

    `coefficients` has shape (N_t, n, order) holding Legendre coefficients.
    """

    def __init__(self, temporal_mesh: TemporalMesh, coefficients: np.ndarray,
                 operators: Optional[SpatialOperators] = None):
        self.temporal_mesh = temporal_mesh
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.operators = operators
        if self.coefficients.ndim != 3 or self.coefficients.shape[0] != temporal_mesh.num_slabs:
            raise DomainError("DG coefficients must have shape (N_t, n, order)")

    @property
    def order(self) -> int:
        return self.coefficients.shape[2]

    @property
    def degree(self) -> int:
        return self.order - 1

    @property
    def num_dofs(self) -> int:
        return self.coefficients.shape[1]

    def evaluate_slab(self, i: int, tau) -> np.ndarray:
        """Values at reference times tau of slab i, shape (n, len(tau))."""
        tau = tuple(np.atleast_1d(np.asarray(tau, dtype=float)))
        return self.coefficients[i] @ legendre_vandermonde(self.order, tau).T

    def left_limit(self, j: int) -> np.ndarray:
        """Value at t_j from the slab on its left."""
        return self.coefficients[j - 1].sum(axis=1)

    def right_limit(self, j: int) -> np.ndarray:
        """Value at t_j from the slab on its right."""
        signs = (-1.0) ** np.arange(self.order)
        return self.coefficients[j] @ signs


def _sample(u: TimeFunction, times: np.ndarray) -> np.ndarray:
    """Stack u(t) column-wise into shape (n, len(times))."""
    return np.column_stack([np.atleast_1d(np.asarray(u(float(t)), dtype=float)) for t in times])


def project_dg(u: Union[TimeFunction, SpaceTimeSolution], mesh: TemporalMesh) -> DgCoefficients:
    """Slab-wise L2 projection onto polynomials of degree p_t - 1."""
    p = mesh.p_t
    if isinstance(u, SpaceTimeSolution):
        d = u.degree
        to_legendre = nodal_to_legendre(d)
        blocks = []
        for i in range(mesh.num_slabs):
            c = u.slab_block(i) @ to_legendre.T
            if d + 1 < p:
                c = np.pad(c, ((0, 0), (0, p - d - 1)))
            blocks.append(c[:, :p])
        return DgCoefficients(mesh, np.stack(blocks), u.operators)

    rule = gauss_legendre_rule(p + 4)
    L = legendre_vandermonde(p, tuple(rule.nodes))
    scale = 2 * np.arange(p) + 1
    blocks = []
    for i in range(mesh.num_slabs):
        a, b = mesh.slab(i)
        values = _sample(u, a + (b - a) * rule.nodes)
        blocks.append((values * rule.weights) @ L * scale)
    return DgCoefficients(mesh, np.stack(blocks))


def interpolate_gl(u: Union[TimeFunction, SpaceTimeSolution], mesh: TemporalMesh) -> DgCoefficients:
    """Slab-wise Lagrange interpolant at the p_t Gauss-Legendre nodes."""
    p = mesh.p_t
    nodes = gauss_legendre_rule(p).nodes
    to_legendre = np.linalg.inv(legendre_vandermonde(p, tuple(nodes)))
    blocks = []
    for i in range(mesh.num_slabs):
        if isinstance(u, SpaceTimeSolution):
            values = u.evaluate_slab(i, nodes)
        else:
            a, b = mesh.slab(i)
            values = _sample(u, a + (b - a) * nodes)
        blocks.append(values @ to_legendre.T)
    operators = u.operators if isinstance(u, SpaceTimeSolution) else None
    return DgCoefficients(mesh, np.stack(blocks), operators)


def differentiate(solution: SpaceTimeSolution) -> DgCoefficients:
    """Exact slab-wise time derivative of a continuous solution."""
    d = solution.degree
    nodes = gauss_legendre_rule(d).nodes
    to_legendre = np.linalg.inv(legendre_vandermonde(d, tuple(nodes)))
    blocks = [solution.derivative_slab(i, nodes) @ to_legendre.T
              for i in range(solution.temporal_mesh.num_slabs)]
    return DgCoefficients(solution.temporal_mesh, np.stack(blocks), solution.operators)


def project_initial_displacement(operators: SpatialOperators, U0: Optional[SpatialFunction],
                                 dU0: Optional[SpatialFunction] = None) -> np.ndarray:
    """Elliptic projection: K u = (c^2 U0', phi_j').

    Without an explicit derivative, U0 is differentiated through its
    element-wise interpolant of degree p_x + 8.
    """
    if U0 is None:
        return np.zeros(operators.num_dofs)
    if dU0 is None:
        dU0 = _elementwise_derivative(operators, as_spatial_callable(U0))
    load = operators.flux_load_vector(as_spatial_callable(dU0))
    return operators.solve_stiffness(load)


def _elementwise_derivative(operators: SpatialOperators, U0: Callable) -> Callable:
    mesh = operators.mesh
    nodes = gauss_lobatto_rule(min(mesh.p_x + 9, MAX_NODES)).nodes

    def derivative(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        e = np.clip(np.searchsorted(mesh.nodes, x, side="right") - 1, 0, mesh.num_elements - 1)
        out = np.empty_like(x)
        for k in np.unique(e):
            a, b = mesh.nodes[k], mesh.nodes[k + 1]
            mask = e == k
            samples = U0(a + (b - a) * nodes)
            out[mask] = lagrange_derivative_matrix(nodes, (x[mask] - a) / (b - a)) @ samples / (b - a)
        return out
    return derivative


def project_initial_velocity(operators: SpatialOperators, V0: Optional[SpatialFunction]) -> np.ndarray:
    """Spatial L2 projection: M v = (V0, phi_j)."""
    if V0 is None:
        return np.zeros(operators.num_dofs)
    return operators.solve_mass(operators.load_vector(as_spatial_callable(V0)))


def reconstruct_velocity(dtU: DgCoefficients, V0h: np.ndarray) -> SpaceTimeSolution:
    """The continuous degree-p_t velocity with Pi V = dtU and V(0) = V0h.

    The lower Legendre coefficients are copied from dtU; the top one enforces
    continuity at the left end of every slab.
    """
    mesh = dtU.temporal_mesh
    p = dtU.order
    to_nodal = legendre_to_nodal(p)
    lower_signs = (-1.0) ** np.arange(p)
    top_sign = (-1.0) ** p
    columns = np.empty((dtU.num_dofs, mesh.num_slabs * p + 1))
    left = np.asarray(V0h, dtype=float).copy()
    columns[:, 0] = left
    for i in range(mesh.num_slabs):
        lower = dtU.coefficients[i]
        top = top_sign * (left - lower @ lower_signs)
        legendre = np.column_stack([lower, top])
        nodal = legendre @ to_nodal.T
        columns[:, i * p + 1:(i + 1) * p + 1] = nodal[:, 1:]
        left = nodal[:, -1]
    return SpaceTimeSolution(columns, mesh, dtU.operators, degree=p, space=CONTINUOUS)


def postprocess_displacement(Vtilde: SpaceTimeSolution, U0h: np.ndarray) -> SpaceTimeSolution:
    """U*(t) = U0h + integral of Vtilde from 0 to t, one degree higher than Vtilde."""
    mesh = Vtilde.temporal_mesh
    d = Vtilde.degree
    targets = reference_nodes(d + 1)
    primitive = integration_matrix(reference_nodes(d), targets)
    columns = np.empty((Vtilde.num_dofs, mesh.num_slabs * (d + 1) + 1))
    left = np.asarray(U0h, dtype=float).copy()
    columns[:, 0] = left
    for i, h in enumerate(mesh.widths):
        values = left[:, None] + h * Vtilde.slab_block(i) @ primitive.T
        columns[:, i * (d + 1) + 1:(i + 1) * (d + 1) + 1] = values[:, 1:]
        left = values[:, -1]
    return SpaceTimeSolution(columns, mesh, Vtilde.operators, degree=d + 1, space=POSTPROCESSED)
