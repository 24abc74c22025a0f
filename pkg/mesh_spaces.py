"""Temporal and spatial meshes, spatial mass/stiffness assembly and space-time solutions."""
import logging
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from errors import DataError, DomainError
from polyquad import (MAX_NODES, gauss_legendre_rule, gauss_lobatto_rule, lagrange_derivative_matrix,
                      lagrange_matrix)

logger = logging.getLogger(__name__)

MAX_DEGREE = 8

# Space tags of SpaceTimeSolution
CONTINUOUS = "continuous"            # Q_h^{p_t}, continuous in time
POSTPROCESSED = "postprocessed"      # Q_h^{p_t+1}
NODAL = "nodal"                      # nodal values only (reference integrators)

SpatialFunction = Union[float, Callable[[np.ndarray], np.ndarray]]


def _check_degree(p: int, name: str) -> int:
    if not 1 <= p <= MAX_DEGREE:
        raise DomainError(f"{name} must be in [1, {MAX_DEGREE}], got {p}")
    return int(p)


def _check_nodes(nodes: Sequence[float], name: str) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 2:
        raise DomainError(f"{name} needs at least two nodes")
    if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0.0):
        raise DomainError(f"{name} nodes must be finite and strictly increasing")
    return nodes


@lru_cache(maxsize=None)
def reference_nodes(degree: int) -> np.ndarray:
    """Gauss-Lobatto points on (0, 1) carrying the nodal basis of a given degree."""
    return gauss_lobatto_rule(degree + 1).nodes


class TemporalMesh:
    """Nodes 0 = t_0 < ... < t_N = T with a temporal degree p_t."""

    def __init__(self, nodes: Sequence[float], p_t: int):
        self.nodes = _check_nodes(nodes, "temporal mesh")
        if self.nodes[0] != 0.0:
            raise DomainError("temporal mesh must start at t = 0")
        self.p_t = _check_degree(p_t, "p_t")

    @classmethod
    def uniform(cls, T: float, N_t: int, p_t: int) -> "TemporalMesh":
        return cls(np.linspace(0.0, T, N_t + 1), p_t)

    @property
    def num_slabs(self) -> int:
        return len(self.nodes) - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(np.max(self.widths))

    @property
    def dimension(self) -> int:
        """Dimension of the continuous space S^{p_t}(0, T)."""
        return self.num_slabs * self.p_t + 1

    def slab(self, i: int) -> Tuple[float, float]:
        return float(self.nodes[i]), float(self.nodes[i + 1])

    def locate(self, t: float) -> int:
        """Index of the slab containing t (interior nodes belong to the left slab)."""
        if t < -1e-12 * self.T or t > self.T * (1 + 1e-12):
            raise DomainError(f"t = {t} outside [0, {self.T}]")
        i = int(np.searchsorted(self.nodes, t, side="left")) - 1
        return min(max(i, 0), self.num_slabs - 1)

    def __repr__(self):
        return f"TemporalMesh(N_t={self.num_slabs}, p_t={self.p_t}, T={self.T})"


def build_temporal_mesh(T: float, N_t: int, p_t: int, nodes: Optional[Sequence[float]] = None) -> TemporalMesh:
    """Uniform mesh of N_t slabs on [0, T], or the explicit `nodes` when given (ending at T)."""
    if nodes is not None:
        mesh = TemporalMesh(nodes, p_t)
        if not np.isclose(mesh.nodes[-1], T, rtol=1e-14, atol=0.0):
            raise DomainError(f"explicit temporal nodes end at {mesh.nodes[-1]}, not at T = {T}")
        return mesh
    if not T > 0.0:
        raise DomainError(f"final time must be positive, got {T}")
    if N_t < 1:
        raise DomainError(f"N_t must be at least 1, got {N_t}")
    return TemporalMesh.uniform(T, N_t, p_t)


class SpatialMesh1D:
    """Elements of an interval with degree-p_x Lagrange elements and Dirichlet ends."""

    def __init__(self, nodes: Sequence[float], p_x: int):
        self.nodes = _check_nodes(nodes, "spatial mesh")
        self.p_x = _check_degree(p_x, "p_x")

    @classmethod
    def uniform(cls, a: float, b: float, N_x: int, p_x: int) -> "SpatialMesh1D":
        return cls(np.linspace(a, b, N_x + 1), p_x)

    @property
    def interval(self) -> Tuple[float, float]:
        return float(self.nodes[0]), float(self.nodes[-1])

    @property
    def num_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def h(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def num_dofs(self) -> int:
        """Interior degrees of freedom after eliminating the boundary."""
        return self.num_elements * self.p_x - 1

    def element_dofs(self, e: int) -> np.ndarray:
        """Interior DOF indices of element e; boundary DOFs are -1."""
        dofs = e * self.p_x + np.arange(self.p_x + 1) - 1
        dofs[dofs >= self.num_dofs] = -1
        return dofs

    def dof_coordinates(self) -> np.ndarray:
        xi = reference_nodes(self.p_x)
        a, b = self.nodes[:-1, None], self.nodes[1:, None]
        points = (a + (b - a) * xi[None, :-1]).ravel()
        return points[1:]

    def __repr__(self):
        return f"SpatialMesh1D(N_x={self.num_elements}, p_x={self.p_x}, interval={self.interval})"


def build_spatial_mesh(a: float, b: float, N_x: int, p_x: int,
                       nodes: Optional[Sequence[float]] = None) -> SpatialMesh1D:
    if nodes is not None:
        return SpatialMesh1D(nodes, p_x)
    if not a < b:
        raise DomainError(f"invalid spatial interval ({a}, {b})")
    if N_x < 1 or N_x * p_x < 2:
        raise DomainError(f"spatial mesh needs at least one interior DOF, got N_x={N_x}, p_x={p_x}")
    return SpatialMesh1D.uniform(a, b, N_x, p_x)


def as_spatial_callable(f: Optional[SpatialFunction]) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    """Wrap constants so every spatial datum is a vectorized callable."""
    if f is None or callable(f):
        return f
    value = float(f)
    return lambda x: np.full(np.shape(x), value)


class SpatialQuadrature:
    """Gauss-Legendre points of every element with basis values as sparse matrices."""

    def __init__(self, mesh: SpatialMesh1D, points_per_element: int):
        if points_per_element > MAX_NODES:
            points_per_element = MAX_NODES
        rule = gauss_legendre_rule(points_per_element)
        xi = reference_nodes(mesh.p_x)
        phi = lagrange_matrix(xi, rule.nodes)
        dphi = lagrange_derivative_matrix(xi, rule.nodes)
        widths = np.diff(mesh.nodes)
        nq, nb = rule.size, mesh.p_x + 1

        self.points = (mesh.nodes[:-1, None] + widths[:, None] * rule.nodes[None, :]).ravel()
        self.weights = (widths[:, None] * rule.weights[None, :]).ravel()
        rows, cols, values, derivatives = [], [], [], []
        for e in range(mesh.num_elements):
            dofs = mesh.element_dofs(e)
            for k in range(nb):
                if dofs[k] < 0:
                    continue
                rows.append(e * nq + np.arange(nq))
                cols.append(np.full(nq, dofs[k]))
                values.append(phi[:, k])
                derivatives.append(dphi[:, k] / widths[e])
        shape = (len(self.points), mesh.num_dofs)
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        self.basis = sp.csr_matrix((np.concatenate(values), (rows, cols)), shape=shape)
        self.gradient = sp.csr_matrix((np.concatenate(derivatives), (rows, cols)), shape=shape)

    def values(self, u: np.ndarray) -> np.ndarray:
        return self.basis @ u

    def integrate(self, f_values: np.ndarray) -> float:
        return float(self.weights @ f_values)

    def load(self, f_values: np.ndarray) -> np.ndarray:
        """Vector of integrals of f against every basis function."""
        return self.basis.T @ (self.weights * f_values)


def _banded_upper(matrix: sp.spmatrix, bandwidth: int) -> np.ndarray:
    """Upper banded storage as expected by scipy.linalg.cholesky_banded."""
    n = matrix.shape[0]
    ab = np.zeros((bandwidth + 1, n))
    for k in range(bandwidth + 1):
        ab[bandwidth - k, k:] = matrix.diagonal(k)
    return ab


class SpatialOperators:
    """Mass and stiffness matrices of a spatial mesh with factorized solves."""

    def __init__(self, mesh: SpatialMesh1D, wave_speed: SpatialFunction = 1.0):
        self.mesh = mesh
        self.wave_speed = as_spatial_callable(wave_speed)
        self._quadratures = {}

        quad = self.quadrature(mesh.p_x + 2)
        c = np.asarray(self.wave_speed(quad.points), dtype=float)
        if np.any(~np.isfinite(c)) or np.any(c <= 0.0):
            raise DataError("wave speed must be positive at every quadrature point")
        weighted = sp.diags(quad.weights)
        self.mass = (quad.basis.T @ weighted @ quad.basis).tocsr()
        self.stiffness = (quad.gradient.T @ sp.diags(quad.weights * c ** 2) @ quad.gradient).tocsr()
        self.bandwidth = mesh.p_x

        self._mass_factor = self._cholesky(self.mass, "mass")
        self._stiffness_factor = self._cholesky(self.stiffness, "stiffness")
        logger.debug("assembled %d spatial DOFs on %s", self.num_dofs, mesh)

    def _cholesky(self, matrix: sp.spmatrix, name: str) -> np.ndarray:
        try:
            return scipy.linalg.cholesky_banded(_banded_upper(matrix, self.bandwidth))
        except np.linalg.LinAlgError as exc:
            raise DataError(f"{name} matrix is not positive definite") from exc

    @property
    def num_dofs(self) -> int:
        return self.mesh.num_dofs

    def quadrature(self, points_per_element: int) -> SpatialQuadrature:
        if points_per_element not in self._quadratures:
            self._quadratures[points_per_element] = SpatialQuadrature(self.mesh, points_per_element)
        return self._quadratures[points_per_element]

    @property
    def accurate_quadrature(self) -> SpatialQuadrature:
        """Rule used for loads, nonlinear terms, G-integrals and error norms."""
        return self.quadrature(self.mesh.p_x + 4)

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve_banded((self._mass_factor, False), rhs)

    def solve_stiffness(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve_banded((self._stiffness_factor, False), rhs)

    def load_vector(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """(f, phi_j) for every interior basis function."""
        quad = self.accurate_quadrature
        return quad.load(np.asarray(f(quad.points), dtype=float))

    def flux_load_vector(self, df: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """(c^2 f', phi_j') given the derivative f'."""
        quad = self.accurate_quadrature
        flux = self.wave_speed(quad.points) ** 2 * np.asarray(df(quad.points), dtype=float)
        return quad.gradient.T @ (quad.weights * flux)

    def nonlinear_load(self, g: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> np.ndarray:
        """(g(u_h), phi_j) on the accurate quadrature."""
        quad = self.accurate_quadrature
        return quad.load(g(quad.values(u)))

    def potential(self, G: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> float:
        """Integral of G(u_h) on the same quadrature as nonlinear_load."""
        quad = self.accurate_quadrature
        return quad.integrate(G(quad.values(u)))

    def interpolate(self, f: SpatialFunction) -> np.ndarray:
        """Nodal interpolant at the interior DOF coordinates."""
        return np.asarray(as_spatial_callable(f)(self.mesh.dof_coordinates()), dtype=float)


def assemble_spatial(mesh: SpatialMesh1D, c: SpatialFunction = 1.0) -> SpatialOperators:
    """Assemble M and K = (c^2 grad phi_i, grad phi_j) with p_x+2 Gauss points per element."""
    return SpatialOperators(mesh, c)


class SpaceTimeSolution:
    """Coefficients of a continuous-in-time function in Lobatto-nodal temporal basis.

    Column i*degree + k holds the spatial coefficients at local temporal node k of
    slab i; mesh nodes are shared between neighbouring slabs.
    """

    def __init__(self, coefficients: np.ndarray, temporal_mesh: TemporalMesh,
                 operators: Optional[SpatialOperators] = None, degree: Optional[int] = None,
                 space: str = CONTINUOUS, blowup_slab: Optional[int] = None):
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.coefficients.ndim == 1:
            self.coefficients = self.coefficients[None, :]
        self.temporal_mesh = temporal_mesh
        self.operators = operators
        self.degree = temporal_mesh.p_t if degree is None else int(degree)
        self.space = space
        self.blowup_slab = blowup_slab
        expected = temporal_mesh.num_slabs * self.degree + 1
        if self.coefficients.shape[1] != expected:
            raise DomainError(f"expected {expected} temporal coefficients, got {self.coefficients.shape[1]}")
        if operators is not None and self.coefficients.shape[0] != operators.num_dofs:
            raise DomainError("spatial coefficient count does not match the spatial space")

    @property
    def num_dofs(self) -> int:
        return self.coefficients.shape[0]

    @property
    def spatial_mesh(self) -> Optional[SpatialMesh1D]:
        return None if self.operators is None else self.operators.mesh

    @property
    def local_nodes(self) -> np.ndarray:
        return reference_nodes(self.degree)

    def slab_block(self, i: int) -> np.ndarray:
        d = self.degree
        return self.coefficients[:, i * d:i * d + d + 1]

    def evaluate_slab(self, i: int, tau) -> np.ndarray:
        """Values at reference times tau in [0, 1] of slab i, shape (n, len(tau))."""
        return self.slab_block(i) @ lagrange_matrix(self.local_nodes, tau).T

    def derivative_slab(self, i: int, tau) -> np.ndarray:
        a, b = self.temporal_mesh.slab(i)
        return self.slab_block(i) @ lagrange_derivative_matrix(self.local_nodes, tau).T / (b - a)

    def evaluate(self, t: float) -> np.ndarray:
        i = self.temporal_mesh.locate(t)
        a, b = self.temporal_mesh.slab(i)
        return self.evaluate_slab(i, [(t - a) / (b - a)])[:, 0]

    def nodal_values(self) -> np.ndarray:
        """Values at t_0..t_N, shape (N_t + 1, n)."""
        return self.coefficients[:, ::self.degree].T

    def time_derivative(self):
        """The slab-wise derivative as DgCoefficients (degree - 1 per slab)."""
        from projection import differentiate
        return differentiate(self)

    def __repr__(self):
        return (f"SpaceTimeSolution(space={self.space}, degree={self.degree}, "
                f"dofs={self.num_dofs}, slabs={self.temporal_mesh.num_slabs})")
