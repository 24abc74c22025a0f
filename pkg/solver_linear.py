"""Slab-marching space-time solvers for the linear wave equation.

All second-order-in-time schemes share one slab structure. On a slab of width h
with Lobatto-nodal temporal basis l_0..l_p the block operator is

    A[k, l] = -(1/h) D[k, l] M + h R[k, l] K,

with D the temporal stiffness and R the scheme's reaction matrix: p-point Gauss
quadrature for the stabilized and Gauss-Legendre schemes, exact integration for
the unstabilized scheme and (p+1)-point Lobatto quadrature for the Lobatto scheme.
Loads of the Gauss-Legendre and Lobatto schemes follow the same rules; the stabilized
and unstabilized schemes integrate them with (p+4) Gauss points, the stabilized one
against the Gauss-node interpolant of the test function.
Rows 0..p-1 determine the p new nodal values; row p yields the momentum P that
is carried to the next slab (P_0 = M V0h).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from tqdm import tqdm

from diagnostics import detect_blowup
from errors import DataError, DomainError, SlabSolveError
from mesh_spaces import (CONTINUOUS, SpaceTimeSolution, SpatialFunction, SpatialMesh1D, SpatialOperators,
                         TemporalMesh, assemble_spatial, build_spatial_mesh, build_temporal_mesh,
                         reference_nodes)
from polyquad import gauss_legendre_rule, gauss_lobatto_rule, lagrange_derivative_matrix, lagrange_matrix
from projection import project_initial_displacement, project_initial_velocity, reconstruct_velocity

logger = logging.getLogger(__name__)

Vector = np.ndarray
NonlinearLoad = Callable[[Vector], Vector]
FixedPoint = Callable[[Callable[[np.ndarray], np.ndarray], np.ndarray, int], Tuple[np.ndarray, int]]


class MethodId(str, Enum):
    UNSTABILIZED = "Unstabilized"
    STABILIZED = "Stabilized2nd"
    DGCG = "DgCgFirstOrder"
    GAUSS_LEGENDRE = "GaussLegendre2nd"
    GAUSS_LOBATTO = "GaussLobatto2nd"
    GAUSS_RK = "GaussRkReference"
    LOBATTO_IIIAB = "LobattoIIIABReference"

    @classmethod
    def parse(cls, name: str) -> "MethodId":
        for method in cls:
            if name in (method.value, method.name):
                return method
        raise DomainError(f"unknown method {name!r}")


SECOND_ORDER_METHODS = (MethodId.UNSTABILIZED, MethodId.STABILIZED, MethodId.GAUSS_LEGENDRE,
                        MethodId.GAUSS_LOBATTO)


@dataclass
class ExactSolution:
    """Closed-form U(x, t) with its time derivative and optional gradient."""
    displacement: Callable[[np.ndarray, float], np.ndarray]
    velocity: Callable[[np.ndarray, float], np.ndarray]
    gradient: Optional[Callable[[np.ndarray, float], np.ndarray]] = None


class WaveProblem:
    """Data of d_tt U - div(c^2 grad U) + g(U) = F on a space-time mesh."""

    def __init__(self, spatial_mesh: SpatialMesh1D, temporal_mesh: TemporalMesh,
                 wave_speed: SpatialFunction = 1.0,
                 source: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
                 initial_displacement: Optional[SpatialFunction] = None,
                 initial_velocity: Optional[SpatialFunction] = None,
                 initial_displacement_dx: Optional[SpatialFunction] = None,
                 nonlinearity=None, exact: Optional[ExactSolution] = None, name: str = "custom"):
        self.spatial_mesh = spatial_mesh
        self.temporal_mesh = temporal_mesh
        self.wave_speed = wave_speed
        self.source = source
        self.initial_displacement = initial_displacement
        self.initial_velocity = initial_velocity
        self.initial_displacement_dx = initial_displacement_dx
        self.nonlinearity = nonlinearity
        self.exact = exact
        self.name = name
        self._operators: Optional[SpatialOperators] = None
        self._initial_data: Optional[Tuple[Vector, Vector]] = None

    @property
    def operators(self) -> SpatialOperators:
        if self._operators is None:
            self._operators = assemble_spatial(self.spatial_mesh, self.wave_speed)
        return self._operators

    @property
    def num_dofs(self) -> int:
        return self.spatial_mesh.num_dofs

    @property
    def has_source(self) -> bool:
        return self.source is not None

    def initial_data(self) -> Tuple[Vector, Vector]:
        """(U0h, V0h): elliptic projection of U0 and L2 projection of V0."""
        if self._initial_data is None:
            U0h = project_initial_displacement(self.operators, self.initial_displacement,
                                               self.initial_displacement_dx)
            V0h = project_initial_velocity(self.operators, self.initial_velocity)
            if not (np.all(np.isfinite(U0h)) and np.all(np.isfinite(V0h))):
                raise DataError("initial data projections are not finite")
            self._initial_data = (U0h, V0h)
        return self._initial_data

    def load_vector(self, t: float) -> Vector:
        """(F(., t), phi_j); zero without a source."""
        if self.source is None:
            return np.zeros(self.num_dofs)
        return self.operators.load_vector(lambda x: self.source(x, t))

    def refined(self, N_t: int, N_x: int, p_t: Optional[int] = None, p_x: Optional[int] = None) -> "WaveProblem":
        """The same data on uniform meshes with the given sizes."""
        a, b = self.spatial_mesh.interval
        p_t = self.temporal_mesh.p_t if p_t is None else p_t
        p_x = self.spatial_mesh.p_x if p_x is None else p_x
        return self.with_meshes(build_spatial_mesh(a, b, N_x, p_x),
                                build_temporal_mesh(self.temporal_mesh.T, N_t, p_t))

    def with_meshes(self, spatial_mesh: Optional[SpatialMesh1D] = None,
                    temporal_mesh: Optional[TemporalMesh] = None) -> "WaveProblem":
        problem = WaveProblem(spatial_mesh or self.spatial_mesh, temporal_mesh or self.temporal_mesh,
                              self.wave_speed, self.source, self.initial_displacement, self.initial_velocity,
                              self.initial_displacement_dx, self.nonlinearity, self.exact, self.name)
        if spatial_mesh is None:
            problem._operators = self._operators
            problem._initial_data = self._initial_data
        return problem

    def __repr__(self):
        return f"WaveProblem({self.name!r}, {self.spatial_mesh}, {self.temporal_mesh})"


# Kept for readers of the linear API
LinearWaveProblem = WaveProblem


@dataclass
class SolutionBundle:
    """Result of one solver run."""
    method: MethodId
    U: SpaceTimeSolution
    V: Optional[SpaceTimeSolution] = None
    momentum: Optional[np.ndarray] = None        # (N_t + 1, n) nodal M V-hat
    iterations: List[int] = field(default_factory=list)
    problem: Optional[WaveProblem] = None

    @property
    def blowup_slab(self) -> Optional[int]:
        return self.U.blowup_slab

    @property
    def operators(self) -> Optional[SpatialOperators]:
        return self.U.operators


class SlabForms:
    """Reference-slab temporal matrices of one second-order scheme."""

    def __init__(self, method: MethodId, p_t: int, load_points: Optional[int] = None):
        if method not in SECOND_ORDER_METHODS + (MethodId.DGCG,):
            raise DomainError(f"{method.value} has no space-time slab form")
        self.method = method
        self.p = p = p_t
        self.trial_nodes = reference_nodes(p)
        self.gauss_nodes = gauss_legendre_rule(p).nodes
        self.gauss_weights = gauss_legendre_rule(p).weights

        exact = gauss_legendre_rule(p + 1)
        dl = lagrange_derivative_matrix(self.trial_nodes, exact.nodes)
        self.dt_matrix = dl.T @ (exact.weights[:, None] * dl)

        if load_points is not None and load_points < p:
            raise DomainError(f"load_points must be at least p_t = {p}, got {load_points}")
        accurate = p + 4 if load_points is None else load_points
        if method in (MethodId.STABILIZED, MethodId.DGCG):
            # Pi of a degree-p test function is its interpolant at the Gauss nodes; the integral
            # against it stays accurate. load_points = p collapses the loads onto the Gauss scheme.
            rule = gauss_legendre_rule(accurate)
            test = lagrange_matrix(self.gauss_nodes, rule.nodes) @ lagrange_matrix(self.trial_nodes, self.gauss_nodes)
        elif method == MethodId.UNSTABILIZED:
            rule = gauss_legendre_rule(accurate)
            test = lagrange_matrix(self.trial_nodes, rule.nodes)
        elif method == MethodId.GAUSS_LEGENDRE:
            rule = gauss_legendre_rule(p)
            test = lagrange_matrix(self.trial_nodes, rule.nodes)
        else:
            rule = gauss_lobatto_rule(p + 1)
            test = lagrange_matrix(self.trial_nodes, rule.nodes)
        self.load_nodes = rule.nodes
        self.load_weights = rule.weights
        self.test_at_load = test
        self.trial_at_load = lagrange_matrix(self.trial_nodes, rule.nodes)
        self.reaction = test.T @ (rule.weights[:, None] * self.trial_at_load)


def width_key(h: float) -> float:
    return float(f"{h:.12e}")


def factorize(matrix: sp.spmatrix, slab: int):
    try:
        return spla.splu(matrix.tocsc())
    except RuntimeError as exc:
        raise SlabSolveError(str(exc), slab) from exc


class _Slab:
    """Source sampling and load assembly shared by the slab systems."""

    def __init__(self, problem: WaveProblem, forms: SlabForms):
        self.problem = problem
        self.forms = forms
        self.mass = problem.operators.mass
        self.stiffness = problem.operators.stiffness
        self._factors: Dict[float, object] = {}

    def source_at_load(self, t0: float, h: float) -> Optional[np.ndarray]:
        if not self.problem.has_source:
            return None
        return np.column_stack([self.problem.load_vector(t0 + h * z) for z in self.forms.load_nodes])

    def loads(self, block: np.ndarray, source: Optional[np.ndarray], nonlinear: Optional[NonlinearLoad]) -> np.ndarray:
        """F - N(U) at the load nodes, shape (n, Q)."""
        n, nq = block.shape[0], len(self.forms.load_nodes)
        loads = np.zeros((n, nq)) if source is None else source.copy()
        if nonlinear is not None:
            values = block @ self.forms.trial_at_load.T
            for q in range(nq):
                loads[:, q] -= nonlinear(values[:, q])
        return loads


class SecondOrderSlab(_Slab):
    """Slab system of a second-order-in-time scheme; one LU per distinct width."""

    def __init__(self, problem: WaveProblem, method: MethodId, load_points: Optional[int] = None):
        super().__init__(problem, SlabForms(method, problem.temporal_mesh.p_t, load_points))
        self.method = method

    def _factor(self, h: float, slab: int):
        key = width_key(h)
        if key not in self._factors:
            p, D, R = self.forms.p, self.forms.dt_matrix, self.forms.reaction
            lhs = sp.kron(-D[:p, 1:] / h, self.mass) + sp.kron(h * R[:p, 1:], self.stiffness)
            self._factors[key] = factorize(lhs, slab)
            logger.debug("%s: factorized slab operator for h=%.6g", self.method.value, h)
        return self._factors[key]

    def contributions(self, block: np.ndarray, loads: np.ndarray, h: float) -> np.ndarray:
        """Row contributions of every local test function, shape (n, p + 1)."""
        D, R = self.forms.dt_matrix, self.forms.reaction
        weighted = h * self.forms.load_weights[:, None] * self.forms.test_at_load
        return (-(self.mass @ block) @ D.T / h + h * (self.stiffness @ block) @ R.T - loads @ weighted)

    def step(self, u_left: Vector, momentum: Vector, t0: float, h: float,
             nonlinear: Optional[NonlinearLoad] = None, fixed_point: Optional[FixedPoint] = None,
             slab: int = 0) -> Tuple[np.ndarray, Vector, int]:
        """Advance one slab; returns the nodal block (n, p+1), the new momentum and iterations."""
        p = self.forms.p
        n = len(u_left)
        lu = self._factor(h, slab)
        source = self.source_at_load(t0, h)
        first = np.zeros((n, p + 1))
        first[:, 0] = u_left
        # known column l = 0 moved to the right-hand side
        base = -self.contributions(first, np.zeros((n, len(self.forms.load_nodes))), h)[:, :p]
        base[:, 0] += momentum
        weighted = h * self.forms.load_weights[:, None] * self.forms.test_at_load[:, :p]

        def solve(block: np.ndarray) -> np.ndarray:
            rhs = base + self.loads(block, source, nonlinear) @ weighted
            new = np.empty((n, p + 1))
            new[:, 0] = u_left
            new[:, 1:] = lu.solve(rhs.T.ravel()).reshape(p, n).T
            return new

        guess = np.repeat(u_left[:, None], p + 1, axis=1)
        if nonlinear is None or fixed_point is None:
            block, iterations = solve(guess), 1
        else:
            block, iterations = fixed_point(solve, guess, slab)
        loads = self.loads(block, source, nonlinear)
        next_momentum = -self.contributions(block, loads, h)[:, p]
        return block, next_momentum, iterations


class DgCgSlab(_Slab):
    """Slab system of the first-order DG-CG scheme for the pair (U, V)."""

    def __init__(self, problem: WaveProblem, load_points: Optional[int] = None):
        super().__init__(problem, SlabForms(MethodId.DGCG, problem.temporal_mesh.p_t, load_points))
        forms = self.forms
        self.values = lagrange_matrix(forms.trial_nodes, forms.gauss_nodes)
        self.derivatives = lagrange_derivative_matrix(forms.trial_nodes, forms.gauss_nodes)
        self.test_at_load = lagrange_matrix(forms.gauss_nodes, forms.load_nodes)

    def _factor(self, h: float, slab: int):
        key = width_key(h)
        if key not in self._factors:
            G, dG, w = self.values[:, 1:], self.derivatives[:, 1:], self.forms.gauss_weights[:, None]
            eye = sp.identity(self.mass.shape[0], format="csr")
            lhs = sp.bmat([[sp.kron(dG, eye), sp.kron(-h * G, eye)],
                           [sp.kron(h * w * G, self.stiffness), sp.kron(w * dG, self.mass)]])
            self._factors[key] = factorize(lhs, slab)
        return self._factors[key]

    def residual(self, U: np.ndarray, V: np.ndarray, loads: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
        """Residuals of both slab equations tested with the Gauss-node Lagrange basis."""
        G, dG, w = self.values, self.derivatives, self.forms.gauss_weights
        first = U @ dG.T - h * V @ G.T
        weighted = h * self.forms.load_weights[:, None] * self.test_at_load
        second = h * (self.stiffness @ U) @ G.T * w + (self.mass @ V) @ dG.T * w - loads @ weighted
        return first, second

    def step(self, u_left: Vector, v_left: Vector, t0: float, h: float,
             nonlinear: Optional[NonlinearLoad] = None, fixed_point: Optional[FixedPoint] = None,
             slab: int = 0) -> Tuple[np.ndarray, np.ndarray, int]:
        p = self.forms.p
        n = len(u_left)
        lu = self._factor(h, slab)
        source = self.source_at_load(t0, h)
        first = np.zeros((n, p + 1))
        first[:, 0] = u_left
        first_v = np.zeros((n, p + 1))
        first_v[:, 0] = v_left
        zero_loads = np.zeros((n, len(self.forms.load_nodes)))
        base_u, base_v = self.residual(first, first_v, zero_loads, h)
        weighted = h * self.forms.load_weights[:, None] * self.test_at_load

        def solve(pair: np.ndarray) -> np.ndarray:
            loads = self.loads(pair[:, :p + 1], source, nonlinear)
            rhs = np.concatenate([(-base_u).T.ravel(), (loads @ weighted - base_v).T.ravel()])
            x = lu.solve(rhs)
            new = np.empty((n, 2 * (p + 1)))
            new[:, 0], new[:, p + 1] = u_left, v_left
            new[:, 1:p + 1] = x[:p * n].reshape(p, n).T
            new[:, p + 2:] = x[p * n:].reshape(p, n).T
            return new

        guess = np.concatenate([np.repeat(u_left[:, None], p + 1, axis=1),
                                np.repeat(v_left[:, None], p + 1, axis=1)], axis=1)
        if nonlinear is None or fixed_point is None:
            pair, iterations = solve(guess), 1
        else:
            pair, iterations = fixed_point(solve, guess, slab)
        return pair[:, :p + 1], pair[:, p + 1:], iterations


def _slab_iterator(mesh: TemporalMesh, label: str, progress: bool):
    return tqdm(range(mesh.num_slabs), desc=f"{label} slabs", disable=not progress, leave=False)


def march_second_order(problem: WaveProblem, method: MethodId, nonlinear: Optional[NonlinearLoad] = None,
                       fixed_point: Optional[FixedPoint] = None, progress: bool = False,
                       load_points: Optional[int] = None) -> SolutionBundle:
    """Solve a second-order-in-time scheme slab by slab."""
    mesh = problem.temporal_mesh
    ops = problem.operators
    p, n = mesh.p_t, ops.num_dofs
    slab = SecondOrderSlab(problem, method, load_points)
    U0h, V0h = problem.initial_data()

    coefficients = np.full((n, mesh.dimension), np.nan)
    momentum = np.full((mesh.num_slabs + 1, n), np.nan)
    coefficients[:, 0] = U0h
    momentum[0] = ops.mass @ V0h
    iterations: List[int] = []
    blowup = None
    with np.errstate(over="ignore", invalid="ignore"):
        for i in _slab_iterator(mesh, method.value, progress):
            t0, t1 = mesh.slab(i)
            block, momentum[i + 1], its = slab.step(coefficients[:, i * p], momentum[i], t0, t1 - t0,
                                                    nonlinear, fixed_point, i)
            coefficients[:, i * p:(i + 1) * p + 1] = block
            iterations.append(its)
            if detect_blowup([block]) is not None:
                blowup = i
                coefficients[:, (i + 1) * p + 1:] = np.nan
                logger.warning("%s blew up in slab %d (t = %.4g)", method.value, i, t1)
                break

    U = SpaceTimeSolution(coefficients, mesh, ops, space=CONTINUOUS, blowup_slab=blowup)
    V = None if blowup is not None else reconstruct_velocity(U.time_derivative(), V0h)
    logger.info("%s: %d slabs, p_t=%d, %d spatial DOFs", method.value, mesh.num_slabs, p, n)
    return SolutionBundle(method, U, V, momentum, iterations, problem)


def march_dgcg(problem: WaveProblem, nonlinear: Optional[NonlinearLoad] = None,
               fixed_point: Optional[FixedPoint] = None, progress: bool = False,
               load_points: Optional[int] = None) -> SolutionBundle:
    """Solve the first-order DG-CG scheme slab by slab."""
    mesh = problem.temporal_mesh
    ops = problem.operators
    p, n = mesh.p_t, ops.num_dofs
    slab = DgCgSlab(problem, load_points)
    U0h, V0h = problem.initial_data()

    U = np.full((n, mesh.dimension), np.nan)
    V = np.full((n, mesh.dimension), np.nan)
    U[:, 0], V[:, 0] = U0h, V0h
    iterations: List[int] = []
    blowup = None
    with np.errstate(over="ignore", invalid="ignore"):
        for i in _slab_iterator(mesh, MethodId.DGCG.value, progress):
            t0, t1 = mesh.slab(i)
            u_block, v_block, its = slab.step(U[:, i * p], V[:, i * p], t0, t1 - t0, nonlinear, fixed_point, i)
            U[:, i * p:(i + 1) * p + 1] = u_block
            V[:, i * p:(i + 1) * p + 1] = v_block
            iterations.append(its)
            if detect_blowup([u_block, v_block]) is not None:
                blowup = i
                logger.warning("%s blew up in slab %d", MethodId.DGCG.value, i)
                break

    Ut = SpaceTimeSolution(U, mesh, ops, space=CONTINUOUS, blowup_slab=blowup)
    Vt = SpaceTimeSolution(V, mesh, ops, space=CONTINUOUS, blowup_slab=blowup)
    momentum = (ops.mass @ Vt.nodal_values().T).T
    return SolutionBundle(MethodId.DGCG, Ut, Vt, momentum, iterations, problem)


def solve_linear(problem: WaveProblem, method: MethodId, progress: bool = False) -> SolutionBundle:
    """Any space-time scheme applied to the linear problem (nonlinearity ignored)."""
    method = MethodId(method)
    if method == MethodId.DGCG:
        return march_dgcg(problem, progress=progress)
    return march_second_order(problem, method, progress=progress)


def solve_stabilized(problem: WaveProblem, progress: bool = False,
                     load_points: Optional[int] = None) -> SpaceTimeSolution:
    return march_second_order(problem, MethodId.STABILIZED, progress=progress, load_points=load_points).U


def solve_unstabilized(problem: WaveProblem, progress: bool = False) -> SpaceTimeSolution:
    """Unstabilized scheme; blow-up is recorded on the result, never prevented."""
    return march_second_order(problem, MethodId.UNSTABILIZED, progress=progress).U


def solve_dgcg_first_order(problem: WaveProblem, progress: bool = False) -> Tuple[SpaceTimeSolution, SpaceTimeSolution]:
    bundle = march_dgcg(problem, progress=progress)
    return bundle.U, bundle.V


def crank_nicolson_reference(problem: WaveProblem, load_points: Optional[int] = None) -> SpaceTimeSolution:
    """Trapezoidal rule on u' = v, M v' = -K u + F.

    F is averaged over the slab with a 5-point (p+4 at p=1) or load_points Gauss rule, matching
    solve_stabilized with the same load_points; load_points=1 samples the midpoint.
    """
    mesh = problem.temporal_mesh
    if mesh.p_t != 1:
        raise DomainError("Crank-Nicolson coincides with the space-time schemes only for p_t = 1")
    ops = problem.operators
    M, K = ops.mass, ops.stiffness
    rule = gauss_legendre_rule(5 if load_points is None else load_points)
    u, v = problem.initial_data()
    nodal = [u]
    factors: Dict[float, object] = {}
    for i in range(mesh.num_slabs):
        t0, t1 = mesh.slab(i)
        h = t1 - t0
        key = width_key(h)
        if key not in factors:
            factors[key] = factorize(2.0 * M / h + 0.5 * h * K, i)
        load = sum(w * problem.load_vector(t0 + h * z) for z, w in zip(rule.nodes, rule.weights))
        rhs = (2.0 * M / h - 0.5 * h * K) @ u + 2.0 * (M @ v) + h * load
        u_next = factors[key].solve(rhs)
        v = 2.0 * (u_next - u) / h - v
        u = u_next
        nodal.append(u)
    return SpaceTimeSolution(np.column_stack(nodal), mesh, ops, space=CONTINUOUS)


def second_order_residual(bundle: SolutionBundle, nonlinear: Optional[NonlinearLoad] = None,
                          load_points: Optional[int] = None) -> float:
    """Max residual of the global second-order weak form over all test functions vanishing at T."""
    problem = bundle.problem
    mesh = problem.temporal_mesh
    p = mesh.p_t
    slab = SecondOrderSlab(problem, bundle.method, load_points)
    _, V0h = problem.initial_data()
    residual = np.zeros((problem.num_dofs, mesh.dimension))
    residual[:, 0] -= problem.operators.mass @ V0h
    for i in range(mesh.num_slabs):
        t0, t1 = mesh.slab(i)
        block = bundle.U.slab_block(i)
        loads = slab.loads(block, slab.source_at_load(t0, t1 - t0), nonlinear)
        residual[:, i * p:(i + 1) * p + 1] += slab.contributions(block, loads, t1 - t0)
    return float(np.max(np.abs(residual[:, :-1])))


def dgcg_residual(bundle: SolutionBundle, nonlinear: Optional[NonlinearLoad] = None) -> float:
    """Max residual of both DG-CG slab equations."""
    problem = bundle.problem
    mesh = problem.temporal_mesh
    slab = DgCgSlab(problem)
    worst = 0.0
    for i in range(mesh.num_slabs):
        t0, t1 = mesh.slab(i)
        U, V = bundle.U.slab_block(i), bundle.V.slab_block(i)
        loads = slab.loads(U, slab.source_at_load(t0, t1 - t0), nonlinear)
        first, second = slab.residual(U, V, loads, t1 - t0)
        worst = max(worst, float(np.max(np.abs(first))), float(np.max(np.abs(second))))
    return worst


def linear_equivalence_check(problem: WaveProblem) -> Dict[str, float]:
    """Stabilized vs DG-CG: displacement and reconstructed-velocity discrepancies."""
    stabilized = march_second_order(problem, MethodId.STABILIZED)
    dgcg = march_dgcg(problem)
    scale = max(1.0, float(np.max(np.abs(dgcg.U.coefficients))))
    return {
        "displacement": float(np.max(np.abs(stabilized.U.coefficients - dgcg.U.coefficients))),
        "velocity": float(np.max(np.abs(stabilized.V.coefficients - dgcg.V.coefficients))),
        "scale": scale,
    }
