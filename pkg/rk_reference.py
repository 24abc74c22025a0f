"""Reference one-step integrators for the semi-discrete system u' = v, M v' = -K u - N(u) + F(t).

Gauss-Legendre collocation and the Lobatto IIIA/IIIB pair in discontinuous
collocation form, plus symplecticity and Hamiltonian checks in the canonical
pair (q, p) = (u, M v).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from tqdm import tqdm

from diagnostics import detect_blowup
from errors import ConvergenceError, DomainError
from mesh_spaces import NODAL, SpaceTimeSolution
from polyquad import (gauss_legendre_rule, gauss_lobatto_rule, integration_matrix, lagrange_derivative_matrix,
                      lagrange_matrix)
from solver_linear import MethodId, SolutionBundle, WaveProblem, factorize, width_key
from solver_semilinear import FixedPointConfig, Nonlinearity, slab_fixed_point

logger = logging.getLogger(__name__)

FD_EPSILON = 1e-5

State = Tuple[np.ndarray, np.ndarray]
StepMap = Callable[[np.ndarray, np.ndarray], State]


@dataclass
class SemiDiscreteSystem:
    """Mass, stiffness, nonlinear load N(u) = (g(u_h), phi_j) and load vector F(t)."""
    mass: sp.spmatrix
    stiffness: sp.spmatrix
    nonlinear: Optional[Callable[[np.ndarray], np.ndarray]] = None
    source: Optional[Callable[[float], np.ndarray]] = None
    potential: Optional[Callable[[np.ndarray], float]] = None
    _factors: Dict[tuple, object] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.mass = sp.csr_matrix(self.mass)
        self.stiffness = sp.csr_matrix(self.stiffness)
        if self.mass.shape != self.stiffness.shape or self.mass.shape[0] != self.mass.shape[1]:
            raise DomainError("mass and stiffness must be square with equal shapes")

    @classmethod
    def from_problem(cls, problem: WaveProblem, g: Optional[Nonlinearity] = None) -> "SemiDiscreteSystem":
        operators = problem.operators
        g = problem.nonlinearity if g is None else g
        nonlinear = potential = None
        if g is not None and not g.vanishes:
            nonlinear = lambda u: operators.nonlinear_load(g, u)
            potential = lambda u: operators.potential(g.G, u)
        source = problem.load_vector if problem.has_source else None
        return cls(operators.mass, operators.stiffness, nonlinear, source, potential)

    @classmethod
    def oscillator(cls, mass: float = 1.0, stiffness: float = 1.0,
                   nonlinear: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                   potential: Optional[Callable[[np.ndarray], float]] = None) -> "SemiDiscreteSystem":
        """The scalar system m u'' + k u + N(u) = 0."""
        return cls(sp.csr_matrix([[mass]]), sp.csr_matrix([[stiffness]]), nonlinear, None, potential)

    @property
    def dimension(self) -> int:
        return self.mass.shape[0]

    @property
    def is_linear(self) -> bool:
        return self.nonlinear is None

    def homogeneous(self) -> "SemiDiscreteSystem":
        """The same system with the source removed."""
        return SemiDiscreteSystem(self.mass, self.stiffness, self.nonlinear, None, self.potential)

    def N(self, u: np.ndarray) -> np.ndarray:
        return np.zeros(self.dimension) if self.nonlinear is None else self.nonlinear(u)

    def F(self, t: float) -> np.ndarray:
        return np.zeros(self.dimension) if self.source is None else self.source(t)

    def force(self, u: np.ndarray, t: float) -> np.ndarray:
        """-K u - N(u) + F(t)."""
        return -(self.stiffness @ u) - self.N(u) + self.F(t)

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        if ("mass",) not in self._factors:
            self._factors[("mass",)] = spla.splu(self.mass.tocsc())
        return self._factors[("mass",)].solve(rhs)

    def factor(self, key: tuple, build: Callable[[], sp.spmatrix]):
        if key not in self._factors:
            self._factors[key] = factorize(build(), 0)
        return self._factors[key]


@dataclass
class CollocationStep:
    """Stage data of one collocation step on [t, t + h]."""
    nodes: np.ndarray
    displacement: np.ndarray        # (n, stages)
    velocity: np.ndarray            # (n, stages) or velocity parameters
    t: float
    h: float
    iterations: int = 1


def _gauss_stages(system: SemiDiscreteSystem, u: np.ndarray, v: np.ndarray, t: float, h: float, stages: int,
                  fp: FixedPointConfig) -> CollocationStep:
    rule = gauss_legendre_rule(stages)
    c = rule.nodes
    A = integration_matrix(c, c)
    M, K = system.mass, system.stiffness
    n = system.dimension
    lu = system.factor(("gauss", stages, width_key(h)),
                       lambda: sp.kron(sp.identity(stages), M) + sp.kron(h * h * (A @ A), K))
    loads = np.column_stack([system.F(t + h * z) for z in c])
    # the displacement stages are eliminated: U_i = u + h sum_j a_ij V_j
    base = (M @ v)[:, None] - h * np.outer(K @ u, c) + h * loads @ A.T

    def solve(velocity: np.ndarray) -> np.ndarray:
        rhs = base
        if not system.is_linear:
            displacement = u[:, None] + h * velocity @ A.T
            N = np.column_stack([system.N(displacement[:, j]) for j in range(stages)])
            rhs = base - h * N @ A.T
        return lu.solve(rhs.T.ravel()).reshape(stages, n).T

    guess = np.repeat(v[:, None], stages, axis=1)
    velocity, iterations = slab_fixed_point(solve, guess, fp, linear=system.is_linear)
    displacement = u[:, None] + h * velocity @ A.T
    return CollocationStep(c, displacement, velocity, t, h, iterations)


def gauss_rk_step(system: SemiDiscreteSystem, u: np.ndarray, v: np.ndarray, t: float, h: float, stages: int,
                  fp: Optional[FixedPointConfig] = None) -> State:
    """One step of the s-stage Gauss-Legendre collocation method."""
    if stages < 1 or not h > 0.0:
        raise DomainError(f"Gauss step needs stages >= 1 and h > 0, got {stages}, {h}")
    return _gauss_rk(system, u, v, t, h, stages, fp or FixedPointConfig())[:2]


def _gauss_rk(system, u, v, t, h, stages, fp) -> Tuple[np.ndarray, np.ndarray, int]:
    step = _gauss_stages(system, u, v, t, h, stages, fp)
    b = gauss_legendre_rule(stages).weights
    forces = np.column_stack([system.force(step.displacement[:, j], t + h * step.nodes[j])
                              for j in range(stages)])
    u_next = u + h * step.velocity @ b
    v_next = v + h * system.solve_mass(forces @ b)
    return u_next, v_next, step.iterations


def gauss_collocation_step(rhs: Callable[[float, np.ndarray], np.ndarray], y0, t0: float, h: float, stages: int,
                           jacobian: Optional[Callable[[float, np.ndarray], np.ndarray]] = None,
                           fp: Optional[FixedPointConfig] = None) -> np.ndarray:
    """s-stage Gauss collocation for a general y' = f(t, y).

    With a Jacobian the stage equations are solved by Newton's method,
    otherwise by the Picard iteration of the slab solvers.
    """
    fp = fp or FixedPointConfig()
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    d = len(y0)
    rule = gauss_legendre_rule(stages)
    A = integration_matrix(rule.nodes, rule.nodes)
    times = t0 + h * rule.nodes

    def stage_slopes(slopes: np.ndarray) -> np.ndarray:
        values = y0[:, None] + h * slopes @ A.T
        return np.column_stack([np.atleast_1d(rhs(times[j], values[:, j])) for j in range(stages)])

    guess = np.repeat(np.atleast_1d(rhs(t0, y0))[:, None], stages, axis=1)
    if jacobian is None:
        slopes, _ = slab_fixed_point(stage_slopes, guess, fp)
        return y0 + h * slopes @ rule.weights

    slopes = guess
    residual = np.inf
    for _ in range(fp.max_iterations):
        defect = slopes - stage_slopes(slopes)
        residual = float(np.max(np.abs(defect)))
        if residual <= fp.tolerance:
            break
        values = y0[:, None] + h * slopes @ A.T
        blocks = [np.atleast_2d(jacobian(times[j], values[:, j])) for j in range(stages)]
        matrix = np.eye(stages * d) - h * np.block([[A[i, j] * blocks[i] for j in range(stages)]
                                                    for i in range(stages)])
        slopes = slopes - np.linalg.solve(matrix, defect.T.ravel()).reshape(stages, d).T
    else:
        raise ConvergenceError("Newton iteration for Gauss stages did not converge", 0, residual)
    return y0 + h * slopes @ rule.weights


def _lobatto_3ab(system: SemiDiscreteSystem, y: np.ndarray, z: np.ndarray, t: float, h: float, stages: int,
                 fp: FixedPointConfig) -> Tuple[np.ndarray, np.ndarray, int]:
    p = stages - 1
    lobatto = gauss_lobatto_rule(stages)
    d, omega = lobatto.nodes, lobatto.weights
    # v has degree p - 1 and is carried by its values at the p Gauss nodes
    gauss = gauss_legendre_rule(p).nodes
    psi = lagrange_matrix(gauss, d)
    dpsi = lagrange_derivative_matrix(gauss, d)
    Q = integration_matrix(gauss, d)
    M, K = system.mass, system.stiffness
    n = system.dimension

    def build() -> sp.spmatrix:
        rows_m = dpsi[:p].copy()
        rows_m[0] = psi[0] + omega[0] * dpsi[0]
        rows_k = h * h * Q[:p].copy()
        rows_k[0] = 0.0
        return sp.kron(rows_m, M) + sp.kron(rows_k, K)

    lu = system.factor(("lobatto", stages, width_key(h)), build)
    first = M @ z + h * omega[0] * system.force(y, t)
    loads = [system.F(t + h * d[i]) for i in range(1, p)]

    def solve(a: np.ndarray) -> np.ndarray:
        rhs = np.empty((n, p))
        rhs[:, 0] = first
        if p > 1:
            displacement = y[:, None] + h * a @ Q.T
            for i in range(1, p):
                rhs[:, i] = h * (-(K @ y) - system.N(displacement[:, i]) + loads[i - 1])
        return lu.solve(rhs.T.ravel()).reshape(p, n).T

    guess = np.repeat(z[:, None], p, axis=1)
    a, iterations = slab_fixed_point(solve, guess, fp, linear=system.is_linear or p == 1)
    y_next = y + h * a @ Q[p]
    z_next = a @ psi[p] - omega[p] * (a @ dpsi[p]) + h * omega[p] * system.solve_mass(system.force(y_next, t + h))
    return y_next, z_next, iterations


def lobatto_3ab_step(system: SemiDiscreteSystem, y: np.ndarray, z: np.ndarray, t: float, h: float, stages: int,
                     fp: Optional[FixedPointConfig] = None) -> State:
    """One step of the s-stage Lobatto IIIA/IIIB pair for y' = z, M z' = -K y - N(y) + F(t)."""
    if stages < 2 or not h > 0.0:
        raise DomainError(f"Lobatto step needs stages >= 2 and h > 0, got {stages}, {h}")
    return _lobatto_3ab(system, y, z, t, h, stages, fp or FixedPointConfig())[:2]


def explicit_euler_step(system: SemiDiscreteSystem, u: np.ndarray, v: np.ndarray, t: float, h: float) -> State:
    return u + h * v, v + h * system.solve_mass(system.force(u, t))


def stormer_verlet_step(system: SemiDiscreteSystem, u: np.ndarray, v: np.ndarray, t: float, h: float) -> State:
    half = v + 0.5 * h * system.solve_mass(system.force(u, t))
    u_next = u + h * half
    return u_next, half + 0.5 * h * system.solve_mass(system.force(u_next, t + h))


def integrate_reference(problem: WaveProblem, method: MethodId, g: Optional[Nonlinearity] = None,
                        fp: Optional[FixedPointConfig] = None, progress: bool = False) -> SolutionBundle:
    """March the semi-discrete system over the temporal mesh; only nodal values are kept.

    Gauss uses p_t stages, Lobatto IIIA/IIIB uses p_t + 1.
    """
    method = MethodId(method)
    if method not in (MethodId.GAUSS_RK, MethodId.LOBATTO_IIIAB):
        raise DomainError(f"{method.value} is not a reference integrator")
    fp = fp or FixedPointConfig()
    system = SemiDiscreteSystem.from_problem(problem, g)
    mesh = problem.temporal_mesh
    ops = problem.operators
    u, v = problem.initial_data()
    nodal = np.full((ops.num_dofs, mesh.num_slabs + 1), np.nan)
    momentum = np.full((mesh.num_slabs + 1, ops.num_dofs), np.nan)
    nodal[:, 0], momentum[0] = u, ops.mass @ v
    iterations: List[int] = []
    blowup = None
    with np.errstate(over="ignore", invalid="ignore"):
        for i in tqdm(range(mesh.num_slabs), desc=f"{method.value} steps", disable=not progress, leave=False):
            t0, t1 = mesh.slab(i)
            try:
                if method == MethodId.GAUSS_RK:
                    u, v, its = _gauss_rk(system, u, v, t0, t1 - t0, mesh.p_t, fp)
                else:
                    u, v, its = _lobatto_3ab(system, u, v, t0, t1 - t0, mesh.p_t + 1, fp)
            except ConvergenceError as exc:
                raise ConvergenceError(f"{method.value} stage iteration failed", i, exc.residual) from exc
            nodal[:, i + 1], momentum[i + 1] = u, ops.mass @ v
            iterations.append(its)
            if detect_blowup([u, v]) is not None:
                blowup = i
                logger.warning("%s blew up in step %d", method.value, i)
                break
    U = SpaceTimeSolution(nodal, mesh, ops, degree=1, space=NODAL, blowup_slab=blowup)
    return SolutionBundle(method, U, None, momentum, iterations, problem)


def reference_step_map(system: SemiDiscreteSystem, method: MethodId, t: float, h: float, stages: int,
                       fp: Optional[FixedPointConfig] = None) -> StepMap:
    """One reference step as a map on the canonical pair (u, M v)."""
    method = MethodId(method)
    fp = fp or FixedPointConfig()

    def step(q: np.ndarray, p: np.ndarray) -> State:
        v = system.solve_mass(p)
        if method == MethodId.GAUSS_RK:
            u_next, v_next, _ = _gauss_rk(system, q, v, t, h, stages, fp)
        elif method == MethodId.LOBATTO_IIIAB:
            u_next, v_next, _ = _lobatto_3ab(system, q, v, t, h, stages, fp)
        else:
            raise DomainError(f"{method.value} is not a reference integrator")
        return u_next, system.mass @ v_next
    return step


def canonical_map(system: SemiDiscreteSystem, step: Callable[..., State], t: float, h: float) -> StepMap:
    """Wrap a (u, v) stepper such as explicit_euler_step into a map on (u, M v)."""
    def mapped(q: np.ndarray, p: np.ndarray) -> State:
        u_next, v_next = step(system, q, system.solve_mass(p), t, h)
        return u_next, system.mass @ v_next
    return mapped


def symplectic_form(n: int) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def step_jacobian(step_map: StepMap, n: int, state: Optional[State] = None,
                  epsilon: float = FD_EPSILON) -> np.ndarray:
    """Jacobian of a map on (q, p): exact from basis states when `state` is None, else central differences."""
    def flat(x: np.ndarray) -> np.ndarray:
        q, p = step_map(x[:n].copy(), x[n:].copy())
        return np.concatenate([q, p])

    eye = np.eye(2 * n)
    if state is None:
        return np.column_stack([flat(eye[k]) for k in range(2 * n)])
    x0 = np.concatenate([np.asarray(state[0], dtype=float), np.asarray(state[1], dtype=float)])
    return np.column_stack([(flat(x0 + epsilon * eye[k]) - flat(x0 - epsilon * eye[k])) / (2.0 * epsilon)
                            for k in range(2 * n)])


def symplectic_residual(step_map: StepMap, n: int, state: Optional[State] = None,
                        epsilon: float = FD_EPSILON) -> float:
    """max |J^T S J - S| for the one-step map on the canonical pair (u, M v)."""
    J = step_jacobian(step_map, n, state, epsilon)
    S = symplectic_form(n)
    return float(np.max(np.abs(J.T @ S @ J - S)))


def hamiltonian(system: SemiDiscreteSystem, u: np.ndarray, v: np.ndarray, t: float = 0.0) -> float:
    """1/2 (v'Mv + u'Ku) + integral of G(u_h) + (F(t), u_h)."""
    value = 0.5 * (v @ (system.mass @ v) + u @ (system.stiffness @ u))
    if system.potential is not None:
        value += system.potential(u)
    if system.source is not None:
        value += system.F(t) @ u
    return float(value)
