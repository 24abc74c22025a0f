"""Legendre polynomials, Lagrange bases and Gauss quadrature rules."""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Tuple

import numpy as np

from errors import DomainError

logger = logging.getLogger(__name__)

MAX_NODES = 16
NEWTON_TOLERANCE = 1e-15
NEWTON_MAX_ITERATIONS = 100

GAUSS_LEGENDRE = "GaussLegendre"
GAUSS_LOBATTO = "GaussLobatto"


def _check_interval(interval: Tuple[float, float]) -> Tuple[float, float]:
    a, b = float(interval[0]), float(interval[1])
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise DomainError(f"invalid interval ({a}, {b})")
    return a, b


def legendre_table(max_degree: int, s) -> np.ndarray:
    """Values of P_0..P_max_degree at points s of the reference interval [-1, 1].

    The last axis indexes the degree. Computed by the three-term recurrence.
    """
    s = np.asarray(s, dtype=float)
    table = np.empty(s.shape + (max_degree + 1,))
    table[..., 0] = 1.0
    if max_degree >= 1:
        table[..., 1] = s
    for k in range(1, max_degree):
        table[..., k + 1] = ((2 * k + 1) * s * table[..., k] - k * table[..., k - 1]) / (k + 1)
    return table


@lru_cache(maxsize=None)
def _reference_gauss_legendre(m: int) -> Tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, m + 1)
    s = np.cos(np.pi * (4 * k - 1) / (4 * m + 2))
    for _ in range(NEWTON_MAX_ITERATIONS):
        table = legendre_table(m, s)
        derivative = m * (s * table[:, m] - table[:, m - 1]) / (s * s - 1.0)
        step = table[:, m] / derivative
        s = s - step
        if np.max(np.abs(step)) < NEWTON_TOLERANCE:
            break
    table = legendre_table(m, s)
    derivative = m * (s * table[:, m] - table[:, m - 1]) / (s * s - 1.0)
    weights = 2.0 / ((1.0 - s * s) * derivative ** 2)
    order = np.argsort(s)
    return s[order], weights[order]


@lru_cache(maxsize=None)
def _reference_gauss_lobatto(m: int) -> Tuple[np.ndarray, np.ndarray]:
    n = m - 1
    # Chebyshev-Gauss-Lobatto points as the first guess
    s = -np.cos(np.pi * np.arange(m) / n)
    for _ in range(NEWTON_MAX_ITERATIONS):
        table = legendre_table(n, s)
        step = (s * table[:, n] - table[:, n - 1]) / (m * table[:, n])
        s = s - step
        if np.max(np.abs(step)) < NEWTON_TOLERANCE:
            break
    s[0], s[-1] = -1.0, 1.0
    table = legendre_table(n, s)
    weights = 2.0 / (n * m * table[:, n] ** 2)
    return s, weights


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on an interval with a declared exactness degree."""
    interval: Tuple[float, float]
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    exactness_degree: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable) -> float:
        """Apply the rule to a vectorized callable."""
        return float(np.dot(self.weights, f(self.nodes)))

    def mapped(self, a: float, b: float) -> "QuadratureRule":
        """The same rule affinely moved to (a, b)."""
        a, b = _check_interval((a, b))
        lo, hi = self.interval
        scale = (b - a) / (hi - lo)
        return QuadratureRule((a, b), a + (self.nodes - lo) * scale, self.weights * scale,
                              self.kind, self.exactness_degree)


def _from_reference(s: np.ndarray, w: np.ndarray, interval, kind: str, degree: int) -> QuadratureRule:
    a, b = _check_interval(interval)
    nodes = a + (b - a) * (s + 1.0) / 2.0
    if kind == GAUSS_LOBATTO:
        nodes[0], nodes[-1] = a, b
    return QuadratureRule((a, b), nodes, w * (b - a) / 2.0, kind, degree)


def gauss_legendre_rule(m: int, interval: Tuple[float, float] = (0.0, 1.0)) -> QuadratureRule:
    """m-point Gauss-Legendre rule, exact up to degree 2m-1."""
    if not 1 <= m <= MAX_NODES:
        raise DomainError(f"Gauss-Legendre node count must be in [1, {MAX_NODES}], got {m}")
    s, w = _reference_gauss_legendre(int(m))
    return _from_reference(s, w, interval, GAUSS_LEGENDRE, 2 * m - 1)


def gauss_lobatto_rule(m: int, interval: Tuple[float, float] = (0.0, 1.0)) -> QuadratureRule:
    """m-point Gauss-Lobatto rule including both endpoints, exact up to degree 2m-3."""
    if not 2 <= m <= MAX_NODES:
        raise DomainError(f"Gauss-Lobatto node count must be in [2, {MAX_NODES}], got {m}")
    s, w = _reference_gauss_lobatto(int(m))
    return _from_reference(s.copy(), w, interval, GAUSS_LOBATTO, 2 * m - 3)


class LegendreBasis:
    """Legendre polynomials on (a, b) normalized to the value 1 at b."""

    def __init__(self, interval: Tuple[float, float] = (0.0, 1.0), max_degree: int = MAX_NODES):
        self.interval = _check_interval(interval)
        if max_degree < 0:
            raise DomainError(f"max_degree must be nonnegative, got {max_degree}")
        self.max_degree = int(max_degree)

    def _reference(self, t) -> np.ndarray:
        a, b = self.interval
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * (b - a)
        if np.any(t < a - slack) or np.any(t > b + slack):
            raise DomainError(f"evaluation point outside ({a}, {b})")
        return np.clip(2.0 * (t - a) / (b - a) - 1.0, -1.0, 1.0)

    def table(self, t) -> np.ndarray:
        """All basis values at t; the last axis runs over degrees 0..max_degree."""
        return legendre_table(self.max_degree, self._reference(t))

    def evaluate(self, r: int, t):
        if not 0 <= r <= self.max_degree:
            raise DomainError(f"degree {r} outside [0, {self.max_degree}]")
        return legendre_table(r, self._reference(t))[..., r]

    def norm_squared(self, r: int) -> float:
        a, b = self.interval
        return (b - a) / (2 * r + 1)


def legendre_eval(basis: LegendreBasis, r: int, t: float) -> float:
    """Value of the r-th endpoint-normalized Legendre polynomial at t."""
    return float(basis.evaluate(r, t))


def _check_nodes(nodes: Sequence[float]) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) == 0:
        raise DomainError("Lagrange nodes must be a nonempty 1D sequence")
    gaps = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(len(nodes))
    if np.min(gaps) == 0.0:
        raise DomainError("Lagrange nodes must be pairwise distinct")
    return nodes


def lagrange_eval(nodes: Sequence[float], j: int, t: float) -> float:
    """Value of the j-th Lagrange cardinal polynomial of `nodes` at t."""
    nodes = _check_nodes(nodes)
    if not 0 <= j < len(nodes):
        raise DomainError(f"Lagrange index {j} outside [0, {len(nodes) - 1}]")
    others = np.delete(nodes, j)
    return float(np.prod((t - others) / (nodes[j] - others)))


def lagrange_matrix(nodes: Sequence[float], points) -> np.ndarray:
    """Matrix with entry [q, j] = l_j(points[q])."""
    nodes = _check_nodes(nodes)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    n = len(nodes)
    values = np.ones((len(points), n))
    for j in range(n):
        for k in range(n):
            if k != j:
                values[:, j] *= (points - nodes[k]) / (nodes[j] - nodes[k])
    return values


def lagrange_derivative_matrix(nodes: Sequence[float], points) -> np.ndarray:
    """Matrix with entry [q, j] = l_j'(points[q])."""
    nodes = _check_nodes(nodes)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    n = len(nodes)
    values = np.zeros((len(points), n))
    for j in range(n):
        for m in range(n):
            if m == j:
                continue
            term = np.full(len(points), 1.0 / (nodes[j] - nodes[m]))
            for k in range(n):
                if k != j and k != m:
                    term *= (points - nodes[k]) / (nodes[j] - nodes[k])
            values[:, j] += term
    return values


def integration_matrix(nodes: Sequence[float], targets, origin: float = 0.0) -> np.ndarray:
    """Matrix with entry [i, j] = integral of l_j from `origin` to targets[i].

    With Gauss-Legendre nodes this is the collocation Runge-Kutta matrix,
    with Gauss-Lobatto nodes the Lobatto IIIA matrix.
    """
    nodes = _check_nodes(nodes)
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    rule = gauss_legendre_rule(len(nodes))
    result = np.zeros((len(targets), len(nodes)))
    for i, target in enumerate(targets):
        if target == origin:
            continue
        lo, hi = min(origin, target), max(origin, target)
        piece = rule.mapped(lo, hi)
        sign = 1.0 if target > origin else -1.0
        result[i] = sign * piece.weights @ lagrange_matrix(nodes, piece.nodes)
    return result
