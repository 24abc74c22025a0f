"""Exception hierarchy shared by the solver modules."""
from typing import List, Optional


class WaveSolverError(Exception):
    """Base class for all solver errors."""


class DomainError(WaveSolverError, ValueError):
    """An argument lies outside the domain of an operation."""


class DataError(WaveSolverError, ValueError):
    """Problem data violates a modelling assumption (e.g. c <= 0)."""


class SlabSolveError(WaveSolverError):
    """A slab system could not be factorized or solved."""

    def __init__(self, message: str, slab: Optional[int] = None):
        super().__init__(message if slab is None else f"slab {slab}: {message}")
        self.slab = slab


class ConvergenceError(WaveSolverError):
    """A fixed-point or stage iteration did not converge."""

    def __init__(self, message: str, slab: Optional[int] = None, residual: float = float("nan")):
        prefix = "" if slab is None else f"slab {slab}: "
        super().__init__(f"{prefix}{message} (last update {residual:.3e})")
        self.slab = slab
        self.residual = residual


class ConfigError(WaveSolverError, ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, problems: List[str]):
        super().__init__("invalid config: " + "; ".join(problems))
        self.problems = list(problems)
