"""Benchmark problems with closed-form solutions."""
import logging
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy.special import expit

from errors import DataError, DomainError
from mesh_spaces import build_spatial_mesh, build_temporal_mesh
from solver_linear import ExactSolution, WaveProblem
from solver_semilinear import sine_gordon

logger = logging.getLogger(__name__)

FIG1 = "fig1"
FIG2 = "fig2"
MANUFACTURED = "manufactured"

# Long names accepted wherever a preset is named
PRESET_ALIASES = {
    "Fig1LinearPulse": FIG1,
    "Fig2SineGordon": FIG2,
    "ManufacturedLinear": MANUFACTURED,
}

BREATHER_GAMMA = 1.1

Ladder = List[Tuple[int, int]]


def pulse(s: np.ndarray) -> np.ndarray:
    """omega(s) = exp(-20 (s - 0.1)^2) - exp(-20 (s + 0.1)^2)."""
    return np.exp(-20.0 * (s - 0.1) ** 2) - np.exp(-20.0 * (s + 0.1) ** 2)


def pulse_derivative(s: np.ndarray) -> np.ndarray:
    return -40.0 * (s - 0.1) * np.exp(-20.0 * (s - 0.1) ** 2) + 40.0 * (s + 0.1) * np.exp(-20.0 * (s + 0.1) ** 2)


def switch(s: np.ndarray) -> np.ndarray:
    """S(s) = 1 / (1 + exp(-30 s))."""
    return expit(30.0 * s)


def switch_derivative(s: np.ndarray) -> np.ndarray:
    value = switch(s)
    return 30.0 * value * (1.0 - value)


def _travelling_profile(s: np.ndarray) -> np.ndarray:
    return pulse(s) * switch(s)


def _travelling_slope(s: np.ndarray) -> np.ndarray:
    return pulse_derivative(s) * switch(s) + pulse(s) * switch_derivative(s)


def preset_fig1(N_t: int = 128, N_x: int = 384, p_t: int = 1, p_x: int = 1) -> WaveProblem:
    """Right-travelling pulse U(x, t) = omega(x - t + 1) S(x - t + 1) on (-30, 30), T = 10, c = 1, F = 0."""
    exact = ExactSolution(
        displacement=lambda x, t: _travelling_profile(np.asarray(x) - t + 1.0),
        velocity=lambda x, t: -_travelling_slope(np.asarray(x) - t + 1.0),
        gradient=lambda x, t: _travelling_slope(np.asarray(x) - t + 1.0),
    )
    return WaveProblem(
        build_spatial_mesh(-30.0, 30.0, N_x, p_x),
        build_temporal_mesh(10.0, N_t, p_t),
        wave_speed=1.0,
        initial_displacement=lambda x: exact.displacement(x, 0.0),
        initial_velocity=lambda x: exact.velocity(x, 0.0),
        initial_displacement_dx=lambda x: exact.gradient(x, 0.0),
        exact=exact,
        name=FIG1,
    )


def _sech(z: np.ndarray) -> np.ndarray:
    return 1.0 / np.cosh(z)


def breather(gamma: float = BREATHER_GAMMA) -> ExactSolution:
    """U = 4 arctan(phi(t) sech(x / gamma)) with phi(t) = sin(t sqrt(gamma^2 - 1) / gamma) / sqrt(gamma^2 - 1)."""
    if not gamma > 1.0:
        raise DomainError(f"breather needs gamma > 1, got {gamma}")
    root = np.sqrt(gamma * gamma - 1.0)

    def phi(t):
        return np.sin(t * root / gamma) / root

    def phi_dot(t):
        return np.cos(t * root / gamma) / gamma

    def displacement(x, t):
        return 4.0 * np.arctan(phi(t) * _sech(np.asarray(x) / gamma))

    def velocity(x, t):
        s = _sech(np.asarray(x) / gamma)
        return 4.0 * phi_dot(t) * s / (1.0 + (phi(t) * s) ** 2)

    def gradient(x, t):
        z = np.asarray(x) / gamma
        s = _sech(z)
        return 4.0 * phi(t) * (-s * np.tanh(z) / gamma) / (1.0 + (phi(t) * s) ** 2)

    return ExactSolution(displacement, velocity, gradient)


def preset_fig2(N_t: int = 20, N_x: int = 40, p_t: int = 1, p_x: int = 1,
                gamma: float = BREATHER_GAMMA) -> WaveProblem:
    """Sine-Gordon breather on (-20, 20), T = 1, U0 = 0, V0 = (4 / gamma) sech(x / gamma)."""
    exact = breather(gamma)
    sample = np.linspace(-20.0, 20.0, 81)
    if np.max(np.abs(exact.displacement(sample, 0.0))) != 0.0:
        raise DataError("breather does not vanish at t = 0")
    return WaveProblem(
        build_spatial_mesh(-20.0, 20.0, N_x, p_x),
        build_temporal_mesh(1.0, N_t, p_t),
        wave_speed=1.0,
        initial_displacement=None,
        initial_velocity=lambda x: 4.0 / gamma * _sech(np.asarray(x) / gamma),
        nonlinearity=sine_gordon(1.0),
        exact=exact,
        name=FIG2,
    )


def preset_manufactured(N_t: int = 8, N_x: int = 8, p_t: int = 1, p_x: int = 1) -> WaveProblem:
    """U = sin(pi x)(cos t + sin t) on (0, 1), T = 1, with F = (pi^2 - 1) U."""
    def displacement(x, t):
        return np.sin(np.pi * np.asarray(x)) * (np.cos(t) + np.sin(t))

    exact = ExactSolution(
        displacement=displacement,
        velocity=lambda x, t: np.sin(np.pi * np.asarray(x)) * (np.cos(t) - np.sin(t)),
        gradient=lambda x, t: np.pi * np.cos(np.pi * np.asarray(x)) * (np.cos(t) + np.sin(t)),
    )
    return WaveProblem(
        build_spatial_mesh(0.0, 1.0, N_x, p_x),
        build_temporal_mesh(1.0, N_t, p_t),
        wave_speed=1.0,
        source=lambda x, t: (np.pi ** 2 - 1.0) * displacement(x, t),
        initial_displacement=lambda x: np.sin(np.pi * np.asarray(x)),
        initial_velocity=lambda x: np.sin(np.pi * np.asarray(x)),
        initial_displacement_dx=lambda x: np.pi * np.cos(np.pi * np.asarray(x)),
        exact=exact,
        name=MANUFACTURED,
    )


PRESETS: Dict[str, Callable[..., WaveProblem]] = {
    FIG1: preset_fig1,
    FIG2: preset_fig2,
    MANUFACTURED: preset_manufactured,
}

# Default refinement ladders (N_t, N_x) and their quick profiles
LADDERS: Dict[str, Ladder] = {
    FIG1: [(128, 384)],
    FIG2: [(4, 160), (8, 320), (16, 640), (32, 1280), (64, 2560)],
    MANUFACTURED: [(4, 4), (8, 8), (16, 16), (32, 32)],
}
QUICK_LADDERS: Dict[str, Ladder] = {
    FIG1: [(32, 96)],
    FIG2: [(4, 160), (8, 320), (16, 640)],
    MANUFACTURED: [(4, 4), (8, 8), (16, 16)],
}

DESCRIPTIONS = {
    FIG1: "linear travelling pulse on (-30, 30), T = 10 (energy conservation)",
    FIG2: "sine-Gordon breather on (-20, 20), T = 1 (convergence orders)",
    MANUFACTURED: "manufactured linear solution on (0, 1), T = 1 (convergence with a source)",
}


def resolve_preset(name: str) -> str:
    key = PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return key


def build_problem(name: str, N_t: int, N_x: int, p_t: int, p_x: int) -> WaveProblem:
    return PRESETS[resolve_preset(name)](N_t=N_t, N_x=N_x, p_t=p_t, p_x=p_x)
