"""Time-periodic biquadratic double well and other potential providers.

In dimensionless units the drive is

    a(tau) = (alpha - beta cos(eps tau)) / (2 sqrt(alpha))
    b(tau) = sqrt(alpha - beta cos(eps tau)) / (2 sqrt(alpha))
    u(x, tau) = a x^4 - b x^2 + b^2 / (4 a)

so ``b^2 / (4 a) = 1 / (8 sqrt(alpha))`` for every tau: the barrier stays put
while the two minima ``+-sqrt(b / (2 a))`` breathe in and out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .grid import SpatialGrid

__all__ = [
    "PotentialProvider",
    "DrivePotential",
    "ZeroPotential",
    "HarmonicPotential",
    "DEFAULT_ALPHA",
    "DEFAULT_BETA",
]

DEFAULT_ALPHA = 0.0005
DEFAULT_BETA = 0.0001


class PotentialProvider:
    """Maps ``(grid, tau)`` to real potential samples on the grid nodes.

    Subclasses implement :meth:`sample`.  ``time_independent`` lets the
    propagator reuse one phase factor for the whole run.
    """

    time_independent = False

    def sample(self, grid: SpatialGrid, tau: float) -> np.ndarray:
        raise NotImplementedError

    def sampler(self, grid: SpatialGrid) -> Callable[[float], np.ndarray]:
        return lambda tau: self.sample(grid, tau)


@dataclass(frozen=True)
class ZeroPotential(PotentialProvider):
    time_independent = True

    def sample(self, grid, tau):
        return np.zeros(grid.n_points)


@dataclass(frozen=True)
class HarmonicPotential(PotentialProvider):
    """``u = omega^2 x^2``; with ``omega = 1`` its ground state is ``pi^-1/4 exp(-x^2/2)`` at energy 1."""

    omega: float = 1.0
    time_independent = True

    def sample(self, grid, tau):
        return self.omega**2 * grid.nodes**2


@dataclass(frozen=True)
class DrivePotential(PotentialProvider):
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigurationError(f"{name} must be a finite real, got {v!r}", key=name)
            object.__setattr__(self, name, float(v))
        if self.alpha <= 0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}", key="alpha")
        if not 0 <= self.beta < self.alpha:
            raise ConfigurationError(
                f"beta must satisfy 0 <= beta < alpha, got beta={self.beta}, alpha={self.alpha}",
                key="beta",
            )
        if self.epsilon < 0:
            raise ConfigurationError(f"epsilon must be >= 0, got {self.epsilon}", key="epsilon")

    @property
    def time_independent(self):
        return self.beta == 0 or self.epsilon == 0

    def _stretch(self, tau):
        # alpha - beta cos(eps tau), strictly positive by the beta < alpha invariant
        return self.alpha - self.beta * np.cos(self.epsilon * tau)

    def coeff_a(self, tau):
        return self._stretch(tau) / (2.0 * math.sqrt(self.alpha))

    def coeff_b(self, tau):
        return np.sqrt(self._stretch(tau)) / (2.0 * math.sqrt(self.alpha))

    def barrier_height(self) -> float:
        return 1.0 / (8.0 * math.sqrt(self.alpha))

    def well_minima(self, tau=0.0):
        """``(-x_m, +x_m)`` with ``x_m = sqrt(b / (2a)) = (alpha - beta cos(eps tau))^(-1/4) / sqrt(2)``."""
        xm = np.sqrt(self.coeff_b(tau) / (2.0 * self.coeff_a(tau)))
        return -xm, xm

    def value(self, x, tau):
        a = self.coeff_a(tau)
        b = self.coeff_b(tau)
        x2 = np.square(x)
        return a * x2 * x2 - b * x2 + b * b / (4.0 * a)

    def sample(self, grid, tau):
        return self.value(grid.nodes, tau)

    def sampler(self, grid):
        x2 = grid.nodes**2
        x4 = x2 * x2
        alpha, beta, eps = self.alpha, self.beta, self.epsilon
        scale = 2.0 * math.sqrt(alpha)

        def _u(tau):
            s = alpha - beta * math.cos(eps * tau)
            a = s / scale
            b = math.sqrt(s) / scale
            return a * x4 - b * x2 + b * b / (4.0 * a)

        return _u

    def period(self) -> float:
        return 2.0 * math.pi / self.epsilon if self.epsilon > 0 else math.inf


# functional spellings of the DrivePotential methods


def coeff_a(p: DrivePotential, tau):
    return p.coeff_a(tau)


def coeff_b(p: DrivePotential, tau):
    return p.coeff_b(tau)


def potential_value(p: DrivePotential, x_tilde, tau):
    return p.value(x_tilde, tau)


def barrier_height(p: DrivePotential) -> float:
    return p.barrier_height()


def well_minima(p: DrivePotential, tau=0.0):
    return p.well_minima(tau)


def sample_potential(p: PotentialProvider, grid: SpatialGrid, tau: float) -> np.ndarray:
    return p.sample(grid, tau)
