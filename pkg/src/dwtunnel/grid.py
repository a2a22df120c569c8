"""Spatial grid, wave fields and unit scales.

All computation happens in dimensionless form: lengths in units of the
oscillator length ``xi = sqrt(hbar / (m * omega0))`` and time ``tau =
omega0 * t / 2``.  The grid is periodic on ``[-x_max, x_max)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "SpatialGrid",
    "WaveField",
    "PhysicalScales",
    "make_grid",
    "wavenumbers",
    "gaussian_packet",
    "norm",
    "normalize",
    "physical_length",
]

MIN_POINTS = 16


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid ``x_j = -x_max + j * dx``, ``j = 0 .. n_points - 1``."""

    x_max: float
    n_points: int

    def __post_init__(self):
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points:
            raise ConfigurationError(
                f"n_points must be an integer, got {self.n_points!r}", key="n_points"
            )
        object.__setattr__(self, "n_points", int(self.n_points))
        if not (math.isfinite(self.x_max) and self.x_max > 0):
            raise ConfigurationError(f"x_max must be positive, got {self.x_max!r}", key="x_max")
        if self.n_points < MIN_POINTS or not _is_power_of_two(self.n_points):
            raise ConfigurationError(
                f"n_points must be a power of two >= {MIN_POINTS}, got {self.n_points}",
                key="n_points",
            )
        object.__setattr__(self, "x_max", float(self.x_max))

    @property
    def dx(self) -> float:
        return 2.0 * self.x_max / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        x = _nodes(self.x_max, self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        k = _wavenumbers(self.x_max, self.n_points)
        k.setflags(write=False)
        return k


def make_grid(x_max: float, n_points: int) -> SpatialGrid:
    return SpatialGrid(x_max, n_points)


# the raw formulas below skip grid validation so they also work for tiny n
def _nodes(x_max: float, n: int) -> np.ndarray:
    return -x_max + (2.0 * x_max / n) * np.arange(n)


def _wavenumbers(x_max: float, n: int) -> np.ndarray:
    m = np.fft.fftfreq(n, d=1.0 / n)
    return (math.pi / x_max) * m


def wavenumbers(grid: SpatialGrid) -> np.ndarray:
    """Angular wavenumbers in FFT ordering: ``(pi / x_max) * [0, 1, ..., n/2-1, -n/2, ..., -1]``."""
    return np.array(grid.k)


@dataclass(frozen=True, eq=False)
class WaveField:
    """Samples of the wave function on a grid at dimensionless time ``tau``.

    The amplitude array is stored read-only; operations return new fields.
    """

    amplitudes: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128)
        if amp.ndim != 1:
            raise DomainError("amplitudes must be one-dimensional")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "tau", float(self.tau))

    def __len__(self):
        return self.amplitudes.shape[0]

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy_with(self, amplitudes=None, tau=None) -> "WaveField":
        return WaveField(
            self.amplitudes if amplitudes is None else amplitudes,
            self.tau if tau is None else tau,
        )


def _check_on_grid(wf: WaveField, grid: SpatialGrid):
    if len(wf) != grid.n_points:
        raise DomainError(
            f"field has {len(wf)} amplitudes but grid has {grid.n_points} nodes"
        )


def gaussian_packet(grid: SpatialGrid, center: float, width: float = 1.0) -> WaveField:
    """Normalized Gaussian ``pi^-1/4 width^-1/2 exp(-(x - center)^2 / (2 width^2))``.

    With ``width = 1`` this is the oscillator ground state displaced to
    ``center``.  The result is renormalized on the discrete grid.
    """
    if not width > 0:
        raise DomainError(f"width must be positive, got {width!r}")
    if abs(center) + 4.0 * width >= grid.x_max:
        raise DomainError(
            f"packet at {center} with width {width} does not fit inside "
            f"[-{grid.x_max}, {grid.x_max}) (needs |center| + 4*width < x_max)"
        )
    x = grid.nodes
    amp = math.pi ** -0.25 / math.sqrt(width) * np.exp(-((x - center) ** 2) / (2.0 * width**2))
    return normalize(WaveField(amp.astype(np.complex128), 0.0), grid)


def norm(field: WaveField, grid: SpatialGrid) -> float:
    """Rectangle-rule integral of ``|psi|^2`` (exact for the periodic grid)."""
    _check_on_grid(field, grid)
    return float(np.sum(field.density()) * grid.dx)


def normalize(field: WaveField, grid: SpatialGrid) -> WaveField:
    nrm = norm(field, grid)
    if not nrm > 0:
        raise DomainError("cannot normalize a zero field")
    return field.copy_with(amplitudes=field.amplitudes / math.sqrt(nrm))


@dataclass(frozen=True)
class PhysicalScales:
    """Dimensional unit system behind the dimensionless variables.

    ``xi`` is the oscillator length, ``period_T`` the bare oscillation period
    and ``zero_point_energy`` the energy unit ``hbar * omega0 / 2``.
    """

    hbar: float = 1.0
    mass: float = 1.0
    omega0: float = 1.0
    xi: float = field(init=False)
    period_T: float = field(init=False)
    zero_point_energy: float = field(init=False)

    def __post_init__(self):
        for name in ("hbar", "mass", "omega0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"{name} must be positive, got {v!r}", key=name)
        object.__setattr__(self, "xi", math.sqrt(self.hbar / (self.mass * self.omega0)))
        object.__setattr__(self, "period_T", 2.0 * math.pi / self.omega0)
        object.__setattr__(self, "zero_point_energy", 0.5 * self.hbar * self.omega0)

    @classmethod
    def from_xi(cls, xi: float) -> "PhysicalScales":
        """Scales with ``hbar = omega0 = 1`` and mass chosen to give ``xi``."""
        return cls(hbar=1.0, mass=1.0 / xi**2, omega0=1.0)

    @property
    def zero_point_sd(self) -> float:
        """Ground-state position spread ``delta x0 = xi / sqrt(2)``."""
        return self.xi / math.sqrt(2.0)

    def physical_time(self, tau: float) -> float:
        return 2.0 * tau / self.omega0

    def physical_energy(self, energy: float) -> float:
        return energy * self.zero_point_energy


def physical_length(scales: PhysicalScales, x_tilde: float) -> float:
    return x_tilde * scales.xi
