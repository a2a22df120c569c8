"""Measurements on wave fields and on recorded time series.

Energies are in units of the zero-point energy ``hbar omega0 / 2``; the
potential includes the ``b^2 / 4a`` offset so the well bottoms sit at zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.fft as sfft

from .errors import DomainError
from .grid import SpatialGrid, WaveField, _check_on_grid, norm
from .potential import PotentialProvider

__all__ = [
    "ObservableSample",
    "TunnelingMetrics",
    "prob_left",
    "prob_right",
    "mean_position",
    "spectral_derivative",
    "energy_density",
    "total_energy",
    "potential_energy",
    "kinetic_energy",
    "measure",
    "count_transfer_cycles",
    "first_passage_time",
    "tunneling_metrics",
]


@dataclass(frozen=True)
class ObservableSample:
    tau: float
    norm: float
    prob_left: float
    prob_right: float
    mean_x: float
    energy_total: float
    energy_potential: float


@dataclass(frozen=True)
class TunnelingMetrics:
    max_prob_right: float
    first_passage_tau: Optional[float]
    transfer_cycles: int


def _side_weights(grid: SpatialGrid) -> np.ndarray:
    # node exactly at x = 0 is split evenly between the wells
    x = grid.nodes
    w = (x < 0).astype(float)
    w[x == 0] = 0.5
    return w


def prob_left(field: WaveField, grid: SpatialGrid) -> float:
    _check_on_grid(field, grid)
    return float(np.dot(_side_weights(grid), field.density()) * grid.dx)


def prob_right(field: WaveField, grid: SpatialGrid) -> float:
    _check_on_grid(field, grid)
    return float(np.dot(1.0 - _side_weights(grid), field.density()) * grid.dx)


def mean_position(field: WaveField, grid: SpatialGrid) -> float:
    nrm = norm(field, grid)
    if not nrm > 0:
        raise DomainError("mean position of a zero field is undefined")
    return float(np.dot(grid.nodes, field.density()) * grid.dx / nrm)


def spectral_derivative(field: WaveField, grid: SpatialGrid) -> np.ndarray:
    """d psi / dx by multiplying with ``i k`` in Fourier space.

    The Nyquist mode has no well-defined derivative on an even grid and is
    dropped.
    """
    _check_on_grid(field, grid)
    ik = 1j * np.array(grid.k)
    ik[grid.n_points // 2] = 0.0
    return sfft.ifft(ik * sfft.fft(field.amplitudes))


def energy_density(field: WaveField, grid: SpatialGrid, pot: PotentialProvider,
                   tau: float) -> np.ndarray:
    """Per-node ``|dpsi/dx|^2 + u(x, tau) |psi|^2``."""
    dpsi = spectral_derivative(field, grid)
    return np.abs(dpsi) ** 2 + pot.sample(grid, tau) * field.density()


def total_energy(field, grid, pot, tau) -> float:
    return float(np.sum(energy_density(field, grid, pot, tau)) * grid.dx)


def potential_energy(field, grid, pot, tau) -> float:
    _check_on_grid(field, grid)
    return float(np.dot(pot.sample(grid, tau), field.density()) * grid.dx)


def kinetic_energy(field, grid) -> float:
    return float(np.sum(np.abs(spectral_derivative(field, grid)) ** 2) * grid.dx)


def measure(field: WaveField, grid: SpatialGrid, pot: PotentialProvider,
            tau: Optional[float] = None, u: Optional[np.ndarray] = None) -> ObservableSample:
    """All per-sample observables in one pass.

    ``u`` may carry pre-sampled potential values at ``tau``.
    """
    _check_on_grid(field, grid)
    tau = field.tau if tau is None else tau
    if u is None:
        u = pot.sample(grid, tau)
    rho = field.density()
    dx = grid.dx
    total = float(np.sum(rho) * dx)
    left = float(np.dot(_side_weights(grid), rho) * dx)
    e_pot = float(np.dot(u, rho) * dx)
    e_kin = float(np.sum(np.abs(spectral_derivative(field, grid)) ** 2) * dx)
    mean_x = float(np.dot(grid.nodes, rho) * dx / total) if total > 0 else math.nan
    return ObservableSample(
        tau=float(tau),
        norm=total,
        prob_left=left,
        prob_right=total - left,
        mean_x=mean_x,
        energy_total=e_kin + e_pot,
        energy_potential=e_pot,
    )


def _series_arrays(series) -> Tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(series), dtype=float)
    if arr.size == 0:
        return np.empty(0), np.empty(0)
    if arr.ndim == 1:
        # bare values: use their index as time
        return np.arange(arr.size, dtype=float), arr
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("series must be a sequence of (tau, value) pairs")
    return arr[:, 0], arr[:, 1]


def count_transfer_cycles(series: Iterable, up_threshold: float = 0.5,
                          rearm_threshold: float = 0.4) -> int:
    """Count upward crossings of ``up_threshold`` with hysteresis.

    After a crossing the counter only re-arms once the signal has dropped
    below ``rearm_threshold``.  ``series`` holds ``(tau, prob_right)`` pairs
    sorted by tau (a plain sequence of values is also accepted).
    """
    if not 0 < rearm_threshold < up_threshold < 1:
        raise DomainError(
            "thresholds must satisfy 0 < rearm_threshold < up_threshold < 1, "
            f"got {rearm_threshold}, {up_threshold}"
        )
    taus, values = _series_arrays(series)
    if np.any(np.diff(taus) < 0):
        raise DomainError("series must be sorted by tau")
    cycles = 0
    armed = True
    for v in values:
        if armed and v >= up_threshold:
            cycles += 1
            armed = False
        elif not armed and v < rearm_threshold:
            armed = True
    return cycles


def first_passage_time(series: Iterable, threshold: float = 0.5) -> Optional[float]:
    taus, values = _series_arrays(series)
    if np.any(np.diff(taus) < 0):
        raise DomainError("series must be sorted by tau")
    hits = np.flatnonzero(values >= threshold)
    return float(taus[hits[0]]) if hits.size else None


def tunneling_metrics(samples: Sequence[ObservableSample]) -> TunnelingMetrics:
    series = [(s.tau, s.prob_right) for s in samples]
    max_right = max((s.prob_right for s in samples), default=0.0)
    return TunnelingMetrics(
        max_prob_right=float(max_right),
        first_passage_tau=first_passage_time(series),
        transfer_cycles=count_transfer_cycles(series),
    )
