"""Unitary time stepping for ``i dpsi/dtau = -d^2 psi/dx^2 + u(x, tau) psi``.

Two independent schemes are provided so each can check the other:

* split-step Fourier (Strang splitting, spectral kinetic factor, periodic
  boundary), the production integrator;
* Crank-Nicolson (Cayley form with a central-difference Laplacian and
  Dirichlet ends), the reference.
"""
from __future__ import annotations

import enum
import math
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft
from scipy.linalg import LinAlgError, solve_banded

from .errors import ConfigurationError, NumericalFailure
from .grid import SpatialGrid, WaveField, _check_on_grid
from .potential import PotentialProvider

__all__ = [
    "StepScheme",
    "split_step",
    "crank_nicolson_step",
    "propagate",
    "MAX_DTAU",
]

MAX_DTAU = 0.1

Observer = Callable[[float, WaveField], None]


class StepScheme(str, enum.Enum):
    SPLIT_STEP = "split-step"
    CRANK_NICOLSON = "crank-nicolson"

    @classmethod
    def parse(cls, value) -> "StepScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("_", "-"))
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise ConfigurationError(
                f"unknown scheme {value!r} (expected one of: {choices})", key="scheme"
            ) from None


def _check_dtau(dtau):
    if not (isinstance(dtau, (int, float)) and math.isfinite(dtau) and dtau > 0):
        raise ConfigurationError(f"dtau must be positive, got {dtau!r}", key="dtau")


class _SplitStepper:
    """Strang splitting ``P(tau + dtau)^1/2 K P(tau)^1/2`` with adjacent half kicks fused.

    Between two calls to :meth:`advance` the field is fully synchronized,
    i.e. equal (to round-off) to repeated :func:`split_step` calls.
    """

    def __init__(self, grid: SpatialGrid, pot: PotentialProvider, dtau: float):
        self.dtau = dtau
        self.kinetic = np.exp(-1j * dtau * grid.k**2)
        self.u = pot.sampler(grid)
        self.static = bool(pot.time_independent)
        if self.static:
            u0 = self.u(0.0)
            self._half = np.exp(-0.5j * dtau * u0)
            self._full = self._half * self._half

    def _kick(self, tau, fraction):
        if self.static:
            return self._half if fraction == 0.5 else self._full
        return np.exp((-1j * fraction * self.dtau) * self.u(tau))

    def advance(self, psi: np.ndarray, tau0: float, nsteps: int) -> np.ndarray:
        if nsteps <= 0:
            return psi
        dtau = self.dtau
        kinetic = self.kinetic
        psi = psi * self._kick(tau0, 0.5)
        for s in range(1, nsteps + 1):
            psi = sfft.fft(psi, overwrite_x=True)
            psi *= kinetic
            psi = sfft.ifft(psi, overwrite_x=True)
            if s < nsteps:
                psi *= self._kick(tau0 + s * dtau, 1.0)
        psi *= self._kick(tau0 + nsteps * dtau, 0.5)
        return psi


class _CrankNicolsonStepper:
    """Cayley update ``(1 + i H dtau/2) psi' = (1 - i H dtau/2) psi``, H evaluated at the step midpoint."""

    def __init__(self, grid: SpatialGrid, pot: PotentialProvider, dtau: float):
        self.dtau = dtau
        self.u = pot.sampler(grid)
        inv_dx2 = 1.0 / grid.dx**2
        self._h = 0.5 * dtau
        self._diag_kin = 2.0 * inv_dx2
        self._off = -1j * self._h * inv_dx2
        n = grid.n_points
        self._ab = np.empty((3, n), dtype=np.complex128)

    def step(self, psi: np.ndarray, tau: float) -> np.ndarray:
        h = self._h
        d = self._diag_kin + self.u(tau + 0.5 * self.dtau)
        off = self._off
        rhs = psi * (1.0 - 1j * h * d)
        rhs[1:] -= off * psi[:-1]
        rhs[:-1] -= off * psi[1:]
        ab = self._ab
        ab[0, 0] = 0.0
        ab[0, 1:] = off
        ab[1] = 1.0 + 1j * h * d
        ab[2, :-1] = off
        ab[2, -1] = 0.0
        try:
            out = solve_banded((1, 1), ab, rhs, overwrite_ab=True,
                               overwrite_b=True, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise NumericalFailure(f"tridiagonal solve failed at tau={tau}: {exc}", tau=tau) from exc
        if not np.isfinite(out).all():
            raise NumericalFailure(f"non-finite pivot in tridiagonal solve at tau={tau}", tau=tau)
        return out

    def advance(self, psi, tau0, nsteps):
        for s in range(nsteps):
            psi = self.step(psi, tau0 + s * self.dtau)
        return psi


def _make_stepper(scheme, grid, pot, dtau):
    if StepScheme.parse(scheme) is StepScheme.SPLIT_STEP:
        return _SplitStepper(grid, pot, dtau)
    return _CrankNicolsonStepper(grid, pot, dtau)


def _finite_or_fail(psi, tau):
    if not np.isfinite(psi).all():
        raise NumericalFailure(f"non-finite amplitudes at tau={tau:.6g}", tau=tau)


def split_step(field: WaveField, grid: SpatialGrid, pot: PotentialProvider,
               tau: float, dtau: float) -> WaveField:
    """One Strang step from ``tau`` to ``tau + dtau``."""
    _check_on_grid(field, grid)
    _check_dtau(dtau)
    psi = _SplitStepper(grid, pot, dtau).advance(np.array(field.amplitudes), tau, 1)
    _finite_or_fail(psi, tau + dtau)
    return WaveField(psi, tau + dtau)


def crank_nicolson_step(field: WaveField, grid: SpatialGrid, pot: PotentialProvider,
                        tau: float, dtau: float) -> WaveField:
    """One Crank-Nicolson step from ``tau`` to ``tau + dtau``."""
    _check_on_grid(field, grid)
    _check_dtau(dtau)
    psi = _CrankNicolsonStepper(grid, pot, dtau).step(np.array(field.amplitudes), tau)
    return WaveField(psi, tau + dtau)


def _cadence_steps(every, dtau):
    ratio = every / dtau
    steps = int(round(ratio))
    if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(
            f"observation cadence {every} is not a whole multiple of dtau={dtau}",
            key="record_stride_tau",
        )
    return steps


def propagate(field: WaveField, grid: SpatialGrid, pot: PotentialProvider,
              scheme=StepScheme.SPLIT_STEP, tau_end: float = None, dtau: float = 0.002,
              observer: Optional[Observer] = None, every: Optional[float] = None) -> WaveField:
    """Advance ``field`` from ``field.tau`` to ``tau_end``.

    Step times are computed as ``tau0 + s * dtau`` rather than accumulated.
    If ``dtau`` does not divide the interval, the last step is shortened to
    land on ``tau_end``.

    ``observer(tau, field)`` is called at the start, every ``every`` units of
    tau (which must be a whole number of steps), and at ``tau_end``.  With
    ``every=None`` it is called only at the start and the end.
    """
    _check_on_grid(field, grid)
    _check_dtau(dtau)
    if dtau >= MAX_DTAU:
        raise ConfigurationError(f"dtau={dtau} too large (must be < {MAX_DTAU})", key="dtau")
    tau0 = field.tau
    if tau_end is None or not math.isfinite(tau_end):
        raise ConfigurationError(f"tau_end must be finite, got {tau_end!r}", key="tau_end")
    if tau_end < tau0:
        raise ConfigurationError(f"tau_end={tau_end} precedes field time {tau0}", key="tau_end")
    if tau_end == tau0:
        return field
    scheme = StepScheme.parse(scheme)

    span = tau_end - tau0
    n_full = int(math.floor(span / dtau + 1e-9))
    remainder = tau_end - (tau0 + n_full * dtau)
    if remainder <= 1e-12 * max(1.0, abs(tau_end)):
        remainder = 0.0
    stride = _cadence_steps(every, dtau) if every is not None else max(n_full, 1)

    stepper = _make_stepper(scheme, grid, pot, dtau)
    psi = np.array(field.amplitudes)
    if observer is not None:
        observer(tau0, field)

    done = 0
    while done < n_full:
        chunk = min(stride, n_full - done)
        psi = stepper.advance(psi, tau0 + done * dtau, chunk)
        done += chunk
        at_end = done == n_full and remainder == 0.0
        tau = tau_end if at_end else tau0 + done * dtau
        _finite_or_fail(psi, tau)
        if observer is not None and (at_end or done % stride == 0):
            observer(tau, WaveField(psi, tau))

    if remainder > 0.0:
        last = _make_stepper(scheme, grid, pot, remainder)
        psi = last.advance(psi, tau0 + n_full * dtau, 1)
        _finite_or_fail(psi, tau_end)
        if observer is not None:
            observer(tau_end, WaveField(psi, tau_end))
    return WaveField(psi, tau_end)
