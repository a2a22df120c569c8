"""Single runs and modulation-frequency scans."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DWTunnelError
from .grid import SpatialGrid, WaveField, gaussian_packet
from .observables import ObservableSample, TunnelingMetrics, measure, tunneling_metrics
from .potential import DEFAULT_ALPHA, DEFAULT_BETA, DrivePotential
from .propagator import MAX_DTAU, StepScheme, propagate

__all__ = [
    "GridSpec",
    "InitialSpec",
    "RunConfig",
    "RunRecord",
    "ScanRecord",
    "run_simulation",
    "scan_epsilon",
]

logger = logging.getLogger(__name__)

_TOL = 1e-9


def _real(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"{name} must be a finite number, got {value!r}", key=name)
    return float(value)


@dataclass(frozen=True)
class GridSpec:
    x_max: float = 16.0
    n_points: int = 2048

    def build(self) -> SpatialGrid:
        return SpatialGrid(self.x_max, self.n_points)


@dataclass(frozen=True)
class InitialSpec:
    well: str = "left"
    width: float = 1.0

    def __post_init__(self):
        if self.well not in ("left", "right"):
            raise ConfigurationError(
                f"initial.well must be 'left' or 'right', got {self.well!r}", key="initial.well"
            )
        width = _real("initial.width", self.width)
        if width <= 0:
            raise ConfigurationError(f"initial.width must be positive, got {width}", key="initial.width")
        object.__setattr__(self, "width", width)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one simulation.

    ``snapshot_taus=None`` selects five evenly spaced snapshots
    ``0, tau_max/4, ..., tau_max``; an empty tuple disables snapshots.
    """

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    epsilon: float = 0.0
    tau_max: float = 2500.0
    dtau: float = 0.002
    grid: GridSpec = field(default_factory=GridSpec)
    scheme: StepScheme = StepScheme.SPLIT_STEP
    record_stride_tau: float = 0.5
    snapshot_taus: Optional[Tuple[float, ...]] = None
    initial: InitialSpec = field(default_factory=InitialSpec)

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon", "tau_max", "dtau", "record_stride_tau"):
            object.__setattr__(self, name, _real(name, getattr(self, name)))
        object.__setattr__(self, "scheme", StepScheme.parse(self.scheme))
        if isinstance(self.grid, dict):
            object.__setattr__(self, "grid", GridSpec(**self.grid))
        if isinstance(self.initial, dict):
            object.__setattr__(self, "initial", InitialSpec(**self.initial))
        if self.tau_max <= 0:
            raise ConfigurationError(f"tau_max must be positive, got {self.tau_max}", key="tau_max")
        if self.dtau <= 0:
            raise ConfigurationError(f"dtau must be positive, got {self.dtau}", key="dtau")
        if self.dtau >= MAX_DTAU:
            raise ConfigurationError(f"dtau must be < {MAX_DTAU}, got {self.dtau}", key="dtau")
        if self.record_stride_tau < self.dtau:
            raise ConfigurationError(
                f"record_stride_tau ({self.record_stride_tau}) must be >= dtau ({self.dtau})",
                key="record_stride_tau",
            )
        ratio = self.record_stride_tau / self.dtau
        if abs(ratio - round(ratio)) > _TOL * ratio:
            raise ConfigurationError(
                f"record_stride_tau ({self.record_stride_tau}) must be a whole multiple of dtau ({self.dtau})",
                key="record_stride_tau",
            )
        if self.snapshot_taus is not None:
            snaps = tuple(_real("snapshot_taus", s) for s in self.snapshot_taus)
            for s in snaps:
                if not -_TOL <= s <= self.tau_max + _TOL:
                    raise ConfigurationError(
                        f"snapshot tau {s} outside [0, {self.tau_max}]", key="snapshot_taus"
                    )
            object.__setattr__(self, "snapshot_taus", tuple(sorted(set(snaps))))
        # builds and validates the grid and the potential
        self.grid.build()
        self.potential()

    def potential(self) -> DrivePotential:
        return DrivePotential(self.alpha, self.beta, self.epsilon)

    def snapshot_times(self) -> Tuple[float, ...]:
        if self.snapshot_taus is None:
            return tuple(self.tau_max * q / 4.0 for q in range(5))
        return self.snapshot_taus

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "tau_max": self.tau_max,
            "dtau": self.dtau,
            "grid": {"x_max": self.grid.x_max, "n_points": self.grid.n_points},
            "scheme": self.scheme.value,
            "record_stride_tau": self.record_stride_tau,
            "snapshot_taus": list(self.snapshot_times()),
            "initial": {"well": self.initial.well, "width": self.initial.width},
        }


@dataclass
class RunRecord:
    config: RunConfig
    samples: List[ObservableSample]
    snapshots: Dict[float, WaveField]
    metrics: TunnelingMetrics
    wall_time: float

    @property
    def grid(self) -> SpatialGrid:
        return self.config.grid.build()

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])

    @property
    def barrier_height(self) -> float:
        return self.config.potential().barrier_height()


@dataclass(frozen=True)
class ScanRecord:
    epsilon: float
    metrics: Optional[TunnelingMetrics]
    final_energy: float
    status: str = "ok"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def initial_state(config: RunConfig, grid: SpatialGrid) -> WaveField:
    left, right = config.potential().well_minima(0.0)
    center = float(left if config.initial.well == "left" else right)
    return gaussian_packet(grid, center, config.initial.width)


def run_simulation(config: RunConfig) -> RunRecord:
    """Propagate the Gaussian from its well to ``tau_max``, recording observables."""
    grid = config.grid.build()
    pot = config.potential()
    u_at = pot.sampler(grid)
    psi0 = initial_state(config, grid)

    samples: List[ObservableSample] = []
    snapshots: Dict[float, WaveField] = {}
    pending = list(config.snapshot_times())

    def observe(tau, wf):
        samples.append(measure(wf, grid, pot, tau, u=u_at(tau)))
        while pending and tau >= pending[0] - _TOL:
            snapshots[pending.pop(0)] = wf

    start = time.perf_counter()
    propagate(psi0, grid, pot, config.scheme, config.tau_max, config.dtau,
              observer=observe, every=config.record_stride_tau)
    wall = time.perf_counter() - start
    logger.info("run eps=%g finished in %.1fs (%d samples)", config.epsilon, wall, len(samples))
    return RunRecord(
        config=config,
        samples=samples,
        snapshots=snapshots,
        metrics=tunneling_metrics(samples),
        wall_time=wall,
    )


def _scan_point(config: RunConfig) -> ScanRecord:
    try:
        rec = run_simulation(config)
    except (DWTunnelError, ArithmeticError, ValueError) as exc:
        logger.warning("scan point eps=%g failed: %s", config.epsilon, exc)
        return ScanRecord(config.epsilon, None, math.nan, status="failed", error=str(exc))
    return ScanRecord(config.epsilon, rec.metrics, rec.samples[-1].energy_total)


def scan_epsilon(base: RunConfig, epsilons: Sequence[float], jobs: int = 1) -> List[ScanRecord]:
    """One run per drive frequency; results come back in input order.

    Runs that fail (bad epsilon, numerical blow-up) become ``status="failed"``
    entries instead of aborting the scan.  ``jobs > 1`` spreads runs over a
    process pool.
    """
    epsilons = list(epsilons)
    if not epsilons:
        raise ConfigurationError("epsilon list is empty", key="epsilons")
    if jobs < 1:
        raise ConfigurationError(f"jobs must be >= 1, got {jobs}", key="jobs")

    configs: List[Optional[RunConfig]] = []
    records: List[Optional[ScanRecord]] = []
    for eps in epsilons:
        try:
            configs.append(replace(base, epsilon=eps, snapshot_taus=()))
            records.append(None)
        except ConfigurationError as exc:
            configs.append(None)
            records.append(ScanRecord(float(eps), None, math.nan, status="failed", error=str(exc)))

    todo = [i for i, c in enumerate(configs) if c is not None]
    if jobs == 1 or len(todo) <= 1:
        for i in todo:
            records[i] = _scan_point(configs[i])
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(todo))) as pool:
            for i, rec in zip(todo, pool.map(_scan_point, [configs[i] for i in todo])):
                records[i] = rec
    return records
