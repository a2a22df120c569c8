"""Wave-packet tunneling in a biquadratic double well with breathing minima."""

from .errors import ConfigurationError, DomainError, DWTunnelError, NumericalFailure
from .grid import (
    PhysicalScales,
    SpatialGrid,
    WaveField,
    gaussian_packet,
    make_grid,
    norm,
    normalize,
    physical_length,
    wavenumbers,
)
from .potential import DrivePotential, HarmonicPotential, PotentialProvider, ZeroPotential
from .propagator import StepScheme, crank_nicolson_step, propagate, split_step
from .observables import (
    ObservableSample,
    TunnelingMetrics,
    count_transfer_cycles,
    energy_density,
    first_passage_time,
    mean_position,
    potential_energy,
    prob_left,
    prob_right,
    total_energy,
)
from .experiment import RunConfig, RunRecord, ScanRecord, run_simulation, scan_epsilon

__version__ = "0.1.0"
