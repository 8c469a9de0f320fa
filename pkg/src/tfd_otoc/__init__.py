"""Out-of-time-order correlators of a transverse-field Ising chain measured on a
thermofield-double state, simulated on a statevector with optional Pauli noise."""

from .errors import (
    ArgumentError,
    CapacityError,
    ConfigError,
    ConsistencyError,
    DegeneracyError,
    NumericalError,
    OtocError,
    PostselectionStarvedError,
    ReferenceNotFoundError,
)
from .noise import NoiseModel
from .protocol import (
    Evolution,
    OtocExperiment,
    OtocSeries,
    PrepMode,
    TrotterSchedule,
    decay_rate,
    run_experiment,
    temperature_sweep,
)
from .spinchain import (
    TEMPERATURE_GRID,
    Temperature,
    TfimParams,
    build_hamiltonian,
    diagonalize,
    exact_otoc,
    exact_tfd_state,
)
from .statevector import Circuit, GateOp, PauliString, StateVector
from .tfd import Layout, OptimizerConfig, TfdAnsatz, TfdParameters, optimize_tfd, reference_parameters

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
