"""Collective adiabatic passage in trapped-ion chains.

Sech-tanh chirped sideband pulses drive an N-ion chain up its Morris-Shore
ladder; the package simulates Fock-state creation, transition cycles, GHZ
preparation and motional superpositions at three levels of approximation.
"""

from .chain import (
    LaserGeometry,
    NormalModeData,
    equilibrium_positions,
    lamb_dicke_parameter,
    laser_phases,
    normal_modes,
    sideband_spectrum,
)
from .errors import (
    AccuracyError,
    CapacityError,
    ConfigError,
    ConvergenceError,
    DomainError,
    IonFockError,
    NumericalError,
    ProtocolAbort,
    StiffnessError,
    TrackingError,
    TruncationError,
)
from .hamiltonians import (
    ChainConfig,
    PulseSpec,
    Sideband,
    Tier,
    beyond_rwa_hamiltonian,
    collective_ld_hamiltonian,
    displacement_operator,
    full_ld_rwa_hamiltonian,
    ladder_hamiltonian,
)
from .hilbert import Basis, BasisKind, StateVector, dicke_state, fidelity, make_basis, populations
from .integrator import PropagationSettings, Trajectory, convergence_audit, propagate
from .protocols import (
    ProtocolReport,
    adiabaticity_margins,
    design_pulse,
    fock_via_blue,
    fock_via_red,
    ghz_prepare,
    heating_estimate,
    motional_superposition,
    transition_cycle,
)

__version__ = "0.1.0"
