"""Single-atom bright quantum scissors: sparse protocol simulator and herald analysis."""

from .errors import ContractViolation, InvalidInput, ResourceLimit, UndefinedFidelity
from .herald import (
    HeraldOutcome,
    HeraldPattern,
    apply_annihilation,
    bell_measure_fock,
    bqs_success_probability,
    herald_bqs,
    herald_inverse_annihilation,
    herald_neutral_bqs,
    herald_w_state,
    project,
    project_readout,
    w_success_distribution,
)
from .loss import LossConfig, LossEnsemble, lossy_herald_fidelity, run_protocol_lossy
from .protocol import ProtocolConfig, brute_force_protocol, run_iteration, run_protocol
from .sprint import SprintEventResult, cavity_pass, reinit_atom, sprint_event
from .state import (
    AtomState,
    InputSpec,
    Polarization,
    PulseTerm,
    QuantumState,
    expand_with_v,
    fidelity,
    fock_state,
    inner_product,
    make_input,
    norm,
    photon_number_distribution,
    prune,
    w_state,
)

__version__ = "0.1.0"
