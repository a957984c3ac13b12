"""Clifford-dressed single-site TDVP for Pauli-sum spin chains."""

__version__ = "0.1.0"

from .pauli import (
    ModelParams,
    PauliString,
    PauliSum,
    build_model_hamiltonian,
    commutes,
    multiply,
    multiply_phase,
)
from .tableau import (
    CliffordTableau,
    compose,
    conjugate_pauli,
    embed,
    enumerate_two_qubit_positive,
    invert,
    synthesize_unitary,
    two_qubit_candidates,
)
from .mps import MPS, product_state
from .envs import Environments, build_environments
from .tdvp import KrylovParams, tdvp_step
from .disentangler import CoolingConfig, cooling_sweep, optimize_bond
from .dressed import (
    EvolutionConfig,
    ObservableSpec,
    conjugate_hamiltonian,
    integrated_error,
    run_dressed_evolution,
    transform_observable,
)
