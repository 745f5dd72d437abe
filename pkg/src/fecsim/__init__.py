"""fecsim: simulate and analyze fermion-exciton condensate states on qubits."""

from .sim import (
    Circuit,
    CountsTable,
    DensityMatrix,
    Gate,
    StateVector,
    apply_circuit,
    basis_state,
    evolve_density,
    run_circuit,
    sample_counts,
    state_from_amplitudes,
    zero_state,
)
from .prep import (
    FecAngles,
    FecTarget,
    Representation,
    SynthesisError,
    build_fec_target,
    build_psi_D,
    build_psi_G,
    dicke_circuit,
    export_qasm,
    ghz_circuit,
    layer_ghz_circuit,
    parse_qasm,
    prepare_state,
    synthesize_circuit,
)
from .rdm import (
    FockVector,
    Signatures,
    compute_1rdm,
    compute_2rdm,
    compute_modified_g,
    largest_eigenvalue,
    qubit_to_fock,
    signatures,
)

__version__ = "0.1.0"
