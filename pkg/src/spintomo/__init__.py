"""spintomo: tomographic reconstruction of spin-qubit states.

Simulates the full protocol for solid-state qubits governed by exchange
Hamiltonians (XY, XXZ, Heisenberg): compile pulse sequences, compute the
equivalent measurement of a projective |1><1| readout after each sequence,
plan a triangular set of settings covering every Bloch coefficient, sample
shot statistics, and reconstruct the density matrix by linear inversion with
optional maximum-likelihood refinement.
"""

__version__ = "0.1.0"

from .linalg import EigenSystem, evolve, herm_eigen, kron, kron_all
from .pauli import (
    PauliPolynomial,
    PauliString,
    all_strings,
    conjugate_expand,
    expand,
    pauli_mul,
    to_matrix,
)
from .states import (
    BlochVector,
    DensityMatrix,
    coefficient_count,
    density_from_json,
    density_to_json,
    fidelity,
    from_bloch,
    make_density,
    random_density,
    to_bloch,
    trace_distance,
)
from .hamiltonians import (
    ClosedFormInapplicable,
    ModelPreset,
    SpinHamiltonianSpec,
    TimingError,
    TwoQubitParams,
    build_hamiltonian,
    closed_form_pair_unitary,
    global_phase_match,
    heisenberg_pair_unitary,
    make_preset,
    pair_hamiltonian,
    solve_fixed_ez_time,
    solve_xxz_times,
    xy_pair_unitary,
)
from .pulses import (
    Gate,
    MeasurementSetting,
    PulseSequence,
    compile_sequence,
    equivalent_measurement,
    gate_axis,
    gate_pair,
    gate_rz,
    gate_ry,
    gate_x,
    gate_xbar,
    gate_y,
    gate_z,
    make_setting,
    parse_operations,
    verify_operation_table,
)
from .planner import (
    PlanningError,
    TomographyPlan,
    check_triangular,
    plan_from_json,
    plan_to_json,
    plan_tomography,
)
from .measure import (
    ShotRecord,
    exact_probability,
    exact_record,
    records_from_jsonl,
    records_to_jsonl,
    sample,
    spin_adapter,
)
from .reconstruct import (
    InversionError,
    ReconstructionResult,
    linear_invert,
    mle_refine,
    psd_project,
    reconstruct,
    result_to_json,
)
