//! Complex matrix kernel and two-qubit quantum algebra.

mod entanglement;
mod matrix;
mod pauli;
mod states;

pub use entanglement::{
    bell_fidelity, bell_overlap, binary_entropy, concurrence, entanglement_of_formation,
    eof_from_concurrence, EntanglementReport,
};
pub use matrix::{hermitian_eigensystem, ComplexMatrix, Eigensystem, EIGEN_MAX_ITER};
pub use pauli::{
    corner_coherence, non_identity_indices, pauli, pauli_compose, pauli_decompose,
    pauli_decompose_matrix, pauli_pair, PauliCoefficients,
};
pub use states::{
    bell_state, collective_rotate, collective_rotation_matrix, matrix_from_json, matrix_to_json,
    rotation_matrix, wrap_angle, BellClassState, DensityMatrix, Rotation, DD, DU, UD, UU,
};
