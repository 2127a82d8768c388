//! Two-qubit Pauli basis: `ρ = Σ c_ij σ_i ⊗ σ_j` with `σ_0 = I`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::states::DensityMatrix;

/// Real coefficients `c[i][j]`; `c[0][0] = 1/4` for unit trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    pub c: [[f64; 4]; 4],
}

impl PauliCoefficients {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i][j]
    }

    /// The 15 non-identity coefficients in `(i, j)` row-major order, skipping `(0, 0)`.
    pub fn non_identity(&self) -> [f64; 15] {
        let mut out = [0.0; 15];
        for (k, (i, j)) in non_identity_indices().enumerate() {
            out[k] = self.c[i][j];
        }
        out
    }

    pub fn from_non_identity(c00: f64, v: &[f64]) -> Self {
        assert_eq!(v.len(), 15);
        let mut c = [[0.0; 4]; 4];
        c[0][0] = c00;
        for (k, (i, j)) in non_identity_indices().enumerate() {
            c[i][j] = v[k];
        }
        Self { c }
    }
}

/// `(i, j)` pairs for the 15 non-identity basis elements.
pub fn non_identity_indices() -> impl Iterator<Item = (usize, usize)> {
    (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).skip(1)
}

/// Single-qubit Pauli matrix `σ_k`, `k ∈ {0,1,2,3}`.
pub fn pauli(k: usize) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let e = match k {
        0 => [one, z, z, one],
        1 => [z, one, one, z],
        2 => [z, -i, i, z],
        3 => [one, z, z, -one],
        _ => panic!("Pauli index {k} out of range"),
    };
    ComplexMatrix::from_dmatrix_unchecked(DMatrix::from_row_slice(2, 2, &e))
}

/// `σ_i ⊗ σ_j`.
pub fn pauli_pair(i: usize, j: usize) -> ComplexMatrix {
    pauli(i).kron(&pauli(j))
}

/// `c_ij = Tr(ρ σ_i⊗σ_j) / 4`.
pub fn pauli_decompose(rho: &DensityMatrix) -> PauliCoefficients {
    pauli_decompose_matrix(rho.matrix())
}

/// Decomposition of an arbitrary Hermitian 4×4 matrix (real parts of the traces).
pub fn pauli_decompose_matrix(m: &ComplexMatrix) -> PauliCoefficients {
    let mut c = [[0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cij) in row.iter_mut().enumerate() {
            *cij = (m * &pauli_pair(i, j)).trace().re / 4.0;
        }
    }
    PauliCoefficients { c }
}

/// `Σ c_ij σ_i ⊗ σ_j`; Hermitian for real `c`, trace `4·c[0][0]`.
pub fn pauli_compose(coeffs: &PauliCoefficients) -> ComplexMatrix {
    let mut out = DMatrix::<C64>::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let cij = coeffs.c[i][j];
            if cij != 0.0 {
                out += pauli_pair(i, j).as_dmatrix() * C64::new(cij, 0.0);
            }
        }
    }
    ComplexMatrix::from_dmatrix_unchecked(out)
}

/// Corner coherence `ρ_{↑↑,↓↓}` from Pauli coefficients.
///
/// With the standard `σ_y` this is `c11 − c22 − i(c12 + c21)`; the
/// opposite-sign expression is `ρ_{↓↓,↑↑}`. Only the sign of the imaginary
/// part depends on this choice.
pub fn corner_coherence(c: &PauliCoefficients) -> C64 {
    C64::new(c.c[1][1] - c.c[2][2], -(c.c[1][2] + c.c[2][1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_core::states::{bell_state, DD, UU};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn maximally_mixed_decomposes_to_identity_only() {
        let c = pauli_decompose(&DensityMatrix::maximally_mixed());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == 0 && j == 0 { 0.25 } else { 0.0 };
                assert!((c.c[i][j] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn down_down_coefficients() {
        let c = pauli_decompose(&DensityMatrix::basis(DD));
        // Tr(|↓↓⟩⟨↓↓| σ_i⊗σ_j)/4 = ⟨↓|σ_i|↓⟩⟨↓|σ_j|↓⟩/4; ⟨↓|σ_0|↓⟩ = 1, ⟨↓|σ_3|↓⟩ = −1.
        let diag = [1.0, 0.0, 0.0, -1.0];
        for i in 0..4 {
            for j in 0..4 {
                assert!((c.c[i][j] - diag[i] * diag[j] / 4.0).abs() < 1e-15);
            }
        }
        assert_eq!(c.c[0][3], -0.25);
        assert_eq!(c.c[3][3], 0.25);
    }

    #[test]
    fn bell_zero_coefficients() {
        let c = pauli_decompose(&bell_state(0.0));
        let mut expect = [[0.0; 4]; 4];
        expect[0][0] = 0.25;
        expect[1][1] = 0.25;
        expect[2][2] = -0.25;
        expect[3][3] = 0.25;
        for i in 0..4 {
            for j in 0..4 {
                assert!((c.c[i][j] - expect[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn compose_identity_and_xx() {
        let mut c = PauliCoefficients::default();
        c.c[0][0] = 0.25;
        let m = pauli_compose(&c);
        assert!(m.max_abs_diff(&ComplexMatrix::identity(4).scale(0.25.into())) < 1e-15);
        c.c[1][1] = 0.25;
        let m = pauli_compose(&c);
        // σx⊗σx swaps ↑↑↔↓↓ and ↑↓↔↓↑
        assert_eq!(m[(UU, DD)], C64::new(0.25, 0.0));
        assert_eq!(m[(1, 2)], C64::new(0.25, 0.0));
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.0));
        assert!((m.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn corner_coherence_matches_matrix_element() {
        let c = corner_coherence(&pauli_decompose(&bell_state(0.0)));
        assert!((c - C64::new(0.5, 0.0)).norm() < 1e-15);
        let c = corner_coherence(&pauli_decompose(&DensityMatrix::maximally_mixed()));
        assert!(c.norm() < 1e-15);
        let b = bell_state(FRAC_PI_2);
        let c = corner_coherence(&pauli_decompose(&b));
        assert!((c - b.corner()).norm() < 1e-15);
        assert!((c.norm() - 0.5).abs() < 1e-15);
        assert!((c.arg() + FRAC_PI_2).abs() < 1e-12);
        let b = bell_state(1.15 * PI);
        assert!((corner_coherence(&pauli_decompose(&b)) - b.corner()).norm() < 1e-15);
    }
}
