//! Bell-class fidelity, corner coherence and Wootters entanglement measures.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::pauli::{corner_coherence, pauli_decompose, pauli_pair};
use super::states::{wrap_angle, DensityMatrix, DD, UU};
use crate::error::Result;

/// Corner coherence below this modulus leaves `best_r` undefined; it is reported as 0.
const PHASE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub fidelity: f64,
    pub best_r: f64,
    pub coherence: [f64; 2],
    pub concurrence: f64,
    pub eof: f64,
}

impl EntanglementReport {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        let (fidelity, best_r) = bell_fidelity(rho);
        let c = corner_coherence(&pauli_decompose(rho));
        let concurrence = concurrence(rho)?;
        Ok(Self {
            fidelity,
            best_r,
            coherence: [c.re, c.im],
            concurrence,
            eof: eof_from_concurrence(concurrence),
        })
    }

    pub fn coherence(&self) -> C64 {
        C64::new(self.coherence[0], self.coherence[1])
    }
}

/// `max_r ⟨E(r)|ρ|E(r)⟩` and the maximizing `r ∈ [0, 2π)`.
pub fn bell_fidelity(rho: &DensityMatrix) -> (f64, f64) {
    let corner = rho.get(UU, DD);
    let f = 0.5 * (rho.get(UU, UU).re + rho.get(DD, DD).re) + corner.norm();
    let best_r = if corner.norm() < PHASE_FLOOR { 0.0 } else { wrap_angle(-corner.arg()) };
    (f.clamp(0.0, 1.0), best_r)
}

/// Wootters concurrence.
///
/// The `λ_i` are the square roots of the eigenvalues of the Hermitian
/// `√ρ ρ̃ √ρ`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`, which share their spectrum
/// with `ρ ρ̃`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    let sqrt_rho = m.eigh()?.reconstruct_with(|x| x.max(0.0).sqrt());
    let yy = pauli_pair(2, 2);
    let tilde = &(&yy * &m.conj()) * &yy;
    let inner = (&(&sqrt_rho * &tilde) * &sqrt_rho).hermitian_part();
    let mut lam: Vec<f64> = inner.eigh()?.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// `h((1 + √(1 − C²)) / 2)`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt())).clamp(0.0, 1.0)
}

pub fn entanglement_of_formation(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `⟨E(r)|ρ|E(r)⟩` by explicit contraction.
pub fn bell_overlap(rho: &ComplexMatrix, r: f64) -> f64 {
    let ket = super::states::BellClassState { r }.ket();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += ket[i].conj() * rho[(i, j)] * ket[j];
        }
    }
    acc.re
}
