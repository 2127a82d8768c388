//! Two-qubit states, collective rotations and the Bell class `|E(r)⟩`.
//!
//! Basis order is `(↑↑, ↑↓, ↓↑, ↓↓)`, single-qubit order `(↑, ↓)` and
//! `σ_z|↑⟩ = +|↑⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = -1e-10;

pub const UU: usize = 0;
pub const UD: usize = 1;
pub const DU: usize = 2;
pub const DD: usize = 3;

/// Valid two-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::ContractViolation(format!(
                "density matrix must be 4x4, got {}x{}",
                m.dim(),
                m.dim()
            )));
        }
        let herr = m.hermiticity_error();
        if herr > HERMITIAN_TOL {
            return Err(Error::ContractViolation(format!("not Hermitian (error {herr:.3e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::ContractViolation(format!("trace {tr} differs from 1")));
        }
        let eig = m.eigh()?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return Err(Error::ContractViolation(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.dim() == 4);
        debug_assert!(m.is_hermitian(1e-9), "asymmetry {}", m.hermiticity_error());
        debug_assert!((m.trace().re - 1.0).abs() < 1e-9, "trace {}", m.trace());
        Self(m.hermitian_part())
    }

    pub fn from_entries(entries: [[C64; 4]; 4]) -> Result<Self> {
        Self::new(ComplexMatrix::new(4, entries.iter().flatten().copied().collect())?)
    }

    pub fn pure(psi: [C64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ContractViolation("state vector has zero norm".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        let m = DMatrix::from_fn(4, 4, |i, j| v[i] * v[j].conj());
        Ok(Self::from_trusted(ComplexMatrix::from_dmatrix_unchecked(m)))
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(k: usize) -> Self {
        let mut d = [C64::new(0.0, 0.0); 4];
        d[k] = C64::new(1.0, 0.0);
        Self::from_trusted(ComplexMatrix::from_diagonal(&d))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_trusted(ComplexMatrix::identity(4).scale(C64::new(0.25, 0.0)))
    }

    /// Convex combination `w·a + (1−w)·b`.
    pub fn mix(a: &Self, b: &Self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::ContractViolation(format!("mixing weight {w} outside [0, 1]")));
        }
        Ok(Self::from_trusted(
            &a.0.scale(C64::new(w, 0.0)) + &b.0.scale(C64::new(1.0 - w, 0.0)),
        ))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Diagonal populations in basis order.
    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.0[(k, k)].re)
    }

    /// `ρ_{↑↑,↓↓}`.
    pub fn corner(&self) -> C64 {
        self.0[(UU, DD)]
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.0.eigh()?.values.last().copied().unwrap_or(0.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

/// Single-qubit rotation through `theta` about the equatorial axis at azimuth `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub theta: f64,
    pub phi: f64,
}

impl Rotation {
    /// Reduces both angles into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta: wrap_angle(theta), phi: wrap_angle(phi) }
    }

    /// `exp(−i(θ/2)(cos φ σ_x + sin φ σ_y))`.
    pub fn matrix(&self) -> ComplexMatrix {
        rotation_matrix(*self)
    }
}

pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU { 0.0 } else { w }
}

/// `exp(−i(θ/2)(cos φ σ_x + sin φ σ_y))` as a 2×2 unitary.
pub fn rotation_matrix(rot: Rotation) -> ComplexMatrix {
    let (s, c) = (rot.theta / 2.0).sin_cos();
    let off = C64::new(0.0, -s);
    let e = C64::from_polar(1.0, rot.phi);
    ComplexMatrix::from_dmatrix_unchecked(DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), off * e.conj(), off * e, C64::new(c, 0.0)],
    ))
}

/// `R ⊗ R` for the collective rotation.
pub fn collective_rotation_matrix(rot: Rotation) -> ComplexMatrix {
    let r = rotation_matrix(rot);
    r.kron(&r)
}

/// `(R⊗R) ρ (R⊗R)†`.
pub fn collective_rotate(rho: &DensityMatrix, rot: Rotation) -> DensityMatrix {
    let u = collective_rotation_matrix(rot);
    DensityMatrix::from_trusted(rho.0.conjugate_by(&u))
}

/// Member `r` of the Bell class, reduced into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellClassState {
    pub r: f64,
}

impl BellClassState {
    pub fn new(r: f64) -> Self {
        Self { r: wrap_angle(r) }
    }

    pub fn ket(&self) -> [C64; 4] {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        [h, z, z, C64::from_polar(FRAC_1_SQRT_2, self.r)]
    }

    pub fn density(&self) -> DensityMatrix {
        bell_state(self.r)
    }
}

/// `|E(r)⟩⟨E(r)|` with `|E(r)⟩ = (|↑↑⟩ + e^{ir}|↓↓⟩)/√2`, so `ρ_{↑↑,↓↓} = e^{−ir}/2`.
pub fn bell_state(r: f64) -> DensityMatrix {
    let ket = BellClassState::new(r).ket();
    let m = DMatrix::from_fn(4, 4, |i, j| ket[i] * ket[j].conj());
    DensityMatrix::from_trusted(ComplexMatrix::from_dmatrix_unchecked(m))
}

/// JSON layout: nested `dim × dim` array of `[re, im]`, row-major.
pub fn matrix_to_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::ContractViolation("matrix JSON must be square".into()));
    }
    let entries = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    ComplexMatrix::new(n, entries)
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_json(&rows).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn series_exp(theta: f64, phi: f64) -> DMatrix<C64> {
        // exp(A) by Taylor series, A = −i(θ/2)(cos φ σx + sin φ σy)
        let n = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, -phi),
                C64::from_polar(1.0, phi),
                C64::new(0.0, 0.0),
            ],
        );
        let a = n * C64::new(0.0, -theta / 2.0);
        let mut term = DMatrix::<C64>::identity(2, 2);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_rotation_is_identity() {
        let r = rotation_matrix(Rotation::new(0.0, 1.3));
        assert!(r.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn pi_rotation_about_x() {
        let r = rotation_matrix(Rotation::new(PI, 0.0));
        let i = C64::new(0.0, 1.0);
        let expect = ComplexMatrix::new(2, vec![0.0.into(), -i, -i, 0.0.into()]).unwrap();
        assert!(r.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn half_pi_about_y_matches_series() {
        let r = rotation_matrix(Rotation::new(FRAC_PI_2, FRAC_PI_2));
        let oracle = series_exp(FRAC_PI_2, FRAC_PI_2);
        assert!((r.as_dmatrix() - &oracle).norm() < 1e-13);
        // (I − iσ_y)/√2
        let h = FRAC_1_SQRT_2;
        let expect = ComplexMatrix::new(2, vec![h.into(), (-h).into(), h.into(), h.into()]).unwrap();
        assert!(r.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn collective_pi_flip() {
        let out = collective_rotate(&DensityMatrix::basis(DD), Rotation::new(PI, 0.0));
        assert!(out.max_abs_diff(&DensityMatrix::basis(UU)) < 1e-14);
    }

    #[test]
    fn collective_half_pi_population() {
        let out = collective_rotate(&DensityMatrix::basis(DD), Rotation::new(FRAC_PI_2, 0.0));
        let expect = (FRAC_PI_2 / 2.0).sin().powi(4);
        assert!((out.populations()[UU] - expect).abs() < 1e-14);
        assert!((out.populations()[UU] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bell_state_corners() {
        assert!((bell_state(0.0).corner() - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((bell_state(PI).corner() - C64::new(-0.5, 0.0)).norm() < 1e-15);
        let r = 1.15 * PI;
        let expect = C64::from_polar(0.5, -r);
        assert!((bell_state(r).corner() - expect).norm() < 1e-15);
        let b = bell_state(r);
        assert!((b.purity() - 1.0).abs() < 1e-12);
        let p = b.populations();
        assert!((p[UU] - 0.5).abs() < 1e-15 && (p[DD] - 0.5).abs() < 1e-15);
        assert!(p[UD].abs() < 1e-15 && p[DU].abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_unphysical() {
        let d = [C64::new(1.1, 0.0), 0.0.into(), 0.0.into(), C64::new(-0.1, 0.0)];
        assert!(DensityMatrix::new(ComplexMatrix::from_diagonal(&d)).is_err());
        let d = [C64::new(0.5, 0.0), 0.0.into(), 0.0.into(), C64::new(0.4, 0.0)];
        assert!(DensityMatrix::new(ComplexMatrix::from_diagonal(&d)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let b = bell_state(0.3);
        let s = serde_json::to_string(&b).unwrap();
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert!(back.max_abs_diff(&b) < 1e-15);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 4);
        assert_eq!(v[0][3].as_array().unwrap().len(), 2);
    }
}
