//! Joint spin ⊗ stretch-mode state in either representation.

use std::collections::HashMap;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;

use super::fock::{branch_propagator, thermal_motional_state, TRUNCATION_TOL};
use super::{SimMode, SimOptions};
use crate::error::{Error, Result};
use crate::quantum_core::{collective_rotation_matrix, ComplexMatrix, DensityMatrix, Rotation};
use crate::trap_physics::{displacement_trajectory, ForcePulseParams};

/// Eigenvalue of `(σ_z1 − σ_z2)/2` per basis state `(↑↑, ↑↓, ↓↑, ↓↓)`.
pub const SPIN_DIFFERENCE: [f64; 4] = [0.0, 1.0, -1.0, 0.0];

/// Number of qubits whose label differs between basis states `s` and `t`.
fn flips(s: usize, t: usize) -> i32 {
    (s ^ t).count_ones() as i32
}

/// Phase of basis state `s` under `Z(φ_1) ⊗ Z(φ_1)`, `Z(φ) = diag(e^{iφ/2}, e^{−iφ/2})`.
fn light_shift_phase(s: usize, phi1: f64) -> C64 {
    match s {
        0 => C64::from_polar(1.0, phi1),
        3 => C64::from_polar(1.0, -phi1),
        _ => C64::new(1.0, 0.0),
    }
}

/// Per-element factor shared by both representations: light-shift phases and
/// dephasing `e^{−Γτ}` per differing qubit.
fn diagonal_factor(s: usize, t: usize, phi1: f64, gamma_t: f64) -> C64 {
    let damp = if gamma_t == 0.0 { 1.0 } else { (-gamma_t * flips(s, t) as f64).exp() };
    light_shift_phase(s, phi1) * light_shift_phase(t, phi1).conj() * damp
}

fn to_matrix4(m: &ComplexMatrix) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| m[(i, j)])
}

/// `Σ_k K_k ⊗ D(β_k) ρ_th D(β'_k)†` keyed by the displacement pair.
#[derive(Clone, Debug)]
struct Branch {
    ket: C64,
    bra: C64,
    spin: Matrix4<C64>,
}

#[derive(Clone, Debug)]
pub struct BranchState {
    branches: Vec<Branch>,
    nbar: f64,
    thermal_factor: bool,
}

fn disp_key(z: C64) -> (u64, u64) {
    // +0.0 normalizes −0.0
    ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
}

impl BranchState {
    fn new(spin: &DensityMatrix, nbar: f64, thermal_factor: bool) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self {
            branches: vec![Branch { ket: zero, bra: zero, spin: to_matrix4(spin.matrix()) }],
            nbar,
            thermal_factor,
        }
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn apply_unitary(&mut self, u: &Matrix4<C64>) {
        let ud = u.adjoint();
        for b in &mut self.branches {
            b.spin = u * b.spin * ud;
        }
    }

    fn apply_force(&mut self, alpha: C64, phase: f64, phi1: f64, gamma_t: f64) {
        let mut index: HashMap<((u64, u64), (u64, u64)), usize> = HashMap::new();
        let mut out: Vec<Branch> = Vec::new();
        for b in &self.branches {
            for s in 0..4 {
                let ms = SPIN_DIFFERENCE[s];
                let ket = b.ket + alpha * ms;
                // D(mα) D(β) = e^{i Im(mα β*)} D(mα + β)
                let ket_phase = (alpha * ms * b.ket.conj()).im;
                for t in 0..4 {
                    let w = b.spin[(s, t)];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mt = SPIN_DIFFERENCE[t];
                    let bra = b.bra + alpha * mt;
                    let bra_phase = (alpha * mt * b.bra.conj()).im;
                    let geo = phase * (ms * ms - mt * mt);
                    let factor = C64::from_polar(1.0, ket_phase - bra_phase + geo)
                        * diagonal_factor(s, t, phi1, gamma_t);
                    let key = (disp_key(ket), disp_key(bra));
                    let slot = *index.entry(key).or_insert_with(|| {
                        out.push(Branch { ket, bra, spin: Matrix4::zeros() });
                        out.len() - 1
                    });
                    out[slot].spin[(s, t)] += w * factor;
                }
            }
        }
        self.branches = out;
    }

    fn dephase(&mut self, gamma_t: f64) {
        for b in &mut self.branches {
            for s in 0..4 {
                for t in 0..4 {
                    b.spin[(s, t)] *= diagonal_factor(s, t, 0.0, gamma_t);
                }
            }
        }
    }

    /// `Tr[D(β) ρ_th D(β')†] = e^{−i Im(β' β*)} χ(β − β')`.
    fn overlap(&self, ket: C64, bra: C64) -> C64 {
        let width = if self.thermal_factor { self.nbar + 0.5 } else { 0.5 };
        let chi = (-width * (ket - bra).norm_sqr()).exp();
        C64::from_polar(chi, -(bra * ket.conj()).im)
    }

    fn trace_out(&self) -> Matrix4<C64> {
        self.branches
            .iter()
            .fold(Matrix4::zeros(), |acc, b| acc + b.spin * self.overlap(b.ket, b.bra))
    }
}

/// Dense joint density matrix stored as 4×4 spin blocks of `dim × dim` motional operators.
#[derive(Clone, Debug)]
pub struct FockState {
    blocks: Vec<DMatrix<C64>>,
    dim: usize,
    steps_per_period: u32,
}

impl FockState {
    fn new(spin: &DensityMatrix, nbar: f64, dim: usize, steps_per_period: u32) -> Result<Self> {
        let motion = thermal_motional_state(nbar, dim)?;
        let blocks = (0..16).map(|k| &motion * spin.get(k / 4, k % 4)).collect();
        Ok(Self { blocks, dim, steps_per_period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn block(&self, s: usize, t: usize) -> &DMatrix<C64> {
        &self.blocks[4 * s + t]
    }

    fn apply_unitary(&mut self, u: &Matrix4<C64>) {
        let mut out = vec![DMatrix::<C64>::zeros(self.dim, self.dim); 16];
        for a in 0..4 {
            for b in 0..4 {
                let target = &mut out[4 * a + b];
                for s in 0..4 {
                    for t in 0..4 {
                        let w = u[(a, s)] * u[(b, t)].conj();
                        if w != C64::new(0.0, 0.0) {
                            *target += self.block(s, t) * w;
                        }
                    }
                }
            }
        }
        self.blocks = out;
    }

    fn apply_force(&mut self, params: &ForcePulseParams, gamma_t: f64) -> Result<()> {
        let plus = branch_propagator(1.0, params, self.dim, self.steps_per_period);
        let minus = branch_propagator(-1.0, params, self.dim, self.steps_per_period);
        let ident = DMatrix::<C64>::identity(self.dim, self.dim);
        let prop = |s: usize| match s {
            1 => &plus,
            2 => &minus,
            _ => &ident,
        };
        let phi1 = params.phi1();
        for s in 0..4 {
            for t in 0..4 {
                let k = 4 * s + t;
                let evolved = prop(s) * &self.blocks[k] * prop(t).adjoint();
                self.blocks[k] = evolved * diagonal_factor(s, t, phi1, gamma_t);
            }
        }
        self.check_truncation()
    }

    fn check_truncation(&self) -> Result<()> {
        let top: f64 = (0..4)
            .map(|s| {
                let b = self.block(s, s);
                (self.dim.saturating_sub(2)..self.dim).map(|n| b[(n, n)].re).sum::<f64>()
            })
            .sum();
        if top > TRUNCATION_TOL {
            return Err(Error::Truncation(format!(
                "population {top:.3e} in the top two of {} Fock levels",
                self.dim
            )));
        }
        Ok(())
    }

    fn dephase(&mut self, gamma_t: f64) {
        for s in 0..4 {
            for t in 0..4 {
                let f = diagonal_factor(s, t, 0.0, gamma_t);
                self.blocks[4 * s + t] *= f;
            }
        }
    }

    fn trace_out(&self) -> Matrix4<C64> {
        Matrix4::from_fn(|s, t| self.block(s, t).trace())
    }
}

/// Joint state in the analytic branch or dense Fock representation.
#[derive(Clone, Debug)]
pub enum JointState {
    Branches(BranchState),
    Fock(FockState),
}

impl JointState {
    /// Spin state `spin` ⊗ thermal motion with the options' `n̄`.
    pub fn new(spin: &DensityMatrix, options: &SimOptions) -> Result<Self> {
        options.validate()?;
        Ok(match options.mode {
            SimMode::Analytic => Self::Branches(BranchState::new(
                spin,
                options.nbar,
                options.include_thermal_coherence_factor,
            )),
            SimMode::Fock => Self::Fock(FockState::new(
                spin,
                options.nbar,
                options.fock_dim,
                options.fock_steps_per_period,
            )?),
        })
    }

    /// `R(θ,φ) ⊗ R(θ,φ) ⊗ I_motion`.
    pub fn apply_carrier(&mut self, theta: f64, phi: f64) {
        let u = to_matrix4(&collective_rotation_matrix(Rotation::new(theta, phi)));
        match self {
            Self::Branches(b) => b.apply_unitary(&u),
            Self::Fock(f) => f.apply_unitary(&u),
        }
    }

    /// Spin-dependent force pulse with light shift `Z(Δ_c τ)` on both qubits and
    /// dephasing `Γτ` (both commute with the force).
    pub fn apply_force_pulse(&mut self, params: &ForcePulseParams, options: &SimOptions) -> Result<()> {
        params.validate()?;
        let gamma_t = options.gamma * params.tau;
        match self {
            Self::Branches(b) => {
                let (alpha, phase) = displacement_trajectory(params.omega_f, params.delta, params.tau)?;
                b.apply_force(alpha, phase, params.phi1(), gamma_t);
                Ok(())
            }
            Self::Fock(f) => f.apply_force(params, gamma_t),
        }
    }

    /// Independent z-dephasing of each qubit: coherences decay by `e^{−Γτ}` per differing qubit.
    pub fn apply_qubit_dephasing(&mut self, gamma: f64, tau: f64) -> Result<()> {
        let gamma_t = gamma * tau;
        if !(gamma_t >= 0.0) {
            return Err(Error::ContractViolation(format!("Γτ = {gamma_t} must be ≥ 0")));
        }
        if gamma_t == 0.0 {
            return Ok(());
        }
        match self {
            Self::Branches(b) => b.dephase(gamma_t),
            Self::Fock(f) => f.dephase(gamma_t),
        }
        Ok(())
    }

    /// Partial trace over the motional mode.
    pub fn trace_out_motion(&self) -> DensityMatrix {
        let m = match self {
            Self::Branches(b) => b.trace_out(),
            Self::Fock(f) => f.trace_out(),
        };
        let dm = DMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
        DensityMatrix::from_trusted(ComplexMatrix::from_dmatrix_unchecked(dm))
    }
}
