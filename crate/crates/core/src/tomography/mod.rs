//! State reconstruction from φ scans: harmonic fits, linear inversion over the
//! observable Pauli subspace, maximum-likelihood projection; the closed-form
//! model fit of τ scans; and the parity coherence bound.

mod design;
mod model_fit;
mod harmonics;
pub mod ml;
mod parity;
mod pipeline;

pub use design::{build_design_matrix, invert_to_rho_m, DesignMatrix, RANK_TOL};
pub use model_fit::{fit_eq4, EchoModelFit, EchoModelFitOptions, PARAM_NAMES};
pub use harmonics::{
    discrete_harmonics, fit_harmonics, fit_phi_harmonics, harmonic_basis, Channel, ChannelFit, ChannelSet,
    HarmonicFit,
};
pub use ml::{ml_project, MlProjection};
pub use parity::{coherence_from_parity, parity_sensitivity, ParityBound, THETA_WINDOW};
pub use pipeline::{tomo_pipeline, write_bar_csv, ChannelChoice, TomoDiagnostics, TomoOptions, TomoResult};
