//! Three-outcome readout statistics, preparation and readout errors, seeded
//! shot noise and scan datasets.

mod readout;
mod sampling;
mod scan;

pub use readout::{
    apply_readout_errors, apply_readout_errors_resolved, outcome_probs, parity_signal, preparation_state,
    pulse_area_from_duration, resolved_probs, OutcomeProbs, ReadoutModel, ResolvedProbs,
};
pub use sampling::{derive_seed, point_rng, sample_counts, sample_multinomial, sample_resolved, splitmix64};
pub use scan::{
    generate_phi_scan, generate_tau_scan, phi_scan_of_state, uniform_phis, ScanData, ScanMetadata, ScanRecord, ScanSpec, Setting,
    PARITY_CONVENTION,
};
