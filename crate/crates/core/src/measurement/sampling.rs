use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};

use super::readout::{OutcomeProbs, ResolvedProbs};
use crate::error::{Error, Result};

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under master `seed`: `splitmix64(splitmix64(seed) ⊕ index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

pub fn point_rng(seed: u64, index: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(seed, index))
}

/// Multinomial draw by sequential binomials.
pub fn sample_multinomial<R: Rng + ?Sized, const K: usize>(probs: [f64; K], n: u64, rng: &mut R) -> Result<[u64; K]> {
    if n == 0 {
        return Err(Error::ContractViolation("number of shots must be ≥ 1".into()));
    }
    let mut counts = [0u64; K];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..K - 1 {
        if left == 0 {
            break;
        }
        let p = if mass > 0.0 { (probs[k].max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, p)
            .map_err(|e| Error::ContractViolation(format!("binomial parameters: {e}")))?
            .sample(rng);
        counts[k] = draw;
        left -= draw;
        mass -= probs[k].max(0.0);
    }
    counts[K - 1] = left;
    Ok(counts)
}

/// `(n_uu, n_mid, n_dd)` for `n` shots, reproducible from `seed`.
pub fn sample_counts(probs: &OutcomeProbs, n: u64, seed: u64) -> Result<[u64; 3]> {
    sample_multinomial(probs.as_array(), n, &mut ChaCha20Rng::seed_from_u64(seed))
}

pub fn sample_resolved<R: Rng + ?Sized>(probs: &ResolvedProbs, n: u64, rng: &mut R) -> Result<[u64; 4]> {
    sample_multinomial(probs.0, n, rng)
}
