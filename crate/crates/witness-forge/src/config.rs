//! Knobs for every heuristic search.

use serde::{Deserialize, Serialize};

use crate::tol;

/// Restart counts, seeds, tolerances and iteration caps shared by the seesaw
/// searches and the decomposition heuristic. Defaults reproduce the shipped
/// acceptance runs; everything is overridable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Independent seesaw restarts (structured seeds first, then random).
    pub restarts: usize,
    /// Base seed; restart k derives its own stream from (seed, k), so
    /// parallel and serial runs see identical randomness.
    pub seed: u64,
    /// Cap on seesaw sweeps within one restart.
    pub max_iters: usize,
    /// A certificate value below -tol_neg counts as a refutation.
    pub tol_neg: f64,
    /// |<v|W|v>| <= tol_zero admits v into the zero-expectation set.
    pub tol_zero: f64,
    /// Gram eigenvalues above this count toward the span rank.
    pub gram_rank_tol: f64,
    /// PSD threshold for certificate verification.
    pub psd_tol: f64,
    /// Max-norm residual bound for decomposition certificates.
    pub residual_tol: f64,
    /// Iteration cap for the alternating-projection decomposition search.
    pub decomp_max_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            seed: 0,
            max_iters: 200,
            tol_neg: tol::TOL_NEG,
            tol_zero: tol::TOL_ZERO,
            gram_rank_tol: tol::GRAM_RANK_TOL,
            psd_tol: tol::PSD_TOL,
            residual_tol: tol::RESIDUAL_TOL,
            decomp_max_iters: 5000,
        }
    }
}

impl SearchConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    /// Deterministic per-restart RNG stream.
    pub fn rng_for_restart(&self, restart: usize) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        let mixed = self
            .seed
            .wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rand_chacha::ChaCha8Rng::seed_from_u64(mixed)
    }
}
