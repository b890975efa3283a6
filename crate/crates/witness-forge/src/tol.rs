//! Centralized numerical tolerances.
//!
//! Everything here is an absolute threshold on unnormalized operators unless
//! stated otherwise. The hierarchy is: eigensolver residual (~1e-13 observed)
//! < certificate thresholds (1e-9) < zero-set collection (1e-7), so a
//! certificate is never accepted on eigensolver noise alone.

/// Hermiticity rejection threshold, relative to the max-norm of the matrix:
/// inputs with max |M - M^dag| > `HERM_REL_TOL * max|M|` are rejected rather
/// than symmetrized, so corrupted files surface as errors.
pub const HERM_REL_TOL: f64 = 1e-10;

/// Eigendecomposition reconstruction bound, per unit of `max|M| * dim`.
pub const EIG_RESIDUAL_REL: f64 = 1e-10;

/// Default positive-semidefiniteness threshold: min eigenvalue >= -PSD_TOL.
pub const PSD_TOL: f64 = 1e-9;

/// Negativity threshold for refutation certificates (product vectors,
/// Schmidt-rank-2 vectors, detector pairings). A value below -TOL_NEG counts
/// as a genuine violation.
pub const TOL_NEG: f64 = 1e-9;

/// Collection threshold for the zero-expectation product-vector set.
pub const TOL_ZERO: f64 = 1e-7;

/// Gram-matrix eigenvalue threshold when ranking the span of collected
/// product vectors.
pub const GRAM_RANK_TOL: f64 = 1e-8;

/// Max-norm residual bound for decomposition certificates.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Agreement bound (relative to scale) for the two evaluation routes of the
/// witness pairing identity, and for certificate re-evaluation.
pub const PAIRING_REL_TOL: f64 = 1e-10;

/// Seesaw stops when the objective improves by less than this per iteration.
pub const SEESAW_CONVERGENCE: f64 = 1e-13;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_hierarchy() {
        assert!(EIG_RESIDUAL_REL <= PSD_TOL);
        assert!(PSD_TOL < TOL_ZERO);
        assert!(GRAM_RANK_TOL < TOL_ZERO);
        assert!(RESIDUAL_TOL < PSD_TOL);
    }
}
