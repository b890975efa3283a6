//! Random operators for property tests and probe sweeps.
//!
//! Three-qubit states drawn from a Wishart-style ensemble are essentially
//! never PPT on all cuts, so `random_all_cuts_ppt` mixes two constructions
//! that are PPT by construction instead of rejection sampling: convex
//! mixtures of random product projectors (separable, hence PPT), and
//! Wishart states shifted by just enough identity to clear every cut.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::labels::{Party, PartySystem};
use crate::matrix::{normalize, ComplexMatrix};
use crate::operator::{product_vector, LabeledOperator};

pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    normalize(&mut v);
    v
}

pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    g.add(&g.adjoint()).scale(0.5)
}

/// Wishart-style random PSD matrix G G^dag, trace-normalized.
pub fn random_psd(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    let w = g.matmul(&g.adjoint());
    let t = w.trace().re;
    w.scale(1.0 / t)
}

/// Random state (trace 1, PSD) on the given system.
pub fn random_state(system: &PartySystem, rng: &mut ChaCha8Rng) -> LabeledOperator {
    let m = random_psd(system.total_dim(), rng);
    let m = m.add(&m.adjoint()).scale(0.5);
    LabeledOperator::new(system.clone(), m).expect("random PSD state is Hermitian")
}

/// Convex mixture of random product projectors: separable by construction.
pub fn random_separable(system: &PartySystem, terms: usize, rng: &mut ChaCha8Rng) -> Result<LabeledOperator> {
    let dim = system.total_dim();
    let parties = system.parties();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for _ in 0..terms.max(1) {
        let parts: Vec<(Party, Vec<Complex64>)> = parties
            .iter()
            .map(|&p| (p, random_unit_vector(system.party_dim(p), rng)))
            .collect();
        let borrowed: Vec<(Party, &[Complex64])> =
            parts.iter().map(|(p, v)| (*p, v.as_slice())).collect();
        let v = product_vector(system, &borrowed)?;
        let weight: f64 = rng.random::<f64>() + 0.05;
        acc = acc.add(&ComplexMatrix::outer(&v).scale(weight));
    }
    let t = acc.trace().re;
    Ok(LabeledOperator::new(system.clone(), acc.scale(1.0 / t))?)
}

/// A state that is PPT across every party cut. Half the draws are separable
/// mixtures, half are identity-shifted Wishart states (still random in their
/// eigenbasis, PPT with a small deterministic margin).
pub fn random_all_cuts_ppt(system: &PartySystem, rng: &mut ChaCha8Rng) -> Result<LabeledOperator> {
    if rng.random::<bool>() {
        return random_separable(system, 2 * system.total_dim(), rng);
    }
    let raw = random_state(system, rng);
    let mut worst: f64 = 0.0;
    for party in system.parties() {
        let min = raw.partial_transpose_party(party)?.min_eig()?;
        worst = worst.min(min);
    }
    let dim = system.total_dim();
    let shift = -worst + 1e-6;
    let m = raw
        .matrix()
        .add(&ComplexMatrix::identity(dim).scale(shift));
    let t = m.trace().re;
    Ok(LabeledOperator::new(system.clone(), m.scale(1.0 / t))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ppt_generator_is_ppt_on_every_cut() {
        let system =
            PartySystem::simple(&[(Party::A, 2), (Party::B, 2), (Party::C, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rho = random_all_cuts_ppt(&system, &mut rng).unwrap();
            assert!(rho.min_eig().unwrap() >= -1e-10);
            for party in [Party::A, Party::B, Party::C] {
                let min = rho
                    .partial_transpose_party(party)
                    .unwrap()
                    .min_eig()
                    .unwrap();
                assert!(min >= -1e-9, "cut {party} has min eig {min}");
            }
        }
    }
}
