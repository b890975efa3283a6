//! Constructors for the named states and projectors, the N-copy builder, and
//! the helper-party projection.
//!
//! All states are kept unnormalized; `normalize` divides by the trace when a
//! density matrix is wanted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{FactorLabel, Party, PartySystem};
use crate::matrix::{norm, ComplexMatrix};
use crate::operator::LabeledOperator;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Computational basis vector |k> in dimension d.
pub fn basis(d: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0); d];
    v[k] = c(1.0);
    v
}

/// Unnormalized maximally entangled vector: sum_k |k,k> with squared norm d.
pub fn max_entangled_vector(d: usize) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    let mut v = vec![c(0.0); d * d];
    for k in 0..d {
        v[k * d + k] = c(1.0);
    }
    Ok(v)
}

/// |01> + |10> on two qubits.
pub fn psi_plus_vector() -> Vec<Complex64> {
    let mut v = vec![c(0.0); 4];
    v[1] = c(1.0);
    v[2] = c(1.0);
    v
}

/// |001> + |010> + |100> on three qubits.
pub fn w_vector() -> Vec<Complex64> {
    let mut v = vec![c(0.0); 8];
    v[1] = c(1.0);
    v[2] = c(1.0);
    v[4] = c(1.0);
    v
}

/// Rank-1 projector onto the unnormalized two-qubit maximally entangled
/// vector, carried on the two caller-chosen factor labels. Trace 2.
pub fn projector_p(left: FactorLabel, right: FactorLabel) -> Result<LabeledOperator> {
    let system = PartySystem::new(vec![(left, 2), (right, 2)])?;
    let v = max_entangled_vector(2)?;
    Ok(LabeledOperator::new(system, ComplexMatrix::outer(&v))?)
}

/// The three-qubit family 1l_8 + alpha |W><W| on parties A, B, C.
pub fn rho_alpha(alpha: f64) -> Result<LabeledOperator> {
    if !(alpha >= 0.0) {
        return Err(Error::BadParameter(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    let system = PartySystem::simple(&[(Party::A, 2), (Party::B, 2), (Party::C, 2)])?;
    let m = ComplexMatrix::identity(8).add(&ComplexMatrix::outer(&w_vector()).scale(alpha));
    Ok(LabeledOperator::from_parts(system, m))
}

/// How the factors of an N-copy tensor power are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grouping {
    /// (A1 B1 C1)(A2 B2 C2)...: copies side by side.
    CopyMajor,
    /// (A1 A2...)(B1 B2...)...: each party's copies adjacent.
    PartyMajor,
}

/// Tensor power with fresh copy indices 1..n. The input must carry one
/// factor per party, indexed 1 (a single-copy state).
pub fn n_copies(rho: &LabeledOperator, n: usize, grouping: Grouping) -> Result<LabeledOperator> {
    if n < 1 {
        return Err(Error::BadParameter("copy count must be >= 1".into()));
    }
    for (label, _) in rho.system().factors() {
        if label.index != 1 || rho.system().party_labels(label.party).len() != 1 {
            return Err(Error::BadParameter(format!(
                "n_copies expects a single-copy state (one factor per party, index 1), got {}",
                rho.system()
            )));
        }
    }
    let mut out = rho.clone();
    for copy in 2..=n {
        let shifted = rho.relabel(|l| FactorLabel::new(l.party, copy as u32))?;
        out = out.tensor(&shifted)?;
    }
    match grouping {
        Grouping::CopyMajor => Ok(out),
        Grouping::PartyMajor => out.group_by_party(),
    }
}

/// <h| rho |h> over every factor of party A; the result lives on the
/// remaining parties. Zero vectors are rejected: a vanishing measurement
/// direction makes every downstream PPT test vacuous.
pub fn project_onto_alice(rho: &LabeledOperator, h: &[Complex64]) -> Result<LabeledOperator> {
    let labels = rho.system().party_labels(Party::A);
    if labels.is_empty() {
        return Err(Error::UnknownLabel("A (no factors)".into()));
    }
    let expected = rho.system().party_dim(Party::A);
    if h.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: h.len(),
        });
    }
    if norm(h) == 0.0 {
        return Err(Error::BadParameter("zero measurement vector".into()));
    }
    rho.contract(&labels, h)
}

/// Divide by the trace, turning an unnormalized state into a density matrix.
pub fn normalize(rho: &LabeledOperator) -> Result<LabeledOperator> {
    let t = rho.trace();
    if t.abs() < f64::EPSILON {
        return Err(Error::BadParameter("trace too close to zero".into()));
    }
    Ok(rho.scale(1.0 / t))
}

/// The named state families reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StateFamily {
    MaxEntangled(usize),
    BellProjectorP,
    WState,
    PsiPlus,
    RhoAlpha(f64),
    Ghz(usize),
}

impl StateFamily {
    /// Materialize the family member as a labeled operator (projector for
    /// the pure states).
    pub fn build(self) -> Result<LabeledOperator> {
        match self {
            StateFamily::MaxEntangled(d) => {
                let system = PartySystem::simple(&[(Party::A, d), (Party::B, d)])?;
                let v = max_entangled_vector(d)?;
                Ok(LabeledOperator::from_parts(system, ComplexMatrix::outer(&v)))
            }
            StateFamily::BellProjectorP => projector_p(
                FactorLabel::new(Party::A, 1),
                FactorLabel::new(Party::B, 1),
            ),
            StateFamily::WState => {
                let system =
                    PartySystem::simple(&[(Party::A, 2), (Party::B, 2), (Party::C, 2)])?;
                Ok(LabeledOperator::from_parts(
                    system,
                    ComplexMatrix::outer(&w_vector()),
                ))
            }
            StateFamily::PsiPlus => {
                let system = PartySystem::simple(&[(Party::A, 2), (Party::B, 2)])?;
                Ok(LabeledOperator::from_parts(
                    system,
                    ComplexMatrix::outer(&psi_plus_vector()),
                ))
            }
            StateFamily::RhoAlpha(alpha) => rho_alpha(alpha),
            StateFamily::Ghz(d) => {
                if d < 2 {
                    return Err(Error::BadDimension(d));
                }
                let system = PartySystem::simple(&[(Party::A, d), (Party::B, d), (Party::C, d)])?;
                let mut v = vec![c(0.0); d * d * d];
                for k in 0..d {
                    v[k * d * d + k * d + k] = c(1.0);
                }
                Ok(LabeledOperator::from_parts(system, ComplexMatrix::outer(&v)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::inner;

    #[test]
    fn max_entangled_basics() {
        let v = max_entangled_vector(2).unwrap();
        assert_eq!(
            v.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0, 1.0]
        );
        let v3 = max_entangled_vector(3).unwrap();
        assert!((norm(&v3).powi(2) - 3.0).abs() < 1e-12);
        assert!(max_entangled_vector(1).is_err());
    }

    #[test]
    fn transfer_identity_traces_operator() {
        // <Phi_d| (M ⊗ 1l) |Phi_d> = tr(M), checked entrywise for a
        // deterministic non-trivial M.
        let d = 3;
        let phi = max_entangled_vector(d).unwrap();
        let m = ComplexMatrix::from_fn(d, d, |i, j| {
            Complex64::new((i + 1) as f64, (j as f64) - (i as f64))
        });
        let m = m.add(&m.adjoint()).scale(0.5);
        let lifted = m.kron(&ComplexMatrix::identity(d));
        let got = inner(&phi, &lifted.matvec(&phi));
        assert!((got - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn projector_p_trace_rank_swap() {
        let p = projector_p(
            FactorLabel::new(Party::A, 1),
            FactorLabel::new(Party::B, 1),
        )
        .unwrap();
        assert!((p.trace() - 2.0).abs() < 1e-12);
        // rank 1: P^2 = 2P
        let p2 = p.matrix().matmul(p.matrix());
        assert!(p2.sub(&p.matrix().scale(2.0)).max_abs() < 1e-12);
        // PT_A of P is the swap: eigenvalues {-1, 1, 1, 1}
        let spec = p
            .partial_transpose_party(Party::A)
            .unwrap()
            .eigen()
            .unwrap();
        let expect = [-1.0, 1.0, 1.0, 1.0];
        for (got, want) in spec.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_alpha_basics() {
        let rho0 = rho_alpha(0.0).unwrap();
        assert!(rho0.matrix().sub(&ComplexMatrix::identity(8)).max_abs() == 0.0);
        let rho1 = rho_alpha(1.0).unwrap();
        assert!((rho1.trace() - 11.0).abs() < 1e-12);
        // spectrum at alpha=1: {1 x7, 4}
        let spec = rho1.eigen().unwrap();
        assert!((spec.eigenvalues[7] - 4.0).abs() < 1e-12);
        for v in &spec.eigenvalues[..7] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(rho_alpha(-0.1).is_err());
    }

    #[test]
    fn rho_alpha_ppt_threshold_samples() {
        // C-cut partial transpose flips sign across alpha = 1/sqrt(2)
        let below = rho_alpha(0.70).unwrap();
        assert!(below
            .partial_transpose_party(Party::C)
            .unwrap()
            .is_psd(crate::tol::PSD_TOL)
            .unwrap());
        let above = rho_alpha(0.72).unwrap();
        assert!(!above
            .partial_transpose_party(Party::C)
            .unwrap()
            .is_psd(crate::tol::PSD_TOL)
            .unwrap());
        // min eig at alpha = 0.8 is 1 - 0.8 sqrt2
        let m = rho_alpha(0.8)
            .unwrap()
            .partial_transpose_party(Party::C)
            .unwrap()
            .min_eig()
            .unwrap();
        assert!((m - (1.0 - 0.8 * 2.0_f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn n_copies_trace_and_relabelling() {
        let rho = rho_alpha(1.0).unwrap();
        let two = n_copies(&rho, 2, Grouping::CopyMajor).unwrap();
        assert!((two.trace() - 121.0).abs() < 1e-9);
        let labels = two.system().labels();
        assert_eq!(labels.len(), 6);
        assert_eq!(labels[3], FactorLabel::new(Party::A, 2));

        let one = n_copies(&rho, 1, Grouping::PartyMajor).unwrap();
        assert_eq!(one.matrix(), rho.matrix());
    }

    #[test]
    fn n_copies_party_major_spectrum_matches_copy_major() {
        let rho = rho_alpha(0.9).unwrap();
        let a = n_copies(&rho, 2, Grouping::CopyMajor).unwrap();
        let b = n_copies(&rho, 2, Grouping::PartyMajor).unwrap();
        let sa = a.eigen().unwrap().eigenvalues;
        let sb = b.eigen().unwrap().eigenvalues;
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn project_onto_alice_paper_blocks() {
        let rho = rho_alpha(0.9).unwrap();
        // h = |0>: 1l_4 + alpha |psi+><psi+|
        let p0 = project_onto_alice(&rho, &basis(2, 0)).unwrap();
        let expect = ComplexMatrix::identity(4).add(&ComplexMatrix::outer(&psi_plus_vector()).scale(0.9));
        assert!(p0.matrix().sub(&expect).max_abs() < 1e-12);
        // h = |1>: 1l_4 + alpha |00><00|, PPT for every alpha
        let p1 = project_onto_alice(&rho, &basis(2, 1)).unwrap();
        let mut expect = ComplexMatrix::identity(4);
        expect.add_to(0, 0, c(0.9));
        assert!(p1.matrix().sub(&expect).max_abs() < 1e-12);
        assert!(p1
            .partial_transpose_party(Party::B)
            .unwrap()
            .is_psd(1e-12)
            .unwrap());
        // zero vector rejected
        assert!(matches!(
            project_onto_alice(&rho, &[c(0.0), c(0.0)]),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn rho_alpha_party_permutation_symmetry() {
        let rho = rho_alpha(0.85).unwrap();
        let canonical = rho.system().labels();
        let perms: [[Party; 3]; 6] = [
            [Party::A, Party::B, Party::C],
            [Party::A, Party::C, Party::B],
            [Party::B, Party::A, Party::C],
            [Party::B, Party::C, Party::A],
            [Party::C, Party::A, Party::B],
            [Party::C, Party::B, Party::A],
        ];
        for perm in perms {
            let relabeled = rho
                .relabel(|l| {
                    let idx = match l.party {
                        Party::A => 0,
                        Party::B => 1,
                        Party::C => 2,
                    };
                    FactorLabel::new(perm[idx], l.index)
                })
                .unwrap();
            let back = relabeled.permute_factors(&canonical).unwrap();
            assert!(back.matrix().sub(rho.matrix()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn normalize_divides_trace() {
        let rho = rho_alpha(1.0).unwrap();
        let n = normalize(&rho).unwrap();
        assert!((n.trace() - 1.0).abs() < 1e-12);
    }
}
