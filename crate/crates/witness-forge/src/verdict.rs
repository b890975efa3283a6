//! Three-valued verdicts with re-verifiable certificates.
//!
//! Every optimization-backed decision in this crate is one-sided: a seesaw
//! that fails to find a violation proves nothing. `Proven` and `Refuted`
//! therefore always carry a certificate that an independent evaluation path
//! re-checks; everything else is `Inconclusive` with the best value found.

use num_complex::Complex64;

use crate::labels::Party;
use crate::witness::DecompositionCertificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Proven,
    Refuted,
    Inconclusive,
}

impl VerdictStatus {
    pub fn name(self) -> &'static str {
        match self {
            VerdictStatus::Proven => "proven",
            VerdictStatus::Refuted => "refuted",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }
}

/// A product vector split by party, with the witness expectation it attains.
#[derive(Debug, Clone)]
pub struct ProductCertificate {
    /// Unit vector per party, indexed over that party's factors in system
    /// order.
    pub parts: Vec<(Party, Vec<Complex64>)>,
    /// <v|W|v> re-evaluated via the direct quadratic form.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub enum Certificate {
    ProductVector(ProductCertificate),
    Decomposition(Box<DecompositionCertificate>),
    /// A verified-PPT detector paired negatively with the witness.
    PptDetector {
        pairing: f64,
    },
    /// The operator itself is positive semidefinite; its min eigenvalue
    /// certifies nonnegativity on every vector, product or not.
    SpectralBound {
        min_eig: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub best_value: f64,
    pub restarts_used: usize,
    pub certificate: Option<Certificate>,
}

impl Verdict {
    pub fn inconclusive(best_value: f64, restarts_used: usize) -> Self {
        Self {
            status: VerdictStatus::Inconclusive,
            best_value,
            restarts_used,
            certificate: None,
        }
    }

    pub fn is_refuted(&self) -> bool {
        self.status == VerdictStatus::Refuted
    }

    pub fn is_proven(&self) -> bool {
        self.status == VerdictStatus::Proven
    }
}
