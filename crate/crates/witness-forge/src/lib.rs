//! Certificates for N-copy distillability and PPT activation of small
//! multipartite quantum states.
//!
//! The toolkit builds witness operators from states, searches product and
//! Schmidt-rank-2 vectors by exact-eigenvector seesaw, and verifies
//! positive-semidefinite decomposition certificates. Every decision backed by
//! a nonconvex search is three-valued: `Proven` and `Refuted` carry
//! certificates that re-verify through an independent evaluation path,
//! everything else reports `Inconclusive` with the best value found.
//!
//! All states follow the unnormalized convention; dense complex matrices
//! only, at the scales of a few qubits per party.

pub mod choi;
pub mod config;
pub mod distill;
pub mod error;
pub mod io;
pub mod labels;
pub mod matrix;
pub mod operator;
pub mod sample;
pub mod states;
pub mod tol;
pub mod verdict;
pub mod witness;

pub use config::SearchConfig;
pub use error::{Error, Result};
pub use labels::{FactorLabel, Party, PartySystem};
pub use matrix::ComplexMatrix;
pub use operator::{LabeledOperator, Spectrum};
pub use verdict::{Certificate, Verdict, VerdictStatus};
