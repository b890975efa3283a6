//! The isomorphism between completely positive maps and operators.
//!
//! A map's operator form is obtained by feeding each input factor one half of
//! an unnormalized maximally entangled pair and keeping the other half as the
//! stored input index. Applying the map through its operator is then a
//! partial trace against the transposed argument. The stored operator carries
//! an explicit normalization constant (1 / input-dimension squared by
//! default); identities are asserted up to that recorded constant, never by
//! silent rescaling.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::labels::{FactorLabel, Party, PartySystem};
use crate::matrix::ComplexMatrix;
use crate::operator::LabeledOperator;
use crate::states;
use crate::witness::WitnessConstruction;

/// One Kraus term: a full matrix from the input space to the output space,
/// or per-party blocks whose Kronecker product (party-major) forms it.
/// Parties absent from the output contribute 1-row blocks (the party
/// measures its input away).
#[derive(Debug, Clone)]
pub enum KrausTerm {
    General(ComplexMatrix),
    Separable(Vec<(Party, ComplexMatrix)>),
}

/// A completely positive map given by Kraus terms.
#[derive(Debug, Clone)]
pub struct KrausMap {
    input: PartySystem,
    output: PartySystem,
    terms: Vec<KrausTerm>,
}

impl KrausMap {
    /// Input and output label sets must be disjoint (the operator form lives
    /// on both at once); every term must map input to output shapes.
    pub fn new(input: PartySystem, output: PartySystem, terms: Vec<KrausTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::BadParameter("a map needs at least one Kraus term".into()));
        }
        for label in output.labels() {
            if input.contains(label) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
        }
        let map = Self {
            input,
            output,
            terms,
        };
        for term in &map.terms {
            let full = map.term_matrix(term)?;
            if full.rows() != map.output.total_dim() || full.cols() != map.input.total_dim() {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus term is {}x{}, map needs {}x{}",
                    full.rows(),
                    full.cols(),
                    map.output.total_dim(),
                    map.input.total_dim()
                )));
            }
        }
        Ok(map)
    }

    pub fn input(&self) -> &PartySystem {
        &self.input
    }

    pub fn output(&self) -> &PartySystem {
        &self.output
    }

    pub fn terms(&self) -> &[KrausTerm] {
        &self.terms
    }

    /// Flatten a term to its full output x input matrix. Separable blocks
    /// multiply out party-major; every input party must appear.
    fn term_matrix(&self, term: &KrausTerm) -> Result<ComplexMatrix> {
        match term {
            KrausTerm::General(m) => Ok(m.clone()),
            KrausTerm::Separable(blocks) => {
                let mut full = ComplexMatrix::identity(1);
                for party in Party::ALL {
                    let in_dim = self.input.party_dim(party);
                    let out_dim = self.output.party_dim(party);
                    let has_input = !self.input.party_labels(party).is_empty();
                    let has_output = !self.output.party_labels(party).is_empty();
                    if !has_input && !has_output {
                        continue;
                    }
                    let block = blocks
                        .iter()
                        .find(|(p, _)| *p == party)
                        .map(|(_, b)| b)
                        .ok_or_else(|| {
                            Error::ShapeMismatch(format!("separable term missing party {party}"))
                        })?;
                    let want_rows = if has_output { out_dim } else { 1 };
                    let want_cols = if has_input { in_dim } else { 1 };
                    if block.rows() != want_rows || block.cols() != want_cols {
                        return Err(Error::ShapeMismatch(format!(
                            "party {party} block is {}x{}, expected {}x{}",
                            block.rows(),
                            block.cols(),
                            want_rows,
                            want_cols
                        )));
                    }
                    full = full.kron(block);
                }
                Ok(full)
            }
        }
    }

    /// Direct application: sum_k O_k rho O_k^dag. The argument must live on
    /// the map's input labels; the result lives on the output labels.
    pub fn apply(&self, rho: &LabeledOperator) -> Result<LabeledOperator> {
        if rho.system() != &self.input {
            return Err(Error::ShapeMismatch(format!(
                "state on {}, map input is {}",
                rho.system(),
                self.input
            )));
        }
        let dim_out = self.output.total_dim();
        let mut acc = ComplexMatrix::zeros(dim_out, dim_out);
        for term in &self.terms {
            let k = self.term_matrix(term)?;
            let prod = k.matmul(rho.matrix()).matmul(&k.adjoint());
            acc = acc.add(&prod);
        }
        // exact Hermitian symmetrization of accumulated rounding
        let acc = acc.add(&acc.adjoint()).scale(0.5);
        Ok(LabeledOperator::new(self.output.clone(), acc)?)
    }
}

/// The operator form of a map, stored with its normalization constant and
/// the input/output pairing that makes the per-party cuts well defined.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    /// Factors sorted by (party, index): each party's output factor(s)
    /// (index 1) directly before its input factors (indices >= 2).
    op: LabeledOperator,
    /// stored = normalization * raw. Applying the map divides it back out.
    normalization: f64,
    inputs: Vec<FactorLabel>,
    outputs: Vec<FactorLabel>,
}

impl ChoiOperator {
    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn inputs(&self) -> &[FactorLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[FactorLabel] {
        &self.outputs
    }

    /// The un-normalized operator (raw correspondence with the map).
    pub fn raw_op(&self) -> LabeledOperator {
        self.op.scale(1.0 / self.normalization)
    }

    pub fn from_parts(
        op: LabeledOperator,
        normalization: f64,
        inputs: Vec<FactorLabel>,
        outputs: Vec<FactorLabel>,
    ) -> Result<Self> {
        if normalization <= 0.0 || !normalization.is_finite() {
            return Err(Error::BadParameter(format!(
                "normalization must be positive and finite, got {normalization}"
            )));
        }
        for label in op.system().labels() {
            let in_in = inputs.contains(&label);
            let in_out = outputs.contains(&label);
            if in_in == in_out {
                return Err(Error::ShapeMismatch(format!(
                    "factor {label} must be exactly one of input/output"
                )));
            }
        }
        if inputs.len() + outputs.len() != op.system().len() {
            return Err(Error::ShapeMismatch(
                "input/output pairing does not cover the operator".into(),
            ));
        }
        Ok(Self {
            op,
            normalization,
            inputs,
            outputs,
        })
    }

    /// Interpret a state supplied as a raw operator (normalization 1) as the
    /// map taking `source`'s labels to the construction's ancilla pair.
    pub fn from_state(
        e: &LabeledOperator,
        source: &LabeledOperator,
        construction: WitnessConstruction,
    ) -> Result<Self> {
        let (left, right) = construction.ancilla_parties();
        let outputs = vec![FactorLabel::new(left, 1), FactorLabel::new(right, 1)];
        let inputs = source.system().labels();
        let mut expected: Vec<FactorLabel> = outputs.iter().chain(inputs.iter()).copied().collect();
        expected.sort();
        let mut got = e.system().labels();
        got.sort();
        if expected != got {
            return Err(Error::ShapeMismatch(format!(
                "activation operator labels {:?} do not match state copies plus ancilla pair",
                e.system()
            )));
        }
        for (&label, &dim) in e
            .system()
            .labels()
            .iter()
            .zip(e.system().dims().iter())
        {
            let want = if outputs.contains(&label) {
                2
            } else {
                let pos = source.system().position(label).expect("input label");
                source.system().factors()[pos].1
            };
            if dim != want {
                return Err(Error::DimensionMismatch {
                    expected: want,
                    got: dim,
                });
            }
        }
        let sorted = sorted_labels(e.system());
        let op = e.permute_factors(&sorted)?;
        Self::from_parts(op, 1.0, inputs, outputs)
    }
}

fn sorted_labels(system: &PartySystem) -> Vec<FactorLabel> {
    let mut labels = system.labels();
    labels.sort();
    labels
}

/// Build the operator form of a Kraus map: each input factor is paired with
/// a maximally entangled partner, the map acts, and the stored operator is
/// scaled by 1 / input-dimension squared.
pub fn map_to_choi(map: &KrausMap) -> Result<ChoiOperator> {
    let din = map.input().total_dim();
    let dout = map.output().total_dim();
    // grouped layout [outputs][inputs]: raw[(o,i),(o',i')] = sum_k K[o,i] conj(K[o',i'])
    let mut raw = ComplexMatrix::zeros(dout * din, dout * din);
    for term in map.terms() {
        let k = map.term_matrix(term)?;
        let flat: Vec<Complex64> = (0..dout * din)
            .map(|x| k.get(x / din, x % din))
            .collect();
        raw = raw.add(&ComplexMatrix::outer(&flat));
    }
    let mut factors: Vec<(FactorLabel, usize)> = map.output().factors().to_vec();
    factors.extend_from_slice(map.input().factors());
    let system = PartySystem::new(factors)?;
    let grouped = LabeledOperator::from_parts(system, raw);
    let sorted = sorted_labels(grouped.system());
    let op = grouped.permute_factors(&sorted)?;
    let normalization = 1.0 / ((din * din) as f64);
    ChoiOperator::from_parts(
        op.scale(normalization),
        normalization,
        map.input().labels(),
        map.output().labels(),
    )
}

/// Apply a map through its operator form: transpose the argument, trace it
/// against the stored operator over the input factors, undo the stored
/// normalization.
pub fn apply_via_choi(choi: &ChoiOperator, rho: &LabeledOperator) -> Result<LabeledOperator> {
    let mut expected = choi.inputs.clone();
    expected.sort();
    let mut got = rho.system().labels();
    got.sort();
    if expected != got {
        return Err(Error::ShapeMismatch(format!(
            "state on {} does not match the map inputs",
            rho.system()
        )));
    }
    // lift rho^T to the full system (identity on outputs), in op factor order
    let out_factors: Vec<(FactorLabel, usize)> = choi
        .op
        .system()
        .factors()
        .iter()
        .filter(|(l, _)| choi.outputs.contains(l))
        .copied()
        .collect();
    let out_dim: usize = out_factors.iter().map(|(_, d)| d).product();
    let identity = LabeledOperator::from_parts(
        PartySystem::new(out_factors)?,
        ComplexMatrix::identity(out_dim),
    );
    let lifted = rho
        .transpose()
        .tensor(&identity)?
        .permute_factors(&sorted_labels(choi.op.system()))?;
    let product = ComplexMatrix::matmul(choi.op.matrix(), lifted.matrix());
    let full = LabeledOperator::from_parts(choi.op.system().clone(), product);
    let traced = full.partial_trace(&choi.inputs)?;
    let result = traced.scale(1.0 / choi.normalization);
    // the product of two Hermitian matrices need not be Hermitian entrywise,
    // but the partial trace over the contracted pair is; symmetrize rounding
    let m = result.matrix();
    let sym = m.add(&m.adjoint()).scale(0.5);
    Ok(LabeledOperator::new(result.system().clone(), sym)?)
}

/// A bipartition of the operator form's factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiCut {
    /// One party's factors (its output and input together) against the rest.
    Party(Party),
    /// One party's input factors against everything else; for a single-party
    /// map this is the only cut there is.
    InputOutput(Party),
}

#[derive(Debug, Clone)]
pub struct CutReport {
    pub cut: ChoiCut,
    pub min_eig_pt: f64,
    pub ppt: bool,
    /// Whether PPT decides separability on this cut (total dimension at most
    /// 6) or is only a necessary condition.
    pub ppt_decides_separability: bool,
}

#[derive(Debug, Clone)]
pub struct PProperties {
    pub cuts: Vec<CutReport>,
    /// Whether the map preserves PPT-ness: all party cuts PPT when the map
    /// spans several parties, the input/output cut when it has just one.
    pub ppt_preserving: bool,
    pub tol: f64,
}

/// PPT status of the operator form across its cuts.
///
/// Party cuts carry the separability necessary condition and, for maps over
/// several parties, decide PPT-preservation; a map confined to one party has
/// no party cut, and preserving entanglement-related positivity there means
/// being PPT across its own input/output split. Separability is decided only
/// where positivity of the partial transpose suffices (cut dimension <= 6);
/// everywhere else PPT is reported as necessary evidence, never as a
/// separability claim.
pub fn check_p_properties(choi: &ChoiOperator, tol: f64) -> Result<PProperties> {
    let total = choi.op.dim();
    let parties = choi.op.system().parties();
    let mut cuts = Vec::new();
    let mut preserving = true;

    for &party in &parties {
        if parties.len() >= 2 {
            let pt = choi.op.partial_transpose_party(party)?;
            let min_eig_pt = pt.min_eig()?;
            let ppt = min_eig_pt >= -tol;
            preserving &= ppt;
            let party_dim = choi.op.system().party_dim(party);
            cuts.push(CutReport {
                cut: ChoiCut::Party(party),
                min_eig_pt,
                ppt,
                ppt_decides_separability: party_dim * (total / party_dim) <= 6,
            });
        }
        let party_inputs: Vec<FactorLabel> = choi
            .inputs
            .iter()
            .filter(|l| l.party == party)
            .copied()
            .collect();
        let has_output = choi.outputs.iter().any(|l| l.party == party);
        if party_inputs.is_empty() || !has_output {
            continue;
        }
        let pt = choi.op.partial_transpose(&party_inputs)?;
        let min_eig_pt = pt.min_eig()?;
        let ppt = min_eig_pt >= -tol;
        if parties.len() == 1 {
            preserving &= ppt;
        }
        let in_dim: usize = party_inputs
            .iter()
            .map(|&l| {
                let pos = choi.op.system().position(l).expect("input label");
                choi.op.system().factors()[pos].1
            })
            .product();
        cuts.push(CutReport {
            cut: ChoiCut::InputOutput(party),
            min_eig_pt,
            ppt,
            ppt_decides_separability: in_dim * (total / in_dim) <= 6,
        });
    }
    Ok(PProperties {
        cuts,
        ppt_preserving: preserving,
        tol,
    })
}

/// Both evaluation routes of the pairing between a witness and a map.
#[derive(Debug, Clone)]
pub struct PairingIdentity {
    /// tr( swap_on_outputs * map(rho) ), the protocol route.
    pub lhs: f64,
    /// tr( W_rho * transposed operator form ), the witness route.
    pub rhs: f64,
    /// Cauchy-Schwarz bound for the pairing magnitude, for relative
    /// agreement checks.
    pub scale: f64,
}

/// Evaluate tr[P^T E(rho)] against tr[W_rho E'] where E' is the operator
/// form, fully transposed and then partially transposed on the construction's
/// target party. The two must agree: this identity is what ties map
/// positivity structure to witness detection.
///
/// `rho` lives on the map's input labels; the witness is built in place as
/// ancilla-projector ⊗ rho^{T_target}.
pub fn witness_pairing_identity(
    rho: &LabeledOperator,
    choi: &ChoiOperator,
    construction: WitnessConstruction,
) -> Result<PairingIdentity> {
    let (left, right) = construction.ancilla_parties();
    let out_left = FactorLabel::new(left, 1);
    let out_right = FactorLabel::new(right, 1);
    if !choi.outputs.contains(&out_left)
        || !choi.outputs.contains(&out_right)
        || choi.outputs.len() != 2
    {
        return Err(Error::ShapeMismatch(
            "map outputs do not form the construction's ancilla pair".into(),
        ));
    }

    // protocol route
    let mapped = apply_via_choi(choi, rho)?;
    let p_anc = states::projector_p(out_left, out_right)?;
    let swap = p_anc
        .partial_transpose(&[out_left])?
        .permute_factors(&mapped.system().labels())?;
    let lhs = swap.pairing(&mapped)?;

    // witness route, on the raw operator form
    let transposed_state = rho.partial_transpose_party(construction.transpose_party())?;
    let witness_op = p_anc.tensor(&transposed_state)?;
    let e_prime = choi
        .raw_op()
        .transpose()
        .partial_transpose_party(construction.transpose_party())?;
    let witness_aligned = witness_op.permute_factors(&e_prime.system().labels())?;
    let rhs = witness_aligned.pairing(&e_prime)?;

    let scale = witness_aligned
        .matrix()
        .frobenius()
        .mul_add(e_prime.matrix().frobenius(), 1.0);
    Ok(PairingIdentity { lhs, rhs, scale })
}
