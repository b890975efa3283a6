//! N-copy distillability searches.
//!
//! A state is distillable across a cut exactly when some Schmidt-rank-2
//! vector (with a helper-party vector, in the three-party case) has negative
//! expectation on the partially transposed copies. The search below is a
//! three-block seesaw: helper vector, left pair, right pair, each block
//! update an exact minimal-eigenvector step, so the objective is
//! non-increasing and any negative value found is a hard certificate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::labels::{FactorLabel, Party};
use crate::matrix::{kron_vec, normalize, ComplexMatrix};
use crate::operator::{LabeledOperator, SubsetTables};
use crate::states::{self, Grouping};
use crate::tol;
use crate::verdict::{Certificate, ProductCertificate, Verdict, VerdictStatus};
use crate::witness::{WitnessConstruction, WitnessOperator};

/// |Psi> = |e1,f1> + |e2,f2>. The pairs need not be orthogonal: every
/// Schmidt-rank-<=2 vector admits this form, and the block updates stay
/// inside it. `canonicalize` produces the orthogonal-pair normal form.
#[derive(Debug, Clone)]
pub struct SchmidtRank2Vector {
    pub e1: Vec<Complex64>,
    pub e2: Vec<Complex64>,
    pub f1: Vec<Complex64>,
    pub f2: Vec<Complex64>,
}

impl SchmidtRank2Vector {
    pub fn left_dim(&self) -> usize {
        self.e1.len()
    }

    pub fn right_dim(&self) -> usize {
        self.f1.len()
    }

    /// The full vector on left ⊗ right, left factor slowest.
    pub fn full_vector(&self) -> Vec<Complex64> {
        let mut v = kron_vec(&self.e1, &self.f1);
        for (slot, add) in v.iter_mut().zip(kron_vec(&self.e2, &self.f2)) {
            *slot += add;
        }
        v
    }

    /// Best rank-2 approximation of an arbitrary vector on left ⊗ right,
    /// with the Schmidt weights split evenly over both sides.
    pub fn from_full(v: &[Complex64], left_dim: usize, right_dim: usize) -> Result<Self> {
        if v.len() != left_dim * right_dim {
            return Err(Error::DimensionMismatch {
                expected: left_dim * right_dim,
                got: v.len(),
            });
        }
        let coeff = ComplexMatrix::from_fn(left_dim, right_dim, |i, j| v[i * right_dim + j]);
        let (u, s, vt) = coeff.svd();
        let take = |k: usize| -> (Vec<Complex64>, Vec<Complex64>) {
            if k >= s.len() || s[k] <= 0.0 {
                return (
                    vec![Complex64::new(0.0, 0.0); left_dim],
                    vec![Complex64::new(0.0, 0.0); right_dim],
                );
            }
            let w = s[k].sqrt();
            let e: Vec<Complex64> = (0..left_dim).map(|i| u.get(i, k) * w).collect();
            let f: Vec<Complex64> = (0..right_dim).map(|j| vt.get(k, j) * w).collect();
            (e, f)
        };
        let (e1, f1) = take(0);
        let (e2, f2) = take(1);
        Ok(Self { e1, e2, f1, f2 })
    }

    /// Orthogonal-pair normal form with balanced weights, normalized to a
    /// unit full vector.
    pub fn canonicalize(&self) -> Result<Self> {
        let mut full = self.full_vector();
        normalize(&mut full);
        Self::from_full(&full, self.left_dim(), self.right_dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistillCut {
    /// Two-party state, pair A-B.
    Bipartite,
    /// Helper A assists a B-C pair.
    BC,
    /// Helper C assists an A-B pair.
    AB,
    /// Helper B assists an A-C pair.
    AC,
}

impl DistillCut {
    pub fn name(self) -> &'static str {
        match self {
            DistillCut::Bipartite => "bipartite",
            DistillCut::BC => "bc",
            DistillCut::AB => "ab",
            DistillCut::AC => "ac",
        }
    }

    fn helper(self) -> Option<Party> {
        match self {
            DistillCut::Bipartite => None,
            DistillCut::BC => Some(Party::A),
            DistillCut::AB => Some(Party::C),
            DistillCut::AC => Some(Party::B),
        }
    }

    /// (left, right) pair parties, alphabetical so the left block is the
    /// slower index in the party-major layout.
    fn pair(self) -> (Party, Party) {
        match self {
            DistillCut::Bipartite | DistillCut::AB => (Party::A, Party::B),
            DistillCut::BC => (Party::B, Party::C),
            DistillCut::AC => (Party::A, Party::C),
        }
    }

    /// The party whose factors get transposed in the negativity condition.
    fn transpose_party(self) -> Party {
        match self {
            DistillCut::Bipartite => Party::A,
            DistillCut::BC | DistillCut::AC => Party::C,
            DistillCut::AB => Party::B,
        }
    }

    /// The witness construction probing the same cut.
    pub fn witness_construction(self) -> WitnessConstruction {
        match self {
            DistillCut::Bipartite => WitnessConstruction::BipartiteWX,
            DistillCut::BC => WitnessConstruction::TripartiteA,
            DistillCut::AB => WitnessConstruction::TripartiteC,
            DistillCut::AC => WitnessConstruction::TripartiteB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistillStatus {
    Distillable,
    Inconclusive,
}

/// A (helper, Schmidt-rank-2) pair attaining a negative expectation,
/// re-evaluated through a dense quadratic form on the full space.
#[derive(Debug, Clone)]
pub struct DistillCertificate {
    pub psi: SchmidtRank2Vector,
    /// Unit helper vector |h>, absent for bipartite cuts.
    pub helper: Option<Vec<Complex64>>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct DistillVerdict {
    pub status: DistillStatus,
    pub best_value: f64,
    pub copies: usize,
    pub cut: DistillCut,
    pub certificate: Option<DistillCertificate>,
    pub restarts_used: usize,
}

impl DistillVerdict {
    pub fn is_distillable(&self) -> bool {
        self.status == DistillStatus::Distillable
    }
}

/// Exact criterion in 2x2: distillable iff the partial transpose has a
/// negative eigenvalue.
pub fn two_qubit_distillable(rho: &LabeledOperator) -> Result<bool> {
    let dims = rho.system().dims();
    if rho.system().parties().len() != 2 || dims != vec![2, 2] {
        return Err(Error::WrongDimensions(format!(
            "two-qubit test needs a 2x2 two-party state, got {}",
            rho.system()
        )));
    }
    let min = rho.partial_transpose_party(Party::B)?.min_eig()?;
    Ok(min < -tol::TOL_NEG)
}

struct SearchSpace {
    /// (rho^{(x)N})^{T_y}, party-major.
    op: LabeledOperator,
    helper_labels: Vec<FactorLabel>,
    left_labels: Vec<FactorLabel>,
    right_labels: Vec<FactorLabel>,
    helper_dim: usize,
    left_dim: usize,
    right_dim: usize,
}

impl SearchSpace {
    fn build(rho: &LabeledOperator, copies: usize, cut: DistillCut) -> Result<Self> {
        let expected_parties = if cut == DistillCut::Bipartite { 2 } else { 3 };
        let parties = rho.system().parties();
        if parties.len() != expected_parties {
            return Err(Error::WrongPartyCount {
                expected: expected_parties,
                got: parties.len(),
            });
        }
        let min = rho.min_eig()?;
        if min < -tol::PSD_TOL * rho.matrix().max_abs().max(1.0) {
            return Err(Error::NotPsd { min_eig: min });
        }
        let copied = states::n_copies(rho, copies, Grouping::PartyMajor)?;
        let op = copied.partial_transpose_party(cut.transpose_party())?;
        let (left, right) = cut.pair();
        let helper_labels = cut
            .helper()
            .map(|p| op.system().party_labels(p))
            .unwrap_or_default();
        let left_labels = op.system().party_labels(left);
        let right_labels = op.system().party_labels(right);
        let helper_dim = cut.helper().map_or(1, |p| op.system().party_dim(p));
        Ok(Self {
            helper_dim,
            left_dim: op.system().party_dim(left),
            right_dim: op.system().party_dim(right),
            op,
            helper_labels,
            left_labels,
            right_labels,
        })
    }

    /// <h| op |h> on the pair space; the whole operator when there is no
    /// helper.
    fn project_helper(&self, h: &[Complex64]) -> Result<LabeledOperator> {
        if self.helper_labels.is_empty() {
            Ok(self.op.clone())
        } else {
            self.op.contract(&self.helper_labels, h)
        }
    }

    /// Independent certificate evaluation: assemble the full-space vector
    /// h ⊗ Psi (respecting factor positions) and take one dense quadratic
    /// form.
    fn evaluate(&self, h: Option<&[Complex64]>, psi_full: &[Complex64]) -> f64 {
        if self.helper_labels.is_empty() {
            return self.op.expectation(psi_full);
        }
        let h = h.expect("helper cut evaluates with a helper vector");
        let positions: Vec<usize> = self
            .helper_labels
            .iter()
            .map(|&l| self.op.system().position(l).expect("helper label"))
            .collect();
        let tables = SubsetTables::build(&self.op.system().dims(), &positions);
        let mut v = vec![Complex64::new(0.0, 0.0); self.op.dim()];
        for (r, &base) in tables.embed_rest.iter().enumerate() {
            if psi_full[r] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (t, &off) in tables.embed_sub.iter().enumerate() {
                v[base + off] = psi_full[r] * h[t];
            }
        }
        self.op.expectation(&v)
    }
}

/// Orthonormalize the fixed-side pair and carry the moving-side pair along so
/// the represented vector is unchanged: with the fixed pair orthonormal, the
/// block update becomes a plain Hermitian eigenproblem and a unit block
/// vector means a unit |Psi>.
fn reexpress(
    moving: (&[Complex64], &[Complex64]),
    fixed: (&[Complex64], &[Complex64]),
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let dim = fixed.0.len();
    let stack = ComplexMatrix::from_fn(2, dim, |i, j| if i == 0 { fixed.0[j] } else { fixed.1[j] });
    let (u, s, vt) = stack.svd();
    let f_new_1: Vec<Complex64> = (0..dim).map(|j| vt.get(0, j)).collect();
    let f_new_2: Vec<Complex64> = (0..dim).map(|j| vt.get(1, j)).collect();
    let mdim = moving.0.len();
    let mut m_new_1 = vec![Complex64::new(0.0, 0.0); mdim];
    let mut m_new_2 = vec![Complex64::new(0.0, 0.0); mdim];
    // fixed_j = sum_m U[j,m] s[m] ftilde_m, so moving_new_m = sum_j U[j,m] s[m] moving_j
    for j in 0..2 {
        let old = if j == 0 { moving.0 } else { moving.1 };
        for (m, slot) in [&mut m_new_1, &mut m_new_2].into_iter().enumerate() {
            if m >= s.len() || s[m] == 0.0 {
                continue;
            }
            let w = u.get(j, m) * s[m];
            for (dst, &src) in slot.iter_mut().zip(old) {
                *dst += w * src;
            }
        }
    }
    (m_new_1, m_new_2, f_new_1, f_new_2)
}

/// Quadratic form of the pair objective on the concatenated moving-side pair
/// (m=0 block slow): K[(m,r),(m',c)] = <fixed_m| M[(r,.),(c,.)] |fixed_m'>.
fn pair_block_operator(
    projected: &LabeledOperator,
    fixed_labels: &[FactorLabel],
    fixed: (&[Complex64], &[Complex64]),
    moving_dim: usize,
) -> Result<ComplexMatrix> {
    let mut k = ComplexMatrix::zeros(2 * moving_dim, 2 * moving_dim);
    let pairs = [fixed.0, fixed.1];
    for m in 0..2 {
        for mp in m..2 {
            let block = projected.contract_bilinear(fixed_labels, pairs[m], pairs[mp])?;
            for r in 0..moving_dim {
                for c in 0..moving_dim {
                    let v = block.matrix().get(r, c);
                    k.set(m * moving_dim + r, mp * moving_dim + c, v);
                    if mp != m {
                        k.set(mp * moving_dim + c, m * moving_dim + r, v.conj());
                    }
                }
            }
        }
    }
    Ok(k)
}

struct DistillOutcome {
    value: f64,
    h: Option<Vec<Complex64>>,
    psi: SchmidtRank2Vector,
}

fn run_restart(
    space: &SearchSpace,
    cfg: &SearchConfig,
    restart: usize,
) -> Result<DistillOutcome> {
    let mut rng = cfg.rng_for_restart(restart);
    let scale = space.op.matrix().max_abs().max(1.0);
    let has_helper = !space.helper_labels.is_empty();

    // structured seeds walk the helper's computational basis and start the
    // pair at the rank-2 truncation of the most negative eigenvector of the
    // projected operator; random seeds draw everything fresh.
    let structured = if has_helper {
        space.helper_dim.min(cfg.restarts / 2)
    } else {
        1.min(cfg.restarts)
    };

    let mut h: Option<Vec<Complex64>> = if has_helper {
        Some(if restart < structured {
            states::basis(space.helper_dim, restart)
        } else {
            random_unit_vec(space.helper_dim, &mut rng)
        })
    } else {
        None
    };

    let mut psi = if restart < structured {
        let projected = space.project_helper(h.as_deref().unwrap_or(&[]))?;
        let spectrum = projected.eigen()?;
        SchmidtRank2Vector::from_full(
            &spectrum.eigenvector(0),
            space.left_dim,
            space.right_dim,
        )?
    } else {
        SchmidtRank2Vector {
            e1: random_unit_vec(space.left_dim, &mut rng),
            e2: random_unit_vec(space.left_dim, &mut rng),
            f1: random_unit_vec(space.right_dim, &mut rng),
            f2: random_unit_vec(space.right_dim, &mut rng),
        }
    };

    let mut value = f64::INFINITY;
    let mut running = f64::INFINITY;
    let mut monotone = |v: f64, running: &mut f64| {
        debug_assert!(
            v <= *running + 1e-7 * scale,
            "distill seesaw objective increased: {running} -> {v}"
        );
        *running = v;
    };
    for _ in 0..cfg.max_iters {
        // helper block: exact minimal eigenvector of the Psi-contracted form
        if has_helper {
            let mut psi_full = psi.full_vector();
            normalize(&mut psi_full);
            let pair_labels: Vec<FactorLabel> = space
                .left_labels
                .iter()
                .chain(space.right_labels.iter())
                .copied()
                .collect();
            let contracted = space.op.contract(&pair_labels, &psi_full)?;
            let spectrum = contracted.eigen()?;
            monotone(spectrum.min(), &mut running);
            let mut hv = spectrum.eigenvector(0);
            normalize(&mut hv);
            h = Some(hv);
        }
        let projected = space.project_helper(h.as_deref().unwrap_or(&[]))?;

        // left block
        let (e1, e2, f1, f2) = reexpress((&psi.e1, &psi.e2), (&psi.f1, &psi.f2));
        psi = SchmidtRank2Vector { e1, e2, f1, f2 };
        let k = pair_block_operator(
            &projected,
            &space.right_labels,
            (&psi.f1, &psi.f2),
            space.left_dim,
        )?;
        let (vals, vecs) = k.eigh()?;
        monotone(vals[0], &mut running);
        let column: Vec<Complex64> = (0..2 * space.left_dim).map(|i| vecs.get(i, 0)).collect();
        psi.e1 = column[..space.left_dim].to_vec();
        psi.e2 = column[space.left_dim..].to_vec();

        // right block
        let (f1, f2, e1, e2) = reexpress((&psi.f1, &psi.f2), (&psi.e1, &psi.e2));
        psi = SchmidtRank2Vector { e1, e2, f1, f2 };
        let k = pair_block_operator(
            &projected,
            &space.left_labels,
            (&psi.e1, &psi.e2),
            space.right_dim,
        )?;
        let (vals, vecs) = k.eigh()?;
        let column: Vec<Complex64> = (0..2 * space.right_dim).map(|i| vecs.get(i, 0)).collect();
        psi.f1 = column[..space.right_dim].to_vec();
        psi.f2 = column[space.right_dim..].to_vec();

        let sweep_value = vals[0];
        if (value - sweep_value).abs() <= tol::SEESAW_CONVERGENCE * scale {
            break;
        }
        value = sweep_value;
    }

    let psi = psi.canonicalize()?;
    let mut psi_full = psi.full_vector();
    normalize(&mut psi_full);
    let value = space.evaluate(h.as_deref(), &psi_full);
    Ok(DistillOutcome { value, h, psi })
}

fn random_unit_vec(dim: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Complex64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    normalize(&mut v);
    v
}

fn search(rho: &LabeledOperator, copies: usize, cut: DistillCut, cfg: &SearchConfig) -> Result<DistillVerdict> {
    let space = SearchSpace::build(rho, copies, cut)?;
    let outcomes: Vec<DistillOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(&space, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let best = outcomes
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(_, o)| o)
        .expect("at least one restart");

    if best.value < -cfg.tol_neg {
        return Ok(DistillVerdict {
            status: DistillStatus::Distillable,
            best_value: best.value,
            copies,
            cut,
            certificate: Some(DistillCertificate {
                psi: best.psi.clone(),
                helper: best.h.clone(),
                value: best.value,
            }),
            restarts_used: cfg.restarts,
        });
    }
    Ok(DistillVerdict {
        status: DistillStatus::Inconclusive,
        best_value: best.value,
        copies,
        cut,
        certificate: None,
        restarts_used: cfg.restarts,
    })
}

/// Schmidt-rank-2 search on N copies of a two-party state.
pub fn distill_search_bipartite(
    rho: &LabeledOperator,
    copies: usize,
    cfg: &SearchConfig,
) -> Result<DistillVerdict> {
    search(rho, copies, DistillCut::Bipartite, cfg)
}

/// Helper-assisted search on N copies of a three-party state, B-C pair.
pub fn distill_search_bc(
    rho: &LabeledOperator,
    copies: usize,
    cfg: &SearchConfig,
) -> Result<DistillVerdict> {
    search(rho, copies, DistillCut::BC, cfg)
}

/// Any cut; three-party cuts differ only by which party plays the helper.
pub fn distill_search(
    rho: &LabeledOperator,
    copies: usize,
    cut: DistillCut,
    cfg: &SearchConfig,
) -> Result<DistillVerdict> {
    search(rho, copies, cut, cfg)
}

/// Re-evaluate a distillation certificate from scratch against the state it
/// claims to distill.
pub fn reevaluate_certificate(
    rho: &LabeledOperator,
    copies: usize,
    cut: DistillCut,
    cert: &DistillCertificate,
) -> Result<f64> {
    let space = SearchSpace::build(rho, copies, cut)?;
    let mut psi_full = cert.psi.full_vector();
    normalize(&mut psi_full);
    Ok(space.evaluate(cert.helper.as_deref(), &psi_full))
}

/// Translate a distillation certificate into the product vector that refutes
/// witness condition (i) on the matching construction: each pair party takes
/// the maximally entangled combination of its ancilla qubit with its Schmidt
/// component, the helper keeps |h>.
pub fn product_certificate_from_distill(
    w: &WitnessOperator,
    cert: &DistillCertificate,
) -> Result<ProductCertificate> {
    let construction = w.construction();
    let (left_anc, right_anc) = construction.ancilla_parties();
    let psi = cert.psi.canonicalize()?;

    let entangle = |g1: &[Complex64], g2: &[Complex64]| -> Vec<Complex64> {
        let mut v = kron_vec(&states::basis(2, 0), g1);
        for (slot, add) in v.iter_mut().zip(kron_vec(&states::basis(2, 1), g2)) {
            *slot += add;
        }
        normalize(&mut v);
        v
    };

    let mut parts: Vec<(Party, Vec<Complex64>)> = Vec::new();
    if let Some(h) = &cert.helper {
        let mut h = h.clone();
        normalize(&mut h);
        let helper_party = w
            .op()
            .system()
            .parties()
            .into_iter()
            .find(|&p| p != left_anc && p != right_anc)
            .ok_or_else(|| Error::WrongPartyCount {
                expected: 3,
                got: 2,
            })?;
        parts.push((helper_party, h));
    }
    parts.push((left_anc, entangle(&psi.e1, &psi.e2)));
    parts.push((right_anc, entangle(&psi.f1, &psi.f2)));
    parts.sort_by_key(|&(p, _)| p);

    let borrowed: Vec<(Party, &[Complex64])> =
        parts.iter().map(|(p, v)| (*p, v.as_slice())).collect();
    let full = crate::operator::product_vector(w.op().system(), &borrowed)?;
    let value = w.op().expectation(&full);
    Ok(ProductCertificate { parts, value })
}

/// Verify that a supplied PPT operator activates N copies of `rho` across a
/// cut: the operator must pass PSD and every-party-cut PPT checks, and its
/// pairing with the matching witness must be negative. The pairing is
/// computed along both routes of the map/operator isomorphism and must
/// agree; `Proven` means activation is certified by (E, the pairing).
pub fn verify_activation(
    rho: &LabeledOperator,
    copies: usize,
    e: &LabeledOperator,
    cut: DistillCut,
    cfg: &SearchConfig,
) -> Result<Verdict> {
    let construction = cut.witness_construction();
    let copied = states::n_copies(rho, copies, Grouping::PartyMajor)?;
    let source = copied.relabel(|l| FactorLabel::new(l.party, l.index + 1))?;
    let choi = crate::choi::ChoiOperator::from_state(e, &source, construction)?;

    // E must represent a PPT-preserving map: PSD and PPT on every party cut
    let min_e = choi.op().min_eig()?;
    if min_e < -cfg.psd_tol {
        return Err(Error::NotPsd { min_eig: min_e });
    }
    for party in choi.op().system().parties() {
        let min_pt = choi.op().partial_transpose_party(party)?.min_eig()?;
        if min_pt < -cfg.psd_tol {
            return Err(Error::NotPpt {
                cut: party.name().into(),
                min_eig: min_pt,
            });
        }
    }

    let identity = crate::choi::witness_pairing_identity(&source, &choi, construction)?;
    if (identity.lhs - identity.rhs).abs() > tol::PAIRING_REL_TOL * identity.scale {
        return Err(Error::Inconsistency(format!(
            "pairing routes disagree: {} vs {}",
            identity.lhs, identity.rhs
        )));
    }

    let pairing = identity.lhs;
    Ok(Verdict {
        status: if pairing < -cfg.tol_neg {
            VerdictStatus::Proven
        } else {
            VerdictStatus::Inconclusive
        },
        best_value: pairing,
        restarts_used: 0,
        certificate: Some(Certificate::PptDetector { pairing }),
    })
}
