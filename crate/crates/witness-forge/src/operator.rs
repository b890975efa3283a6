//! Hermitian operator algebra over labeled tensor factors.
//!
//! The row-major convention is fixed once here: the leftmost factor of the
//! `PartySystem` is the slowest-varying index, so `tensor` is the plain
//! Kronecker product in factor order. Partial transpose, partial trace,
//! factor permutation and contractions are all pure index manipulations on
//! that layout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::labels::{FactorLabel, Party, PartySystem};
use crate::matrix::ComplexMatrix;
use crate::tol;

/// Hermitian operator together with the tensor-factor layout of its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    system: PartySystem,
    matrix: ComplexMatrix,
}

/// Full eigensystem of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.eigenvectors.rows())
            .map(|i| self.eigenvectors.get(i, k))
            .collect()
    }
}

impl LabeledOperator {
    /// Validating constructor: the matrix must be square, match the system
    /// dimension, contain only finite entries and be Hermitian within
    /// `HERM_REL_TOL * max|M|`. Violations are rejected, never repaired.
    pub fn new(system: PartySystem, matrix: ComplexMatrix) -> Result<Self> {
        let dim = system.total_dim();
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.rows(),
            });
        }
        if !matrix.all_finite() {
            return Err(Error::MalformedFile("non-finite matrix entry".into()));
        }
        let dev = matrix.hermiticity_deviation();
        let tolerance = tol::HERM_REL_TOL * matrix.max_abs().max(f64::MIN_POSITIVE);
        if dev > tolerance {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance,
            });
        }
        Ok(Self { system, matrix })
    }

    /// Constructor for matrices that are Hermitian by construction
    /// (tensor products, index shuffles, real-coefficient sums of such).
    pub(crate) fn from_parts(system: PartySystem, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(system.total_dim(), matrix.rows());
        Self { system, matrix }
    }

    pub fn system(&self) -> &PartySystem {
        &self.system
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(self.system.clone(), self.matrix.scale(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_system(other)?;
        Ok(Self::from_parts(
            self.system.clone(),
            self.matrix.add(&other.matrix),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_system(other)?;
        Ok(Self::from_parts(
            self.system.clone(),
            self.matrix.sub(&other.matrix),
        ))
    }

    fn check_same_system(&self, other: &Self) -> Result<()> {
        if self.system != other.system {
            return Err(Error::ShapeMismatch(format!(
                "systems differ: {} vs {}",
                self.system, other.system
            )));
        }
        Ok(())
    }

    /// <v|M|v> for a vector on the full space.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let mv = self.matrix.matvec(v);
        crate::matrix::inner(v, &mv).re
    }

    /// Kronecker product; factor lists concatenate, label sets must be
    /// disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for label in other.system.labels() {
            if self.system.contains(label) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
        }
        let mut factors = self.system.factors().to_vec();
        factors.extend_from_slice(other.system.factors());
        let system = PartySystem::new(factors)?;
        Ok(Self::from_parts(system, self.matrix.kron(&other.matrix)))
    }

    /// Transpose the computational-basis indices of the target factors only.
    pub fn partial_transpose(&self, targets: &[FactorLabel]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::BadParameter("empty transpose target set".into()));
        }
        let positions = self.system.positions_of(targets)?;
        let dims = self.system.dims();
        let sub_off = subset_offset_table(&dims, &positions);
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                let rp = r - sub_off[r] + sub_off[c];
                let cp = c - sub_off[c] + sub_off[r];
                out.set(r, c, self.matrix.get(rp, cp));
            }
        }
        Ok(Self::from_parts(self.system.clone(), out))
    }

    /// Partial transpose over every factor belonging to `party`.
    pub fn partial_transpose_party(&self, party: Party) -> Result<Self> {
        let labels = self.system.party_labels(party);
        if labels.is_empty() {
            return Err(Error::UnknownLabel(format!("{party} (no factors)")));
        }
        self.partial_transpose(&labels)
    }

    /// Full transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self::from_parts(self.system.clone(), self.matrix.transpose())
    }

    /// Trace out the target factors; the result lives on the remaining
    /// factors in their original order.
    pub fn partial_trace(&self, targets: &[FactorLabel]) -> Result<Self> {
        let positions = self.system.positions_of(targets)?;
        if positions.len() == self.system.len() {
            return Err(Error::CannotTraceAll);
        }
        if positions.is_empty() {
            return Err(Error::BadParameter("empty trace target set".into()));
        }
        let dims = self.system.dims();
        let tables = SubsetTables::build(&dims, &positions);
        let remaining: Vec<(FactorLabel, usize)> = self
            .system
            .factors()
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, f)| *f)
            .collect();
        let system = PartySystem::new(remaining)?;
        let mut out = ComplexMatrix::zeros(tables.rest_total, tables.rest_total);
        for rr in 0..tables.rest_total {
            for rc in 0..tables.rest_total {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..tables.sub_total {
                    let row = tables.embed_rest[rr] + tables.embed_sub[t];
                    let col = tables.embed_rest[rc] + tables.embed_sub[t];
                    acc += self.matrix.get(row, col);
                }
                out.set(rr, rc, acc);
            }
        }
        Ok(Self::from_parts(system, out))
    }

    /// Conjugate by the basis permutation that reorders the factors.
    pub fn permute_factors(&self, new_order: &[FactorLabel]) -> Result<Self> {
        if new_order.len() != self.system.len() {
            return Err(Error::NotAPermutation);
        }
        let mut old_positions = Vec::with_capacity(new_order.len());
        for &label in new_order {
            match self.system.position(label) {
                Some(p) if !old_positions.contains(&p) => old_positions.push(p),
                _ => return Err(Error::NotAPermutation),
            }
        }
        let old_dims = self.system.dims();
        let new_factors: Vec<(FactorLabel, usize)> = old_positions
            .iter()
            .map(|&p| self.system.factors()[p])
            .collect();
        let system = PartySystem::new(new_factors)?;
        let new_dims = system.dims();
        let new_strides = strides(&new_dims);
        let old_strides = strides(&old_dims);
        let d = self.dim();
        // map[old flat] -> new flat
        let mut map = vec![0usize; d];
        for (old, slot) in map.iter_mut().enumerate() {
            let mut n = 0usize;
            for (new_pos, &old_pos) in old_positions.iter().enumerate() {
                let comp = (old / old_strides[old_pos]) % old_dims[old_pos];
                n += comp * new_strides[new_pos];
            }
            *slot = n;
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out.set(map[r], map[c], self.matrix.get(r, c));
            }
        }
        Ok(Self::from_parts(system, out))
    }

    /// Reorder so each party's factors sit in one contiguous block,
    /// parties in A, B, C order.
    pub fn group_by_party(&self) -> Result<Self> {
        let mut order = Vec::new();
        for party in Party::ALL {
            order.extend(self.system.party_labels(party));
        }
        self.permute_factors(&order)
    }

    /// Full Hermitian eigensystem, eigenvalues ascending.
    pub fn eigen(&self) -> Result<Spectrum> {
        let dev = self.matrix.hermiticity_deviation();
        let tolerance = tol::HERM_REL_TOL * self.matrix.max_abs().max(f64::MIN_POSITIVE);
        if dev > tolerance {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance,
            });
        }
        let (eigenvalues, eigenvectors) = self.matrix.eigh()?;
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn min_eig(&self) -> Result<f64> {
        Ok(self.eigen()?.eigenvalues[0])
    }

    /// min eigenvalue >= -tol. `tol` is absolute; certificate-grade checks
    /// pass `tol::PSD_TOL`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eig()? >= -tol)
    }

    /// <v| M |v> contracted over the `targets` factors only; the result is an
    /// operator on the remaining factors. `v` is indexed over the target
    /// factors in system order, leftmost slowest. Hermitian in exact
    /// arithmetic, so summation-order noise is symmetrized away.
    pub fn contract(&self, targets: &[FactorLabel], v: &[Complex64]) -> Result<Self> {
        let raw = self.contract_bilinear(targets, v, v)?;
        let m = raw.matrix();
        let sym = m.add(&m.adjoint()).scale(0.5);
        Ok(Self::from_parts(raw.system().clone(), sym))
    }

    /// Two-sided variant: conj(v_left) on the bra side, v_right on the ket
    /// side. Hermitian only when v_left == v_right; callers combining blocks
    /// are responsible for overall Hermiticity.
    pub fn contract_bilinear(
        &self,
        targets: &[FactorLabel],
        v_left: &[Complex64],
        v_right: &[Complex64],
    ) -> Result<Self> {
        let positions = self.system.positions_of(targets)?;
        if positions.len() == self.system.len() {
            return Err(Error::BadParameter(
                "cannot contract every factor; use expectation()".into(),
            ));
        }
        let dims = self.system.dims();
        let tables = SubsetTables::build(&dims, &positions);
        if v_left.len() != tables.sub_total || v_right.len() != tables.sub_total {
            return Err(Error::DimensionMismatch {
                expected: tables.sub_total,
                got: v_left.len(),
            });
        }
        let remaining: Vec<(FactorLabel, usize)> = self
            .system
            .factors()
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, f)| *f)
            .collect();
        let system = PartySystem::new(remaining)?;
        let mut out = ComplexMatrix::zeros(tables.rest_total, tables.rest_total);
        for tr in 0..tables.sub_total {
            let vl = v_left[tr].conj();
            if vl == Complex64::new(0.0, 0.0) {
                continue;
            }
            for tc in 0..tables.sub_total {
                let w = vl * v_right[tc];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for rr in 0..tables.rest_total {
                    let row = tables.embed_rest[rr] + tables.embed_sub[tr];
                    for rc in 0..tables.rest_total {
                        let col = tables.embed_rest[rc] + tables.embed_sub[tc];
                        out.add_to(rr, rc, w * self.matrix.get(row, col));
                    }
                }
            }
        }
        Ok(Self::from_parts(system, out))
    }

    /// Rename factors without touching the matrix. The mapping must keep
    /// dimensions attached to the same slot and produce distinct labels.
    pub fn relabel(&self, map: impl Fn(FactorLabel) -> FactorLabel) -> Result<Self> {
        let factors: Vec<(FactorLabel, usize)> = self
            .system
            .factors()
            .iter()
            .map(|&(l, d)| (map(l), d))
            .collect();
        let system = PartySystem::new(factors)?;
        Ok(Self::from_parts(system, self.matrix.clone()))
    }

    /// Matrix product tr-compatible pairing tr(self * other).
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        self.check_same_system(other)?;
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.matrix.get(i, k) * other.matrix.get(k, i);
            }
        }
        Ok(acc.re)
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// For each full flat index, the part of it contributed by the subset
/// factors (so `flat - table[flat]` is the rest contribution).
fn subset_offset_table(dims: &[usize], positions: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let total: usize = dims.iter().product();
    let mut table = vec![0usize; total];
    for (flat, slot) in table.iter_mut().enumerate() {
        let mut off = 0usize;
        for &p in positions {
            let comp = (flat / st[p]) % dims[p];
            off += comp * st[p];
        }
        *slot = off;
    }
    table
}

/// Embedding tables for a factor subset: every full index decomposes
/// uniquely as `embed_rest[r] + embed_sub[s]`.
pub(crate) struct SubsetTables {
    pub sub_total: usize,
    pub rest_total: usize,
    pub embed_sub: Vec<usize>,
    pub embed_rest: Vec<usize>,
}

impl SubsetTables {
    pub(crate) fn build(dims: &[usize], positions: &[usize]) -> Self {
        let st = strides(dims);
        let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        let rest_positions: Vec<usize> =
            (0..dims.len()).filter(|p| !positions.contains(p)).collect();
        let rest_dims: Vec<usize> = rest_positions.iter().map(|&p| dims[p]).collect();
        let sub_total = sub_dims.iter().product();
        let rest_total = rest_dims.iter().product();
        let sub_strides = strides(&sub_dims);
        let rest_strides = strides(&rest_dims);

        let mut embed_sub = vec![0usize; sub_total];
        for (s, slot) in embed_sub.iter_mut().enumerate() {
            let mut full = 0usize;
            for (k, &p) in positions.iter().enumerate() {
                let comp = (s / sub_strides[k]) % sub_dims[k];
                full += comp * st[p];
            }
            *slot = full;
        }
        let mut embed_rest = vec![0usize; rest_total];
        for (r, slot) in embed_rest.iter_mut().enumerate() {
            let mut full = 0usize;
            for (k, &p) in rest_positions.iter().enumerate() {
                let comp = (r / rest_strides[k]) % rest_dims[k];
                full += comp * st[p];
            }
            *slot = full;
        }
        Self {
            sub_total,
            rest_total,
            embed_sub,
            embed_rest,
        }
    }
}

/// Assemble the full-space product vector from per-party vectors. Each party
/// vector is indexed over that party's factors in system order; the parties
/// must jointly cover the whole system.
pub fn product_vector(
    system: &PartySystem,
    parts: &[(Party, &[Complex64])],
) -> Result<Vec<Complex64>> {
    let dims = system.dims();
    let st = strides(&dims);
    for &(party, v) in parts {
        let expected = system.party_dim(party);
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: v.len(),
            });
        }
    }
    let covered: usize = parts.iter().map(|&(p, _)| system.party_dim(p)).product();
    if covered != system.total_dim() {
        return Err(Error::ShapeMismatch(
            "party vectors do not cover the system".into(),
        ));
    }
    // per-party component index of each full flat index
    let total = system.total_dim();
    let mut out = vec![Complex64::new(1.0, 0.0); total];
    for &(party, v) in parts {
        let positions: Vec<usize> = system
            .factors()
            .iter()
            .enumerate()
            .filter(|(_, (l, _))| l.party == party)
            .map(|(i, _)| i)
            .collect();
        let pdims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
        let pstrides = strides(&pdims);
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut comp = 0usize;
            for (k, &p) in positions.iter().enumerate() {
                comp += ((flat / st[p]) % dims[p]) * pstrides[k];
            }
            *slot *= v[comp];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::Party::{A, B, C};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit_sys(parties: &[Party]) -> PartySystem {
        PartySystem::new(
            parties
                .iter()
                .map(|&p| (FactorLabel::new(p, 1), 2))
                .collect(),
        )
        .unwrap()
    }

    fn diag(system: PartySystem, entries: &[f64]) -> LabeledOperator {
        let n = entries.len();
        let m = ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(entries[i]) } else { c(0.0) });
        LabeledOperator::new(system, m).unwrap()
    }

    #[test]
    fn tensor_identities() {
        let a = diag(qubit_sys(&[A]), &[1.0, 1.0]);
        let b = PartySystem::new(vec![(FactorLabel::new(B, 1), 2)]).unwrap();
        let b = diag(b, &[1.0, 1.0]);
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.dim(), 4);
        for i in 0..4 {
            assert_eq!(t.matrix().get(i, i), c(1.0));
        }
    }

    #[test]
    fn tensor_diagonal_kron() {
        let a = diag(qubit_sys(&[A]), &[1.0, 2.0]);
        let b = diag(qubit_sys(&[B]), &[3.0, 4.0]);
        let t = a.tensor(&b).unwrap();
        let got: Vec<f64> = (0..4).map(|i| t.matrix().get(i, i).re).collect();
        assert_eq!(got, vec![3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn tensor_rejects_duplicate_label() {
        let a = diag(qubit_sys(&[A]), &[1.0, 2.0]);
        assert!(matches!(
            a.tensor(&a),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn partial_transpose_diagonal_unchanged() {
        let op = diag(qubit_sys(&[A, B]), &[1.0, 2.0, 3.0, 4.0]);
        let pt = op.partial_transpose_party(A).unwrap();
        assert_eq!(pt.matrix(), op.matrix());
    }

    #[test]
    fn partial_transpose_unknown_label() {
        let op = diag(qubit_sys(&[A, B]), &[1.0, 2.0, 3.0, 4.0]);
        let missing = FactorLabel::new(C, 1);
        assert!(matches!(
            op.partial_transpose(&[missing]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn partial_trace_of_product() {
        let a = diag(qubit_sys(&[A]), &[1.0, 2.0]);
        let b = diag(qubit_sys(&[B]), &[3.0, 4.0]);
        let t = a.tensor(&b).unwrap();
        let back = t.partial_trace(&[FactorLabel::new(B, 1)]).unwrap();
        // tr(b) = 7
        assert_eq!(back.matrix().get(0, 0), c(7.0));
        assert_eq!(back.matrix().get(1, 1), c(14.0));
        assert!((back.trace() - t.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_all_rejected() {
        let op = diag(qubit_sys(&[A, B]), &[1.0, 2.0, 3.0, 4.0]);
        let labels = op.system().labels();
        assert!(matches!(
            op.partial_trace(&labels),
            Err(Error::CannotTraceAll)
        ));
    }

    #[test]
    fn permute_identity_is_bit_identical() {
        let op = diag(qubit_sys(&[A, B, C]), &[1., 2., 3., 4., 5., 6., 7., 8.]);
        let same = op.permute_factors(&op.system().labels()).unwrap();
        assert_eq!(same.matrix(), op.matrix());
    }

    #[test]
    fn permute_roundtrip_exact() {
        let sys = qubit_sys(&[A, B, C]);
        let m = ComplexMatrix::from_fn(8, 8, |i, j| {
            Complex64::new((i * 8 + j) as f64, if i < j { 1.0 } else { -1.0 })
        });
        // hermitize deterministically for a valid operator
        let m = m.add(&m.adjoint()).scale(0.5);
        let op = LabeledOperator::new(sys, m).unwrap();
        let order = vec![
            FactorLabel::new(C, 1),
            FactorLabel::new(A, 1),
            FactorLabel::new(B, 1),
        ];
        let there = op.permute_factors(&order).unwrap();
        let back = there.permute_factors(&op.system().labels()).unwrap();
        assert_eq!(back.matrix(), op.matrix());
    }

    #[test]
    fn permute_rejects_non_permutation() {
        let op = diag(qubit_sys(&[A, B]), &[1.0, 2.0, 3.0, 4.0]);
        let bad = vec![FactorLabel::new(A, 1), FactorLabel::new(A, 1)];
        assert!(matches!(
            op.permute_factors(&bad),
            Err(Error::NotAPermutation)
        ));
    }

    #[test]
    fn contract_matches_expectation() {
        let op = diag(qubit_sys(&[A, B]), &[1.0, 2.0, 3.0, 4.0]);
        let h = [c(1.0), c(0.0)];
        let reduced = op.contract(&[FactorLabel::new(A, 1)], &h).unwrap();
        assert_eq!(reduced.matrix().get(0, 0), c(1.0));
        assert_eq!(reduced.matrix().get(1, 1), c(2.0));
    }

    #[test]
    fn product_vector_ordering() {
        let sys = qubit_sys(&[A, B]);
        let v = product_vector(&sys, &[(A, &[c(0.0), c(1.0)]), (B, &[c(1.0), c(0.0)])]).unwrap();
        // |1>_A |0>_B = index 2 in row-major AB
        assert_eq!(v[2], c(1.0));
        assert_eq!(v[0], c(0.0));
    }

    #[test]
    fn non_hermitian_rejected() {
        let sys = qubit_sys(&[A]);
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(0.3));
        assert!(matches!(
            LabeledOperator::new(sys, m),
            Err(Error::NotHermitian { .. })
        ));
    }
}
