//! Labeled tensor factors and their grouping into parties.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Soft cap on the total Hilbert-space dimension; dense storage only.
pub const MAX_TOTAL_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn name(self) -> &'static str {
        match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One tensor factor: a party plus a copy/sub-factor index (A1, B2, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactorLabel {
    pub party: Party,
    pub index: u32,
}

impl FactorLabel {
    pub fn new(party: Party, index: u32) -> Self {
        Self { party, index }
    }
}

impl fmt::Display for FactorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.party, self.index)
    }
}

/// Ordered list of labeled factors with dimensions. The leftmost factor is
/// the slowest-varying index of the row-major matrix entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartySystem {
    factors: Vec<(FactorLabel, usize)>,
}

impl PartySystem {
    pub fn new(factors: Vec<(FactorLabel, usize)>) -> Result<Self> {
        let mut total: usize = 1;
        for (label, dim) in &factors {
            if label.index == 0 {
                return Err(Error::BadParameter(format!(
                    "factor index must be positive, got {label}"
                )));
            }
            if *dim < 2 {
                return Err(Error::BadDimension(*dim));
            }
            total = total
                .checked_mul(*dim)
                .filter(|&t| t <= MAX_TOTAL_DIM)
                .ok_or(Error::BadDimension(*dim))?;
        }
        for i in 0..factors.len() {
            for j in (i + 1)..factors.len() {
                if factors[i].0 == factors[j].0 {
                    return Err(Error::DuplicateLabel(factors[i].0.to_string()));
                }
            }
        }
        Ok(Self { factors })
    }

    /// Convenience constructor: one factor per party with index 1.
    pub fn simple(parties: &[(Party, usize)]) -> Result<Self> {
        Self::new(
            parties
                .iter()
                .map(|&(p, d)| (FactorLabel::new(p, 1), d))
                .collect(),
        )
    }

    pub fn factors(&self) -> &[(FactorLabel, usize)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&(_, d)| d).collect()
    }

    pub fn labels(&self) -> Vec<FactorLabel> {
        self.factors.iter().map(|&(l, _)| l).collect()
    }

    pub fn position(&self, label: FactorLabel) -> Option<usize> {
        self.factors.iter().position(|&(l, _)| l == label)
    }

    pub fn contains(&self, label: FactorLabel) -> bool {
        self.position(label).is_some()
    }

    /// Distinct parties in order of first appearance.
    pub fn parties(&self) -> Vec<Party> {
        let mut seen = Vec::new();
        for (label, _) in &self.factors {
            if !seen.contains(&label.party) {
                seen.push(label.party);
            }
        }
        seen
    }

    /// All factor labels belonging to one party, in factor order.
    pub fn party_labels(&self, party: Party) -> Vec<FactorLabel> {
        self.factors
            .iter()
            .filter(|(l, _)| l.party == party)
            .map(|&(l, _)| l)
            .collect()
    }

    /// Product of the dimensions of one party's factors.
    pub fn party_dim(&self, party: Party) -> usize {
        self.factors
            .iter()
            .filter(|(l, _)| l.party == party)
            .map(|(_, d)| d)
            .product()
    }

    /// Factor positions of the given labels, in system order.
    pub fn positions_of(&self, labels: &[FactorLabel]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            match self.position(l) {
                Some(p) => out.push(p),
                None => return Err(Error::UnknownLabel(l.to_string())),
            }
        }
        out.sort_unstable();
        out.dedup();
        if out.len() != labels.len() {
            return Err(Error::DuplicateLabel("repeated target label".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for PartySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(l, d)| format!("{l}(d={d})"))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_labels() {
        let l = FactorLabel::new(Party::A, 1);
        assert!(matches!(
            PartySystem::new(vec![(l, 2), (l, 2)]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(matches!(
            PartySystem::simple(&[(Party::A, 1)]),
            Err(Error::BadDimension(1))
        ));
    }

    #[test]
    fn rejects_total_dim_above_cap() {
        let sys = PartySystem::new(
            (1..=13)
                .map(|i| (FactorLabel::new(Party::A, i), 2))
                .collect(),
        );
        assert!(sys.is_err());
    }

    #[test]
    fn party_grouping() {
        let sys = PartySystem::new(vec![
            (FactorLabel::new(Party::B, 1), 2),
            (FactorLabel::new(Party::C, 1), 2),
            (FactorLabel::new(Party::A, 2), 2),
            (FactorLabel::new(Party::B, 2), 3),
        ])
        .unwrap();
        assert_eq!(sys.parties(), vec![Party::B, Party::C, Party::A]);
        assert_eq!(sys.party_dim(Party::B), 6);
        assert_eq!(sys.party_labels(Party::B).len(), 2);
        assert_eq!(sys.total_dim(), 24);
    }
}
