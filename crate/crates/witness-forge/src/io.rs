//! File formats.
//!
//! Operator files are JSON documents
//! `{"factors": [{"party":"A","index":1,"dim":2}, ...], "matrix": [[[re,im], ...], ...]}`
//! with the matrix row-major, one `[re,im]` pair per entry. Readers validate
//! squareness, the dimension product, entry finiteness and Hermiticity;
//! nothing is repaired silently. Kraus-map and operator-form files reuse the
//! same factor and matrix encodings.
//!
//! Every parser here accepts arbitrary untrusted bytes and returns a typed
//! error instead of panicking; the fuzz targets drive them directly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::choi::{ChoiOperator, KrausMap, KrausTerm};
use crate::error::{Error, Result};
use crate::labels::{FactorLabel, Party, PartySystem};
use crate::matrix::ComplexMatrix;
use crate::operator::LabeledOperator;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FactorSpec {
    party: String,
    index: u32,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct OperatorFile {
    factors: Vec<FactorSpec>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KrausTermFile {
    General(Vec<Vec<[f64; 2]>>),
    Separable(std::collections::BTreeMap<String, Vec<Vec<[f64; 2]>>>),
}

#[derive(Debug, Serialize, Deserialize)]
struct KrausFile {
    inputs: Vec<FactorSpec>,
    outputs: Vec<FactorSpec>,
    terms: Vec<KrausTermFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChoiFile {
    normalization: f64,
    outputs: Vec<LabelSpec>,
    operator: OperatorFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LabelSpec {
    party: String,
    index: u32,
}

fn parse_party(s: &str) -> Result<Party> {
    match s {
        "A" => Ok(Party::A),
        "B" => Ok(Party::B),
        "C" => Ok(Party::C),
        other => Err(Error::MalformedFile(format!(
            "unknown party {other:?} (expected A, B or C)"
        ))),
    }
}

fn parse_system(factors: &[FactorSpec]) -> Result<PartySystem> {
    if factors.is_empty() {
        return Err(Error::MalformedFile("empty factor list".into()));
    }
    let mut list = Vec::with_capacity(factors.len());
    for f in factors {
        list.push((FactorLabel::new(parse_party(&f.party)?, f.index), f.dim));
    }
    PartySystem::new(list)
}

fn parse_matrix(rows: &[Vec<[f64; 2]>], want_rows: usize, want_cols: usize) -> Result<ComplexMatrix> {
    if rows.len() != want_rows {
        return Err(Error::MalformedFile(format!(
            "matrix has {} rows, system dimension is {}",
            rows.len(),
            want_rows
        )));
    }
    let mut data = Vec::with_capacity(want_rows * want_cols);
    for row in rows {
        if row.len() != want_cols {
            return Err(Error::MalformedFile(format!(
                "matrix row has {} entries, expected {}",
                row.len(),
                want_cols
            )));
        }
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::MalformedFile("non-finite matrix entry".into()));
            }
            data.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::from_rows(want_rows, want_cols, data)
}

/// Parse and fully validate an operator file.
pub fn parse_operator_json(bytes: &[u8]) -> Result<LabeledOperator> {
    let file: OperatorFile = serde_json::from_slice(bytes)?;
    let system = parse_system(&file.factors)?;
    let dim = system.total_dim();
    let matrix = parse_matrix(&file.matrix, dim, dim)?;
    LabeledOperator::new(system, matrix)
}

fn factor_specs(system: &PartySystem) -> Vec<FactorSpec> {
    system
        .factors()
        .iter()
        .map(|(l, d)| FactorSpec {
            party: l.party.name().to_string(),
            index: l.index,
            dim: *d,
        })
        .collect()
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

pub fn operator_to_json(op: &LabeledOperator) -> String {
    let file = OperatorFile {
        factors: factor_specs(op.system()),
        matrix: matrix_rows(op.matrix()),
    };
    serde_json::to_string_pretty(&file).expect("operator serialization is infallible")
}

/// Parse and validate a Kraus-map file.
pub fn parse_kraus_json(bytes: &[u8]) -> Result<KrausMap> {
    let file: KrausFile = serde_json::from_slice(bytes)?;
    let input = parse_system(&file.inputs)?;
    let output = parse_system(&file.outputs)?;
    let mut terms = Vec::with_capacity(file.terms.len());
    for term in &file.terms {
        match term {
            KrausTermFile::General(rows) => {
                let m = parse_matrix(rows, output.total_dim(), input.total_dim())?;
                terms.push(KrausTerm::General(m));
            }
            KrausTermFile::Separable(blocks) => {
                let mut parsed = Vec::new();
                for (party, rows) in blocks {
                    let party = parse_party(party)?;
                    let out_dim = if output.party_labels(party).is_empty() {
                        1
                    } else {
                        output.party_dim(party)
                    };
                    let in_dim = if input.party_labels(party).is_empty() {
                        1
                    } else {
                        input.party_dim(party)
                    };
                    parsed.push((party, parse_matrix(rows, out_dim, in_dim)?));
                }
                terms.push(KrausTerm::Separable(parsed));
            }
        }
    }
    KrausMap::new(input, output, terms)
}

pub fn kraus_to_json(map: &KrausMap) -> String {
    let terms = map
        .terms()
        .iter()
        .map(|t| match t {
            KrausTerm::General(m) => KrausTermFile::General(matrix_rows(m)),
            KrausTerm::Separable(blocks) => KrausTermFile::Separable(
                blocks
                    .iter()
                    .map(|(p, m)| (p.name().to_string(), matrix_rows(m)))
                    .collect(),
            ),
        })
        .collect();
    let file = KrausFile {
        inputs: factor_specs(map.input()),
        outputs: factor_specs(map.output()),
        terms,
    };
    serde_json::to_string_pretty(&file).expect("kraus serialization is infallible")
}

/// Parse and validate an operator-form (Choi) file.
pub fn parse_choi_json(bytes: &[u8]) -> Result<ChoiOperator> {
    let file: ChoiFile = serde_json::from_slice(bytes)?;
    let system = parse_system(&file.operator.factors)?;
    let dim = system.total_dim();
    let matrix = parse_matrix(&file.operator.matrix, dim, dim)?;
    let op = LabeledOperator::new(system, matrix)?;
    let mut outputs = Vec::with_capacity(file.outputs.len());
    for l in &file.outputs {
        outputs.push(FactorLabel::new(parse_party(&l.party)?, l.index));
    }
    let inputs: Vec<FactorLabel> = op
        .system()
        .labels()
        .into_iter()
        .filter(|l| !outputs.contains(l))
        .collect();
    ChoiOperator::from_parts(op, file.normalization, inputs, outputs)
}

pub fn choi_to_json(choi: &ChoiOperator) -> String {
    let file = ChoiFile {
        normalization: choi.normalization(),
        outputs: choi
            .outputs()
            .iter()
            .map(|l| LabelSpec {
                party: l.party.name().to_string(),
                index: l.index,
            })
            .collect(),
        operator: OperatorFile {
            factors: factor_specs(choi.op().system()),
            matrix: matrix_rows(choi.op().matrix()),
        },
    };
    serde_json::to_string_pretty(&file).expect("choi serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn operator_roundtrip() {
        let rho = states::rho_alpha(0.85).unwrap();
        let json = operator_to_json(&rho);
        let back = parse_operator_json(json.as_bytes()).unwrap();
        assert_eq!(back.system(), rho.system());
        assert!(back.matrix().sub(rho.matrix()).max_abs() == 0.0);
    }

    #[test]
    fn rejects_wrong_dimension_product() {
        let bad = br#"{"factors":[{"party":"A","index":1,"dim":2}],"matrix":[[[1,0]]]}"#;
        assert!(matches!(
            parse_operator_json(bad),
            Err(Error::MalformedFile(_))
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let bad = br#"{"factors":[{"party":"A","index":1,"dim":2}],
            "matrix":[[[1,0],[5,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(
            parse_operator_json(bad),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_operator_json(b"not json").is_err());
        assert!(parse_operator_json(b"{}").is_err());
        assert!(parse_operator_json(b"").is_err());
        let unknown_party =
            br#"{"factors":[{"party":"D","index":1,"dim":2}],"matrix":[]}"#;
        assert!(parse_operator_json(unknown_party).is_err());
    }

    #[test]
    fn kraus_roundtrip() {
        let json = br#"{
            "inputs": [{"party":"A","index":2,"dim":2}],
            "outputs": [{"party":"A","index":1,"dim":2}],
            "terms": [{"general": [[[1,0],[0,0]],[[0,0],[1,0]]]}]
        }"#;
        let map = parse_kraus_json(json).unwrap();
        let again = parse_kraus_json(kraus_to_json(&map).as_bytes()).unwrap();
        assert_eq!(again.input().total_dim(), 2);
        assert_eq!(again.terms().len(), 1);
    }

    #[test]
    fn choi_roundtrip() {
        let map = parse_kraus_json(
            br#"{
            "inputs": [{"party":"A","index":2,"dim":2}],
            "outputs": [{"party":"A","index":1,"dim":2}],
            "terms": [{"general": [[[1,0],[0,0]],[[0,0],[1,0]]]}]
        }"#,
        )
        .unwrap();
        let choi = crate::choi::map_to_choi(&map).unwrap();
        let json = choi_to_json(&choi);
        let back = parse_choi_json(json.as_bytes()).unwrap();
        assert_eq!(back.normalization(), choi.normalization());
        assert!(back.op().matrix().sub(choi.op().matrix()).max_abs() == 0.0);
    }
}
