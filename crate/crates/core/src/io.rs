//! JSON state and basis files.
//!
//! State file: `{"dims": [..], "matrix": [[[re, im], ..], ..], "label": ..}`
//! (row-major) or the same with `"vector": [[re, im], ..]` instead of
//! `"matrix"`. Basis file: `{"dim": d, "vectors": [[[re, im], ..], ..]}`
//! with one basis vector per row.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::measurements::ProjectiveBasis;
use crate::qstate::{check_dims, DensityMatrix, PureState};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Parsed state-file content.
#[derive(Debug, Clone)]
pub enum StateData {
    Matrix(DensityMatrix),
    Vector(PureState),
}

impl StateData {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateData::Matrix(m) => m.dims(),
            StateData::Vector(v) => v.dims(),
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            StateData::Matrix(m) => m.label(),
            StateData::Vector(v) => v.label(),
        }
    }

    pub fn with_label(self, label: impl Into<String>) -> Self {
        match self {
            StateData::Matrix(m) => StateData::Matrix(m.with_label(label)),
            StateData::Vector(v) => StateData::Vector(v.with_label(label)),
        }
    }

    /// Density matrix, converting vectors to projectors.
    pub fn into_density(self) -> DensityMatrix {
        match self {
            StateData::Matrix(m) => m,
            StateData::Vector(v) => v.projector(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            StateData::Vector(v) => Some(v),
            StateData::Matrix(_) => None,
        }
    }
}

type Pair = [f64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    dim: usize,
    vectors: Vec<Vec<Pair>>,
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn json_error(e: serde_json::Error) -> Error {
    parse_error(format!("line {}, column {}", e.line(), e.column()), e.to_string())
}

fn validation(e: Error) -> Error {
    if e.is_validation() {
        Error::Validation(Box::new(e))
    } else {
        e
    }
}

fn to_complex(pair: &Pair, field: impl Fn() -> String) -> Result<C64> {
    if !pair[0].is_finite() || !pair[1].is_finite() {
        return Err(parse_error(field(), "non-finite number"));
    }
    Ok(C64::new(pair[0], pair[1]))
}

fn to_vector(entries: &[Pair], expected: usize, field: &str) -> Result<CVector> {
    if entries.len() != expected {
        return Err(parse_error(
            field,
            format!("expected {expected} entries, found {}", entries.len()),
        ));
    }
    let data = entries
        .iter()
        .enumerate()
        .map(|(i, p)| to_complex(p, || format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(CVector::from_vec(data))
}

pub fn parse_state_str(text: &str) -> Result<StateData> {
    let raw: RawState = serde_json::from_str(text).map_err(json_error)?;
    let d = check_dims(&raw.dims).map_err(|e| parse_error("dims", e.to_string()))?;
    let data = match (raw.matrix, raw.vector) {
        (Some(rows), None) => {
            if rows.len() != d {
                return Err(parse_error(
                    "matrix",
                    format!("dims give {d} rows, found {}", rows.len()),
                ));
            }
            let mut m = CMatrix::zeros(d, d);
            for (r, row) in rows.iter().enumerate() {
                let v = to_vector(row, d, &format!("matrix[{r}]"))?;
                m.row_mut(r).copy_from(&v.transpose());
            }
            StateData::Matrix(DensityMatrix::validate(m, &raw.dims).map_err(validation)?)
        }
        (None, Some(entries)) => {
            let v = to_vector(&entries, d, "vector")?;
            StateData::Vector(PureState::new(&raw.dims, v).map_err(validation)?)
        }
        (Some(_), Some(_)) => return Err(parse_error("matrix/vector", "give exactly one of matrix or vector")),
        (None, None) => return Err(parse_error("matrix/vector", "missing matrix or vector")),
    };
    Ok(match raw.label {
        Some(label) => data.with_label(label),
        None => data,
    })
}

pub fn read_state(path: impl AsRef<Path>) -> Result<StateData> {
    parse_state_str(&std::fs::read_to_string(path)?)
}

/// Reads a state file as a density matrix (vectors become projectors).
pub fn read_density(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    Ok(read_state(path)?.into_density())
}

fn pairs(v: impl Iterator<Item = C64>) -> Vec<Pair> {
    v.map(|z| [z.re, z.im]).collect()
}

pub fn state_to_json(state: &StateData) -> String {
    let raw = match state {
        StateData::Matrix(m) => RawState {
            dims: m.dims().to_vec(),
            matrix: Some(
                m.elements()
                    .row_iter()
                    .map(|row| pairs(row.iter().copied()))
                    .collect(),
            ),
            vector: None,
            label: m.label().map(str::to_string),
        },
        StateData::Vector(v) => RawState {
            dims: v.dims().to_vec(),
            matrix: None,
            vector: Some(pairs(v.amplitudes().iter().copied())),
            label: v.label().map(str::to_string),
        },
    };
    serde_json::to_string_pretty(&raw).expect("state serializes")
}

pub fn write_state(state: &StateData, path: impl AsRef<Path>) -> Result<()> {
    let mut text = state_to_json(state);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn parse_basis_str(text: &str) -> Result<ProjectiveBasis> {
    let raw: RawBasis = serde_json::from_str(text).map_err(json_error)?;
    if raw.dim < 2 {
        return Err(parse_error("dim", format!("dimension must be >= 2, got {}", raw.dim)));
    }
    if raw.vectors.len() != raw.dim {
        return Err(parse_error(
            "vectors",
            format!("expected {} vectors, found {}", raw.dim, raw.vectors.len()),
        ));
    }
    let vectors = raw
        .vectors
        .iter()
        .enumerate()
        .map(|(k, v)| to_vector(v, raw.dim, &format!("vectors[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    ProjectiveBasis::from_vectors(&vectors).map_err(validation)
}

pub fn read_basis(path: impl AsRef<Path>) -> Result<ProjectiveBasis> {
    parse_basis_str(&std::fs::read_to_string(path)?)
}

pub fn basis_to_json(basis: &ProjectiveBasis) -> String {
    let raw = RawBasis {
        dim: basis.dim(),
        vectors: basis
            .frame()
            .column_iter()
            .map(|c| pairs(c.iter().copied()))
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("basis serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::random_mixed;
    use crate::witness::witness_w;

    #[test]
    fn round_trip_is_exact() {
        let rho = random_mixed(&[2, 3], 4, 9).unwrap().with_label("r");
        let data = StateData::Matrix(rho.clone());
        let back = parse_state_str(&state_to_json(&data)).unwrap();
        assert_eq!(back.label(), Some("r"));
        assert_eq!(back.into_density().elements(), rho.elements());

        let psi = crate::qstate::random_pure(&[3, 2], 4).unwrap();
        let back = parse_state_str(&state_to_json(&StateData::Vector(psi.clone()))).unwrap();
        assert_eq!(back.as_pure().unwrap().amplitudes(), psi.amplitudes());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let rho = random_mixed(&[2, 2], 2, 1).unwrap();
        write_state(&StateData::Matrix(rho.clone()), &path).unwrap();
        assert_eq!(read_density(&path).unwrap().elements(), rho.elements());
        assert!(matches!(read_state(dir.path().join("missing.json")), Err(Error::Io(_))));
    }

    #[test]
    fn vector_and_matrix_files_agree() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let vec_file = format!(r#"{{"dims": [2, 2], "vector": [[{s}, 0], [0, 0], [0, 0], [{s}, 0]]}}"#);
        let mat_file = r#"{"dims": [2, 2], "matrix": [
            [[0.5, 0], [0, 0], [0, 0], [0.5, 0]],
            [[0, 0], [0, 0], [0, 0], [0, 0]],
            [[0, 0], [0, 0], [0, 0], [0, 0]],
            [[0.5, 0], [0, 0], [0, 0], [0.5, 0]]]}"#;
        let a = parse_state_str(&vec_file).unwrap().into_density();
        let b = parse_state_str(mat_file).unwrap().into_density();
        assert!((a.elements() - b.elements()).norm() < 1e-15);
        let (wa, wb) = (witness_w(&a).unwrap(), witness_w(&b).unwrap());
        assert!((wa.value - wb.value).abs() < 1e-12);
    }

    #[test]
    fn parse_errors() {
        let bad_size = r#"{"dims": [2, 2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}"#;
        assert!(matches!(parse_state_str(bad_size), Err(Error::Parse { .. })));
        let short_row = r#"{"dims": [2], "matrix": [[[1, 0]], [[0, 0], [0, 0]]]}"#;
        match parse_state_str(short_row) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "matrix[0]"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_state_str("{"), Err(Error::Parse { .. })));
        let both = r#"{"dims": [2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]], "vector": [[1, 0], [0, 0]]}"#;
        assert!(matches!(parse_state_str(both), Err(Error::Parse { .. })));
        let bad_dims = r#"{"dims": [1], "vector": [[1, 0]]}"#;
        assert!(matches!(parse_state_str(bad_dims), Err(Error::Parse { .. })));
    }

    #[test]
    fn validation_errors() {
        let not_psd = r#"{"dims": [2], "matrix": [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]}"#;
        let err = parse_state_str(not_psd).unwrap_err();
        assert!(matches!(err, Error::Validation(_)) && err.is_validation());
        let unnormalized = r#"{"dims": [2], "vector": [[1, 0], [1, 0]]}"#;
        assert!(parse_state_str(unnormalized).unwrap_err().is_validation());
    }

    #[test]
    fn basis_files() {
        let b = ProjectiveBasis::random(3, 5);
        let back = parse_basis_str(&basis_to_json(&b)).unwrap();
        assert!((back.frame() - b.frame()).norm() < 1e-15);
        let not_orth = r#"{"dim": 2, "vectors": [[[1, 0], [0, 0]], [[1, 0], [0, 0]]]}"#;
        assert!(parse_basis_str(not_orth).unwrap_err().is_validation());
        let wrong = r#"{"dim": 2, "vectors": [[[1, 0], [0, 0]]]}"#;
        assert!(matches!(parse_basis_str(wrong), Err(Error::Parse { .. })));
    }
}
