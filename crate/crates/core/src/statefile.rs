//! JSON state documents.
//!
//! A document holds exactly one of
//! `"matrix"`: 4×4 rows of `[re, im]` pairs in basis order `|00⟩,|01⟩,|10⟩,|11⟩`, or
//! `"bloch"`: `{"a": [3], "b": [3], "E": [[3], [3], [3]]}` (rows of `E`; a flat
//! row-major list of nine numbers is accepted on input).

use std::fs;
use std::path::Path;

use nalgebra::{Complex, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::{from_bloch, to_bloch, BlochRep, Mat4, StateError, TwoQubitState};

#[derive(Debug, Error)]
pub enum StateFileError {
    #[error("malformed state document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("state document must contain exactly one of \"matrix\" or \"bloch\"")]
    Ambiguous,
    #[error("bad shape: {0}")]
    Shape(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, StateFileError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Matrix,
    Bloch,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bloch: Option<BlochDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlochDoc {
    a: [f64; 3],
    b: [f64; 3],
    #[serde(rename = "E")]
    e: Tensor,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Tensor {
    Rows([[f64; 3]; 3]),
    Flat([f64; 9]),
}

pub fn parse_state(text: &str) -> Result<TwoQubitState> {
    let doc: Document = serde_json::from_str(text)?;
    match (doc.matrix, doc.bloch) {
        (Some(rows), None) => {
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(StateFileError::Shape(
                    "\"matrix\" must be 4 rows of 4 [re, im] pairs".into(),
                ));
            }
            let m = Mat4::from_fn(|i, j| Complex::new(rows[i][j][0], rows[i][j][1]));
            Ok(TwoQubitState::new(m)?)
        }
        (None, Some(b)) => {
            let e = match b.e {
                Tensor::Rows(r) => Matrix3::from_fn(|i, j| r[i][j]),
                Tensor::Flat(f) => Matrix3::from_row_slice(&f),
            };
            Ok(from_bloch(&BlochRep::new(
                Vector3::from(b.a),
                Vector3::from(b.b),
                e,
            ))?)
        }
        _ => Err(StateFileError::Ambiguous),
    }
}

pub fn state_to_json(rho: &TwoQubitState, repr: Representation) -> String {
    let doc = match repr {
        Representation::Matrix => {
            let m = rho.matrix();
            let rows = (0..4)
                .map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect();
            Document {
                matrix: Some(rows),
                bloch: None,
            }
        }
        Representation::Bloch => {
            let rep = to_bloch(rho);
            let e = [0, 1, 2].map(|i| [0, 1, 2].map(|j| rep.e[(i, j)]));
            Document {
                matrix: None,
                bloch: Some(BlochDoc {
                    a: rep.a.into(),
                    b: rep.b.into(),
                    e: Tensor::Rows(e),
                }),
            }
        }
    };
    serde_json::to_string_pretty(&doc).expect("document serializes")
}

pub fn read_state(path: &Path) -> Result<TwoQubitState> {
    let text = fs::read_to_string(path).map_err(|source| StateFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_state(&text)
}
