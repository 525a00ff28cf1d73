//! JSON file formats and atomic file output.
//!
//! Floats go through `serde_json`'s shortest round-trip representation, so
//! matrices survive a write/read cycle bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::antiunitary::AntiUnitaryOp;
use crate::classifier::{ClassificationReport, Multiplicities, RepKind, Unassigned};
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// `{"dim": n, "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m.as_slice().to_vec(),
        }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.entries.len() != m.dim * m.dim {
            return Err(Error::Parse(format!(
                "matrix of dim {} needs {} entries, found {}",
                m.dim,
                m.dim * m.dim,
                m.entries.len()
            )));
        }
        CMatrix::from_row_major(m.dim, m.entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiUnitaryJson {
    pub label: String,
    pub unitary_part: MatrixJson,
}

impl From<&AntiUnitaryOp> for AntiUnitaryJson {
    fn from(a: &AntiUnitaryOp) -> Self {
        Self {
            label: a.label().to_string(),
            unitary_part: (&a.unitary_part()).into(),
        }
    }
}

impl TryFrom<AntiUnitaryJson> for AntiUnitaryOp {
    type Error = Error;

    fn try_from(a: AntiUnitaryJson) -> Result<Self> {
        AntiUnitaryOp::new(a.unitary_part.try_into()?, a.label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    pub kind: RepKind,
    pub omega_sq: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Complex64>,
    pub energies: Vec<Complex64>,
    pub state_indices: Vec<usize>,
    pub residuals: BTreeMap<String, f64>,
}

/// Report without the state vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub multiplicities: Multiplicities,
    pub blocks: Vec<BlockJson>,
    pub commutation_residual: f64,
    pub unassigned: Vec<Unassigned>,
    pub dim: usize,
    pub cond: f64,
}

impl From<&ClassificationReport> for ReportJson {
    fn from(r: &ClassificationReport) -> Self {
        Self {
            multiplicities: r.multiplicities,
            blocks: r
                .blocks
                .iter()
                .map(|b| BlockJson {
                    kind: b.kind,
                    omega_sq: b.omega_sq,
                    omega: b.omega,
                    energies: b.energies.clone(),
                    state_indices: b.state_indices.clone(),
                    residuals: b.residuals.clone(),
                })
                .collect(),
            commutation_residual: r.commutation_residual,
            unassigned: r.unassigned.clone(),
            dim: r.dim,
            cond: r.cond,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    read_json::<MatrixJson>(path)?.try_into()
}

pub fn read_antiunitary(path: &Path) -> Result<AntiUnitaryOp> {
    read_json::<AntiUnitaryJson>(path)?.try_into()
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Writes into a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
