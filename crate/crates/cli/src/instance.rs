//! The JSON instance format.
//!
//! Matrices are lists of rows of rational strings. A row may be complete, in
//! which case the matrix must be symmetric, or start at the diagonal, giving
//! only the upper triangle.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spectra_cert_core::ratmat::{format_rational, parse_rational};
use spectra_cert_core::{Hints, RatMatrix, Rational, SdpSystem, SymMatrix};

use crate::error::{CliError, CliResult};
use crate::report::ReportFile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<String>>>,
    pub b: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<ReportFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hints: Option<Hints>,
}

impl InstanceFile {
    /// Dense rows in canonical rational notation.
    pub fn from_system(system: &SdpSystem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: system.order(),
            m: system.equations(),
            a: system.matrices().iter().map(matrix_rows).collect(),
            b: system.rhs().iter().map(format_rational).collect(),
            ground_truth: None,
            hints: None,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, context: &str) -> CliResult<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| CliError::parse(context, e))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::parse(
                context,
                format!("unsupported schemaVersion {}", file.schema_version),
            ));
        }
        Ok(file)
    }

    pub fn to_system(&self) -> CliResult<SdpSystem> {
        let ctx = "instance";
        if self.a.len() != self.m || self.b.len() != self.m {
            return Err(CliError::parse(
                ctx,
                format!("m = {} but found {} matrices and {} right-hand sides", self.m, self.a.len(), self.b.len()),
            ));
        }
        let matrices = self
            .a
            .iter()
            .enumerate()
            .map(|(i, rows)| parse_matrix(rows, self.n).map_err(|e| CliError::parse(format!("A[{}]", i + 1), e)))
            .collect::<CliResult<Vec<_>>>()?;
        let rhs = self
            .b
            .iter()
            .enumerate()
            .map(|(i, t)| parse_rational(t).map_err(|e| CliError::parse(format!("b[{}]", i + 1), e)))
            .collect::<CliResult<Vec<_>>>()?;
        SdpSystem::new(self.n, matrices, rhs).map_err(|e| CliError::parse(ctx, e))
    }

    pub fn to_json(&self) -> String {
        to_pretty_json(self)
    }
}

pub fn matrix_rows(m: &SymMatrix) -> Vec<Vec<String>> {
    let n = m.order();
    (0..n).map(|i| (0..n).map(|j| format_rational(&m[(i, j)])).collect()).collect()
}

/// Accepts complete rows (checked for symmetry) or upper-triangle rows.
pub fn parse_matrix(rows: &[Vec<String>], n: usize) -> Result<SymMatrix, String> {
    if rows.len() != n {
        return Err(format!("expected {n} rows, found {}", rows.len()));
    }
    let full = rows.iter().all(|r| r.len() == n);
    let upper = rows.iter().enumerate().all(|(i, r)| r.len() == n - i);
    if !full && !upper {
        return Err("rows must all have length n, or length n - i for an upper triangle".into());
    }
    let mut m = RatMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let start = if full { 0 } else { i };
        for (offset, text) in row.iter().enumerate() {
            let v: Rational = parse_rational(text).map_err(|e| format!("entry ({}, {}): {e}", i + 1, start + offset + 1))?;
            m[(i, start + offset)] = v;
        }
    }
    if full {
        SymMatrix::new(m).map_err(|e| e.to_string())
    } else {
        SymMatrix::from_upper(&m).map_err(|e| e.to_string())
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}
