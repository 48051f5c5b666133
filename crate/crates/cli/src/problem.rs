//! JSON problem, probe and pair files.
//!
//! Complex numbers are `[re, im]` arrays. A matrix is an array of rows, a
//! vector is a flat array of entries. A problem file holds `n`, `degree` and
//! `coeffs = [A_0, ..., A_degree]`.

use std::fmt;
use std::path::Path;

use invpair::{CMat, CVec, MatrixPolynomial, C64};
use serde::{Deserialize, Serialize};

pub type Entry = [f64; 2];
pub type MatrixRows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub n: usize,
    pub degree: usize,
    pub coeffs: Vec<MatrixRows>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    Io {
        path: String,
        message: String,
    },
    /// Malformed JSON or a non-numeric entry.
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed JSON with the wrong shape; `field` is a path like `coeffs[1][0][2]`.
    Shape {
        origin: String,
        field: String,
        message: String,
    },
    Invalid {
        origin: String,
        message: String,
    },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Io { path, message } => write!(f, "{path}: {message}"),
            ParseError::Syntax {
                origin,
                line,
                column,
                message,
            } => {
                write!(f, "{origin}:{line}:{column}: {message}")
            }
            ParseError::Shape {
                origin,
                field,
                message,
            } => write!(f, "{origin}: {field}: {message}"),
            ParseError::Invalid { origin, message } => write!(f, "{origin}: {message}"),
        }
    }
}

impl std::error::Error for ParseError {}

fn syntax(origin: &str, e: serde_json::Error) -> ParseError {
    let message = e.to_string();
    // serde_json appends " at line L column C"; keep the bare message
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message,
    };
    ParseError::Syntax {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message,
    }
}

fn shape(origin: &str, field: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Shape {
        origin: origin.to_string(),
        field: field.into(),
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            origin: origin.to_string(),
            line: 1,
            column: 1,
            message: "empty file".into(),
        });
    }
    serde_json::from_str(text).map_err(|e| syntax(origin, e))
}

fn entry(e: &Entry, origin: &str, field: &dyn Fn() -> String) -> Result<C64, ParseError> {
    if !(e[0].is_finite() && e[1].is_finite()) {
        return Err(shape(origin, field(), "entry is not finite"));
    }
    Ok(C64::new(e[0], e[1]))
}

/// Checks a `rows x cols` array; `cols = None` accepts any consistent width.
pub fn matrix_from_rows(
    rows: &MatrixRows,
    expect: (Option<usize>, Option<usize>),
    origin: &str,
    field: &str,
) -> Result<CMat, ParseError> {
    if let Some(r) = expect.0 {
        if rows.len() != r {
            return Err(shape(
                origin,
                field,
                format!("expected {r} rows, found {}", rows.len()),
            ));
        }
    }
    let width = expect.1.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    if rows.is_empty() || width == 0 {
        return Err(shape(origin, field, "matrix is empty"));
    }
    let mut m = CMat::zeros(rows.len(), width);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(shape(
                origin,
                format!("{field}[{i}]"),
                format!("expected {width} entries, found {}", row.len()),
            ));
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = entry(e, origin, &|| format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

pub fn vector_from_entries(
    entries: &[Entry],
    origin: &str,
    field: &str,
) -> Result<CVec, ParseError> {
    if entries.is_empty() {
        return Err(shape(origin, field, "vector is empty"));
    }
    let mut v = CVec::zeros(entries.len());
    for (i, e) in entries.iter().enumerate() {
        v[i] = entry(e, origin, &|| format!("{field}[{i}]"))?;
    }
    Ok(v)
}

pub fn matrix_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn vector_entries(v: &CVec) -> Vec<Entry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl ProblemFile {
    pub fn from_polynomial(p: &MatrixPolynomial, name: Option<&str>) -> Self {
        ProblemFile {
            name: name.map(str::to_string),
            description: None,
            n: p.n(),
            degree: p.degree(),
            coeffs: p.coeffs().iter().map(matrix_rows).collect(),
        }
    }

    pub fn to_polynomial(&self, origin: &str) -> Result<MatrixPolynomial, ParseError> {
        if self.n == 0 {
            return Err(shape(origin, "n", "must be positive"));
        }
        if self.degree == 0 {
            return Err(shape(origin, "degree", "must be positive"));
        }
        if self.coeffs.len() != self.degree + 1 {
            return Err(shape(
                origin,
                "coeffs",
                format!(
                    "expected degree + 1 = {} matrices A_0..A_{}, found {}",
                    self.degree + 1,
                    self.degree,
                    self.coeffs.len()
                ),
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| {
                matrix_from_rows(
                    a,
                    (Some(self.n), Some(self.n)),
                    origin,
                    &format!("coeffs[{j}]"),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        MatrixPolynomial::new(coeffs).map_err(|e| ParseError::Invalid {
            origin: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }
}

/// Parses problem text; `origin` names the source in diagnostics.
pub fn parse_problem_str(text: &str, origin: &str) -> Result<MatrixPolynomial, ParseError> {
    from_json::<ProblemFile>(text, origin)?.to_polynomial(origin)
}

pub fn parse_problem(path: &Path) -> Result<MatrixPolynomial, ParseError> {
    parse_problem_str(&read_text(path)?, &path.display().to_string())
}

pub fn serialize_problem(p: &MatrixPolynomial, name: Option<&str>) -> String {
    ProblemFile::from_polynomial(p, name).to_json()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeData {
    Vector(Vec<Entry>),
    Matrix(MatrixRows),
}

impl ProbeData {
    pub fn to_matrix(&self, n: usize, origin: &str, field: &str) -> Result<CMat, ParseError> {
        match self {
            ProbeData::Vector(v) => {
                let v = vector_from_entries(v, origin, field)?;
                if v.len() != n {
                    return Err(shape(
                        origin,
                        field,
                        format!("expected length {n}, found {}", v.len()),
                    ));
                }
                Ok(CMat::from_column_slice(n, 1, v.as_slice()))
            }
            ProbeData::Matrix(m) => matrix_from_rows(m, (Some(n), None), origin, field),
        }
    }
}

/// Probe vectors `u, v` (or probe blocks `U, V`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFile {
    pub u: ProbeData,
    pub v: ProbeData,
}

/// A pair `(X, S)`, or a solvent when `x` is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<MatrixRows>,
    pub s: MatrixRows,
}
