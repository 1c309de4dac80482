//! Line-oriented text persistence of the template database.
//!
//! ```text
//! EIGENSIGN 1
//! DIMS <eigen_count> <vector_len>
//! LABEL <symbol> <source>
//! PAIR <value> <c0> <c1> ... <c(vector_len-1)>     (eigen_count times)
//! ...
//! ```
//!
//! Reals are written in shortest round-trip exponent form, so loading what
//! was saved reproduces every bit.

use std::fmt::Write as _;

use thiserror::Error;

use crate::classifier::Template;
use crate::features::FeatureSet;
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "EIGENSIGN";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("line {line}: BadMagic: expected '{MAGIC} <version>'")]
    BadMagic { line: usize },
    #[error("line {line}: VersionUnsupported: {version}")]
    VersionUnsupported { line: usize, version: String },
    #[error("line {line}: ShapeMismatch: {detail}")]
    ShapeMismatch { line: usize, detail: String },
    #[error("line {line}: NormViolation: eigenvector norm {norm}")]
    NormViolation { line: usize, norm: String },
    #[error("line {line}: InvalidValue: {detail}")]
    InvalidValue { line: usize, detail: String },
    #[error("line {line}: unexpected content: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("template database is not valid UTF-8")]
    NotUtf8,
}

/// The trained model: one template per training image.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateDb<T> {
    pub version: u32,
    pub eigen_count: usize,
    pub vector_len: usize,
    pub templates: Vec<Template<T>>,
}

impl<T: Scalar> TemplateDb<T> {
    pub fn new(eigen_count: usize, vector_len: usize) -> Self {
        Self { version: FORMAT_VERSION, eigen_count, vector_len, templates: Vec::new() }
    }

    /// Distinct labels in first-appearance order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.templates {
            if !out.contains(&t.label.as_str()) {
                out.push(&t.label);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Serializes `db`. Labels must be free of whitespace; line breaks in a
/// template's source are replaced by spaces.
pub fn save_db<T: Scalar>(db: &TemplateDb<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {}", db.version).unwrap();
    writeln!(out, "DIMS {} {}", db.eigen_count, db.vector_len).unwrap();
    for t in &db.templates {
        let source = t.source.replace(['\n', '\r'], " ");
        if source.is_empty() {
            writeln!(out, "LABEL {}", t.label).unwrap();
        } else {
            writeln!(out, "LABEL {} {}", t.label, source).unwrap();
        }
        for (value, vector) in t.features.values.iter().zip(&t.features.vectors) {
            write!(out, "PAIR {value:e}").unwrap();
            for c in vector {
                write!(out, " {c:e}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

fn parse_real<T: Scalar>(token: &str, line: usize) -> Result<T, StoreError> {
    let v: T = token
        .parse()
        .map_err(|_| StoreError::InvalidValue { line, detail: format!("cannot parse '{token}' as a number") })?;
    if !v.is_finite() {
        return Err(StoreError::InvalidValue { line, detail: format!("non-finite value '{token}'") });
    }
    Ok(v)
}

fn parse_count(token: Option<&str>, line: usize) -> Result<usize, StoreError> {
    token
        .and_then(|t| t.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| StoreError::Syntax { line, detail: "expected 'DIMS <eigen_count> <vector_len>'".into() })
}

/// Parses and validates a saved database.
pub fn load_db<T: Scalar>(bytes: &[u8]) -> Result<TemplateDb<T>, StoreError> {
    let text = std::str::from_utf8(bytes).map_err(|_| StoreError::NotUtf8)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());

    let (n, header) = lines.next().ok_or(StoreError::BadMagic { line: 1 })?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(StoreError::BadMagic { line: n });
    }
    let version = tok.next().unwrap_or("");
    if version.parse::<u32>() != Ok(FORMAT_VERSION) || tok.next().is_some() {
        return Err(StoreError::VersionUnsupported { line: n, version: version.to_string() });
    }

    let (n, dims) = lines.next().ok_or(StoreError::Syntax { line: n + 1, detail: "missing DIMS line".into() })?;
    let mut tok = dims.split_whitespace();
    if tok.next() != Some("DIMS") {
        return Err(StoreError::Syntax { line: n, detail: "expected DIMS line".into() });
    }
    let eigen_count = parse_count(tok.next(), n)?;
    let vector_len = parse_count(tok.next(), n)?;
    if tok.next().is_some() {
        return Err(StoreError::Syntax { line: n, detail: "trailing tokens after DIMS".into() });
    }

    let mut db = TemplateDb::<T>::new(eigen_count, vector_len);
    let mut current: Option<(usize, Template<T>)> = None;

    let finish = |cur: Option<(usize, Template<T>)>, db: &mut TemplateDb<T>| -> Result<(), StoreError> {
        if let Some((line, t)) = cur {
            if t.features.values.len() != eigen_count {
                return Err(StoreError::ShapeMismatch {
                    line,
                    detail: format!("template has {} PAIR lines, expected {eigen_count}", t.features.values.len()),
                });
            }
            db.templates.push(t);
        }
        Ok(())
    };

    for (n, line) in lines {
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match keyword {
            "LABEL" => {
                finish(current.take(), &mut db)?;
                let rest = rest.trim();
                let (label, source) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                if label.is_empty() {
                    return Err(StoreError::Syntax { line: n, detail: "empty label".into() });
                }
                let template = Template {
                    label: label.to_string(),
                    features: FeatureSet { values: Vec::new(), vectors: Vec::new() },
                    source: source.trim().to_string(),
                };
                current = Some((n, template));
            }
            "PAIR" => {
                let Some((_, t)) = current.as_mut() else {
                    return Err(StoreError::Syntax { line: n, detail: "PAIR before any LABEL".into() });
                };
                if t.features.values.len() == eigen_count {
                    return Err(StoreError::ShapeMismatch {
                        line: n,
                        detail: format!("more than {eigen_count} PAIR lines for '{}'", t.label),
                    });
                }
                let tokens: Vec<&str> = rest.split_whitespace().collect();
                if tokens.len() != vector_len + 1 {
                    return Err(StoreError::ShapeMismatch {
                        line: n,
                        detail: format!("expected {vector_len} components, got {}", tokens.len().saturating_sub(1)),
                    });
                }
                let value: T = parse_real(tokens[0], n)?;
                if value < T::zero() {
                    return Err(StoreError::InvalidValue { line: n, detail: "negative eigenvalue".into() });
                }
                if let Some(&prev) = t.features.values.last() {
                    if value > prev {
                        return Err(StoreError::InvalidValue { line: n, detail: "eigenvalues not in non-increasing order".into() });
                    }
                }
                let vector = tokens[1..].iter().map(|s| parse_real::<T>(s, n)).collect::<Result<Vec<T>, _>>()?;
                let norm = vector.iter().map(|&c| c * c).sum::<T>().sqrt();
                if (norm - T::one()).abs() > T::norm_tol() {
                    return Err(StoreError::NormViolation { line: n, norm: norm.to_string() });
                }
                t.features.values.push(value);
                t.features.vectors.push(vector);
            }
            other => {
                return Err(StoreError::Syntax { line: n, detail: format!("unknown keyword '{other}'") });
            }
        }
    }
    finish(current, &mut db)?;
    Ok(db)
}
