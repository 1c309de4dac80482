//! Two-level nearest-template decision.
//!
//! Level 1 compares eigenvector `k` of the query with eigenvector `k` of
//! every template by plain Euclidean distance. Level 2 weights each of those
//! distances by the absolute gap between the corresponding eigenvalues, sums
//! the weighted terms per template and takes the minimum.
//!
//! A known property of the weighting: when query and template eigenvalues
//! coincide, every weighted term vanishes regardless of how far apart the
//! eigenvectors are.

use std::cmp::Ordering;
use std::str::FromStr;

use thiserror::Error;

use crate::features::FeatureSet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("template database is empty")]
    EmptyDatabase,
    #[error("feature shape mismatch: query has {query_count}x{query_len}, template '{label}' has {template_count}x{template_len}")]
    ShapeMismatch {
        label: String,
        query_count: usize,
        query_len: usize,
        template_count: usize,
        template_len: usize,
    },
}

/// One labelled training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Template<T> {
    pub label: String,
    pub features: FeatureSet<T>,
    /// Free-text provenance such as the source file path.
    pub source: String,
}

/// Distances between a query and one template.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow<T> {
    pub label: String,
    pub per_vector: Vec<T>,
    pub weighted: Vec<T>,
    pub weighted_sum: T,
}

impl<T: Scalar> DistanceRow<T> {
    /// Builds a row from per-eigenvector distances and already weighted terms.
    pub fn new(label: impl Into<String>, per_vector: Vec<T>, weighted: Vec<T>) -> Self {
        let weighted_sum = weighted.iter().copied().sum();
        Self { label: label.into(), per_vector, weighted, weighted_sum }
    }

    pub fn distance_sum(&self) -> T {
        self.per_vector.iter().copied().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult<T> {
    pub rows: Vec<DistanceRow<T>>,
    pub level1_label: String,
    pub level2_label: String,
    /// Index into `rows` of the level-2 winner.
    pub level2_row: usize,
}

/// How level-1 distances are turned into a single label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Level1Rule {
    /// Each eigen index votes for the template with the smallest distance;
    /// the label with most votes wins.
    #[default]
    Vote,
    /// Smallest distance on the first eigenvector alone.
    First,
}

impl FromStr for Level1Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vote" => Ok(Level1Rule::Vote),
            "first" => Ok(Level1Rule::First),
            other => Err(format!("unknown level-1 rule '{other}' (expected 'vote' or 'first')")),
        }
    }
}

pub fn euclid<T: Scalar>(ev1: &[T], ev2: &[T]) -> Result<T, ClassifyError> {
    if ev1.len() != ev2.len() {
        return Err(ClassifyError::LengthMismatch(ev1.len(), ev2.len()));
    }
    Ok(ev1.iter().zip(ev2).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt())
}

pub fn weighted_term<T: Scalar>(ed: T, e1: T, e2: T) -> T {
    ed * (e1 - e2).abs()
}

pub fn distance_row<T: Scalar>(query: &FeatureSet<T>, template: &Template<T>) -> Result<DistanceRow<T>, ClassifyError> {
    let tf = &template.features;
    if query.eigen_count() != tf.eigen_count() || query.vector_len() != tf.vector_len() {
        return Err(ClassifyError::ShapeMismatch {
            label: template.label.clone(),
            query_count: query.eigen_count(),
            query_len: query.vector_len(),
            template_count: tf.eigen_count(),
            template_len: tf.vector_len(),
        });
    }
    let mut per_vector = Vec::with_capacity(query.eigen_count());
    let mut weighted = Vec::with_capacity(query.eigen_count());
    for k in 0..query.eigen_count() {
        let ed = euclid(&query.vectors[k], &tf.vectors[k])?;
        per_vector.push(ed);
        weighted.push(weighted_term(ed, query.values[k], tf.values[k]));
    }
    Ok(DistanceRow::new(template.label.clone(), per_vector, weighted))
}

fn cmp_scalar<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Orders candidate rows by `key`, then by total eigenvector distance, then
/// by label.
fn better<T: Scalar>(rows: &[DistanceRow<T>], key: impl Fn(&DistanceRow<T>) -> T) -> Option<usize> {
    (0..rows.len()).min_by(|&i, &j| {
        let (a, b) = (&rows[i], &rows[j]);
        cmp_scalar(key(a), key(b))
            .then_with(|| cmp_scalar(a.distance_sum(), b.distance_sum()))
            .then_with(|| a.label.cmp(&b.label))
    })
}

/// Index of the row with the smallest weighted sum.
///
/// Ties fall to the smaller total eigenvector distance, then the
/// lexicographically smaller label, then the earlier row.
pub fn level2_decision<T: Scalar>(rows: &[DistanceRow<T>]) -> Option<usize> {
    better(rows, |r| r.weighted_sum)
}

/// Level-1 label.
///
/// Under [`Level1Rule::Vote`] every eigen index `k` casts one vote for the
/// label of the row minimizing `per_vector[k]`. The label with most votes
/// wins; tied labels are separated by the smallest total eigenvector distance
/// among their voting rows, then by label order.
pub fn level1_decision<T: Scalar>(rows: &[DistanceRow<T>], rule: Level1Rule) -> Option<String> {
    let eigen_count = rows.first()?.per_vector.len();
    match rule {
        Level1Rule::First => better(rows, |r| r.per_vector[0]).map(|i| rows[i].label.clone()),
        Level1Rule::Vote => {
            // label -> (votes, best distance sum among voting rows)
            let mut tally: Vec<(&str, usize, T)> = Vec::new();
            for k in 0..eigen_count {
                let winner = &rows[better(rows, |r| r.per_vector[k])?];
                let sum = winner.distance_sum();
                match tally.iter_mut().find(|t| t.0 == winner.label) {
                    Some(t) => {
                        t.1 += 1;
                        t.2 = t.2.min(sum);
                    }
                    None => tally.push((&winner.label, 1, sum)),
                }
            }
            tally
                .into_iter()
                .min_by(|a, b| b.1.cmp(&a.1).then_with(|| cmp_scalar(a.2, b.2)).then_with(|| a.0.cmp(b.0)))
                .map(|t| t.0.to_string())
        }
    }
}

/// Applies both decision levels to precomputed rows.
pub fn decide<T: Scalar>(rows: Vec<DistanceRow<T>>, rule: Level1Rule) -> Result<ClassificationResult<T>, ClassifyError> {
    let level2_row = level2_decision(&rows).ok_or(ClassifyError::EmptyDatabase)?;
    let level1_label = level1_decision(&rows, rule).ok_or(ClassifyError::EmptyDatabase)?;
    Ok(ClassificationResult { level2_label: rows[level2_row].label.clone(), level1_label, level2_row, rows })
}

/// Classifies `query` against every template; `rows` follow `db` order.
pub fn classify<T: Scalar>(
    query: &FeatureSet<T>,
    db: &[Template<T>],
    rule: Level1Rule,
) -> Result<ClassificationResult<T>, ClassifyError> {
    if db.is_empty() {
        return Err(ClassifyError::EmptyDatabase);
    }
    let rows = db.iter().map(|t| distance_row(query, t)).collect::<Result<Vec<_>, _>>()?;
    decide(rows, rule)
}
