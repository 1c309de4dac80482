//! Human-readable tables and CSV for classification and evaluation results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::classifier::ClassificationResult;
use crate::evaluator::{ClassTally, EvalReport};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {detail}")]
    Parse { row: usize, detail: String },
}

fn percent(correct: usize, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        100.0 * correct as f64 / count as f64
    }
}

/// Per-symbol success rates for both levels plus the overall line.
pub fn render_eval_table(report: &EvalReport, timing: bool) -> String {
    let mut out = String::new();
    writeln!(out, "{:<8} {:>7} {:>16} {:>16}", "Symbol", "Images", "Level-1 success", "Level-2 success").unwrap();
    for (label, t) in &report.per_class {
        writeln!(
            out,
            "{:<8} {:>7} {:>15.4}% {:>15.4}%",
            label,
            t.count,
            percent(t.level1_correct, t.count),
            percent(t.level2_correct, t.count)
        )
        .unwrap();
    }
    writeln!(
        out,
        "{:<8} {:>7} {:>15.4}% {:>15.4}%",
        "Overall",
        report.total(),
        100.0 * report.overall_level1,
        100.0 * report.overall_level2
    )
    .unwrap();
    if timing {
        writeln!(out, "mean latency: {:.4} s/image", report.mean_latency).unwrap();
    }
    out
}

pub fn render_confusion(report: &EvalReport) -> String {
    let width = report.labels.iter().map(String::len).max().unwrap_or(1).max(3);
    let mut out = format!("{:>width$}", "");
    for l in &report.labels {
        write!(out, " {l:>width$}").unwrap();
    }
    out.push('\n');
    for (l, row) in report.labels.iter().zip(&report.confusion_level2) {
        write!(out, "{l:>width$}").unwrap();
        for c in row {
            write!(out, " {c:>width$}").unwrap();
        }
        out.push('\n');
    }
    out
}

const EVAL_HEADER: [&str; 6] = ["symbol", "count", "level1_correct", "level2_correct", "level1_rate", "level2_rate"];

pub fn eval_csv(report: &EvalReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EVAL_HEADER)?;
    for (label, t) in &report.per_class {
        let r1 = if t.count == 0 { 0.0 } else { t.level1_correct as f64 / t.count as f64 };
        let r2 = if t.count == 0 { 0.0 } else { t.level2_correct as f64 / t.count as f64 };
        w.write_record([
            label.clone(),
            t.count.to_string(),
            t.level1_correct.to_string(),
            t.level2_correct.to_string(),
            r1.to_string(),
            r2.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

/// Reads back the per-class counts written by [`eval_csv`].
pub fn parse_eval_csv(text: &str) -> Result<BTreeMap<String, ClassTally>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<usize, ReportError> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ReportError::Parse { row: i + 1, detail: format!("bad '{}' field", EVAL_HEADER[k]) })
        };
        let label = rec.get(0).unwrap_or_default().to_string();
        out.insert(label, ClassTally { count: field(1)?, level1_correct: field(2)?, level2_correct: field(3)? });
    }
    Ok(out)
}

/// One row per template: per-eigenvector distances, weighted terms and
/// their sum, followed by the two decisions.
pub fn render_distance_table<T: Scalar>(result: &ClassificationResult<T>) -> String {
    let k = result.rows.first().map_or(0, |r| r.per_vector.len());
    let mut out = format!("{:<10}", "Template");
    for i in 1..=k {
        write!(out, " {:>9}", format!("ED{i}")).unwrap();
    }
    for i in 1..=k {
        write!(out, " {:>9}", format!("W{i}")).unwrap();
    }
    writeln!(out, " {:>10}", "Sum").unwrap();
    for row in &result.rows {
        write!(out, "{:<10}", row.label).unwrap();
        for v in row.per_vector.iter().chain(&row.weighted) {
            write!(out, " {:>9.4}", v.to_f64().unwrap_or(f64::NAN)).unwrap();
        }
        writeln!(out, " {:>10.4}", row.weighted_sum.to_f64().unwrap_or(f64::NAN)).unwrap();
    }
    out
}

pub fn distance_csv<T: Scalar>(result: &ClassificationResult<T>) -> Result<String, ReportError> {
    let k = result.rows.first().map_or(0, |r| r.per_vector.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["template".to_string()];
    header.extend((1..=k).map(|i| format!("ed{i}")));
    header.extend((1..=k).map(|i| format!("weighted{i}")));
    header.push("sum".into());
    w.write_record(&header)?;
    for row in &result.rows {
        let mut rec = vec![row.label.clone()];
        rec.extend(row.per_vector.iter().chain(&row.weighted).map(|v| v.to_string()));
        rec.push(row.weighted_sum.to_string());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}
