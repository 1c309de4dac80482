//! Template-database construction from a labelled corpus directory,
//! leave-one-out and hold-out evaluation, and per-class success tallies.

pub mod synth;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{decide, distance_row, ClassifyError, Level1Rule, Template};
use crate::config::PipelineConfig;
use crate::model_store::TemplateDb;
use crate::pipeline::{pnm_features, PipelineError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("EmptyCorpus: no .ppm/.pbm/.pgm images under {0}")]
    EmptyCorpus(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("TooFewTemplates: need at least 2 templates and 2 labels, have {templates} and {labels}")]
    TooFewTemplates { templates: usize, labels: usize },
    #[error("hold-out of {0} per class leaves no training templates")]
    InvalidHoldout(usize),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> EvalError + '_ {
    move |source| EvalError::Io { path: path.to_path_buf(), source }
}

/// One image file and the label of the directory holding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub label: String,
    pub path: PathBuf,
}

const IMAGE_EXTENSIONS: [&str; 3] = ["ppm", "pbm", "pgm"];

/// Lists `<dir>/<label>/<sample>.{ppm,pbm,pgm}` sorted by label then file
/// name.
pub fn list_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, EvalError> {
    let mut entries = Vec::new();
    let mut class_dirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    class_dirs.sort();
    for class_dir in class_dirs {
        let Some(label) = class_dir.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
            continue;
        };
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            continue;
        }
        let mut files: Vec<PathBuf> = fs::read_dir(&class_dir)
            .map_err(io_err(&class_dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            })
            .collect();
        files.sort();
        entries.extend(files.into_iter().map(|path| CorpusEntry { label: label.clone(), path }));
    }
    if entries.is_empty() {
        return Err(EvalError::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(entries)
}

/// Result of turning a corpus into templates.
#[derive(Debug)]
pub struct BuildOutcome<T> {
    pub db: TemplateDb<T>,
    /// Files that failed the pipeline, in corpus order.
    pub skipped: Vec<(PathBuf, PipelineError)>,
    /// Read-to-features wall time of each kept template, in db order.
    pub timings: Vec<Duration>,
}

/// Runs every corpus image through the pipeline. Files that fail
/// segmentation or feature extraction are reported in `skipped` and left
/// out of the database.
pub fn build_db<T: Scalar>(dir: &Path, cfg: &PipelineConfig) -> Result<BuildOutcome<T>, EvalError> {
    let entries = list_corpus(dir)?;
    let results: Vec<_> = entries
        .par_iter()
        .map(|entry| {
            let start = Instant::now();
            let bytes = fs::read(&entry.path).map_err(io_err(&entry.path))?;
            let features = pnm_features::<T>(&bytes, cfg);
            Ok((features, start.elapsed()))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut db = TemplateDb::new(cfg.eigen_count, cfg.crop_side);
    let mut skipped = Vec::new();
    let mut timings = Vec::new();
    for (entry, (features, elapsed)) in entries.into_iter().zip(results) {
        match features {
            Ok(features) => {
                db.templates.push(Template {
                    label: entry.label,
                    features,
                    source: entry.path.display().to_string(),
                });
                timings.push(elapsed);
            }
            Err(e) => skipped.push((entry.path, e)),
        }
    }
    Ok(BuildOutcome { db, skipped, timings })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassTally {
    pub count: usize,
    pub level1_correct: usize,
    pub level2_correct: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_class: BTreeMap<String, ClassTally>,
    /// Sorted labels indexing `confusion_level2`.
    pub labels: Vec<String>,
    /// `confusion_level2[truth][predicted]` counts.
    pub confusion_level2: Vec<Vec<usize>>,
    pub overall_level1: f64,
    pub overall_level2: f64,
    /// Mean seconds per query image.
    pub mean_latency: f64,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.per_class.values().map(|t| t.count).sum()
    }
}

struct Outcome {
    truth: String,
    level1: String,
    level2: String,
    elapsed: Duration,
}

fn tally(outcomes: Vec<Outcome>, db_labels: &[&str]) -> EvalReport {
    let mut labels: Vec<String> = db_labels.iter().map(|s| s.to_string()).collect();
    for o in &outcomes {
        if !labels.contains(&o.truth) {
            labels.push(o.truth.clone());
        }
    }
    labels.sort();
    let index = |l: &str| labels.binary_search_by(|x| x.as_str().cmp(l)).expect("label listed");

    let mut per_class: BTreeMap<String, ClassTally> = BTreeMap::new();
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let mut elapsed = Duration::ZERO;
    for o in &outcomes {
        let t = per_class.entry(o.truth.clone()).or_default();
        t.count += 1;
        t.level1_correct += (o.level1 == o.truth) as usize;
        t.level2_correct += (o.level2 == o.truth) as usize;
        confusion[index(&o.truth)][index(&o.level2)] += 1;
        elapsed += o.elapsed;
    }
    let total: usize = per_class.values().map(|t| t.count).sum();
    let rate = |f: fn(&ClassTally) -> usize| {
        if total == 0 {
            0.0
        } else {
            per_class.values().map(f).sum::<usize>() as f64 / total as f64
        }
    };
    EvalReport {
        overall_level1: rate(|t| t.level1_correct),
        overall_level2: rate(|t| t.level2_correct),
        mean_latency: if total == 0 { 0.0 } else { elapsed.as_secs_f64() / total as f64 },
        per_class,
        labels,
        confusion_level2: confusion,
    }
}

fn classify_subset<'a, T: Scalar>(
    query: &Template<T>,
    train: impl Iterator<Item = &'a Template<T>>,
    rule: Level1Rule,
) -> Result<Outcome, EvalError> {
    let start = Instant::now();
    let rows = train.map(|t| distance_row(&query.features, t)).collect::<Result<Vec<_>, _>>()?;
    let result = decide(rows, rule)?;
    Ok(Outcome {
        truth: query.label.clone(),
        level1: result.level1_label,
        level2: result.level2_label,
        elapsed: start.elapsed(),
    })
}

/// Classifies every template against all the others.
pub fn leave_one_out<T: Scalar>(db: &TemplateDb<T>, rule: Level1Rule) -> Result<EvalReport, EvalError> {
    let labels = db.labels();
    if db.len() < 2 || labels.len() < 2 {
        return Err(EvalError::TooFewTemplates { templates: db.len(), labels: labels.len() });
    }
    let outcomes = (0..db.len())
        .into_par_iter()
        .map(|i| {
            let train = db.templates.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, t)| t);
            classify_subset(&db.templates[i], train, rule)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tally(outcomes, &labels))
}

/// Holds out the last `k` templates of every class (in db order) as queries
/// and classifies them against the rest.
pub fn holdout<T: Scalar>(db: &TemplateDb<T>, k: usize, rule: Level1Rule) -> Result<EvalReport, EvalError> {
    let labels = db.labels();
    if db.len() < 2 || labels.len() < 2 {
        return Err(EvalError::TooFewTemplates { templates: db.len(), labels: labels.len() });
    }
    let mut remaining: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &db.templates {
        *remaining.entry(&t.label).or_default() += 1;
    }
    let mut is_test = vec![false; db.len()];
    for (i, t) in db.templates.iter().enumerate() {
        let left = remaining.get_mut(t.label.as_str()).expect("counted");
        is_test[i] = *left <= k;
        *left -= 1;
    }
    if k == 0 || is_test.iter().all(|&t| t) {
        return Err(EvalError::InvalidHoldout(k));
    }
    let train: Vec<&Template<T>> = db.templates.iter().zip(&is_test).filter(|(_, &t)| !t).map(|(t, _)| t).collect();
    let outcomes = db
        .templates
        .par_iter()
        .zip(is_test.par_iter())
        .filter(|(_, &t)| t)
        .map(|(q, _)| classify_subset(q, train.iter().copied(), rule))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tally(outcomes, &labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Protocol {
    #[default]
    LeaveOneOut,
    /// Last `k` samples of each class are queries.
    Holdout(usize),
}

pub fn evaluate<T: Scalar>(db: &TemplateDb<T>, protocol: Protocol, rule: Level1Rule) -> Result<EvalReport, EvalError> {
    match protocol {
        Protocol::LeaveOneOut => leave_one_out(db, rule),
        Protocol::Holdout(k) => holdout(db, k, rule),
    }
}

/// Builds the database from `dir` and evaluates it. The reported latency
/// covers decoding, segmentation, cropping, feature extraction and
/// classification of one image.
pub fn evaluate_corpus<T: Scalar>(
    dir: &Path,
    cfg: &PipelineConfig,
    protocol: Protocol,
    rule: Level1Rule,
) -> Result<(EvalReport, BuildOutcome<T>), EvalError> {
    let built = build_db::<T>(dir, cfg)?;
    let mut report = evaluate(&built.db, protocol, rule)?;
    if !built.timings.is_empty() {
        let extract: Duration = built.timings.iter().sum();
        report.mean_latency += extract.as_secs_f64() / built.timings.len() as f64;
    }
    Ok((report, built))
}
