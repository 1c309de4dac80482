use eigensign::evaluator::synth::{synth_corpus, write_corpus, SynthParams};
use eigensign::evaluator::{build_db, holdout, leave_one_out, EvalError};
use eigensign::pipeline::PipelineError;
use eigensign::{load_db, save_db, write_pnm, Level1Rule, PipelineConfig, RgbImage, TemplateDb64};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus_dir(classes: usize, samples: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(&SynthParams::new(21, classes, samples)).unwrap();
    write_corpus(dir.path(), &corpus).unwrap();
    dir
}

#[test]
fn build_skips_black_image_and_keeps_order() {
    let dir = corpus_dir(3, 4);
    let black = dir.path().join("B/B-02.ppm");
    std::fs::write(&black, write_pnm(&RgbImage::filled(30, 30, [0, 0, 0]).into())).unwrap();
    let built = build_db::<f64>(dir.path(), &PipelineConfig::default()).unwrap();
    assert_eq!(built.db.len(), 11);
    assert_eq!(built.skipped.len(), 1);
    assert_eq!(built.skipped[0].0, black);
    assert!(matches!(built.skipped[0].1, PipelineError::Crop(_)));
    let labels: Vec<&str> = built.db.templates.iter().map(|t| t.label.as_str()).collect();
    assert_eq!(labels, ["A", "A", "A", "A", "B", "B", "B", "C", "C", "C", "C"]);
}

#[test]
fn empty_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(build_db::<f64>(dir.path(), &PipelineConfig::default()), Err(EvalError::EmptyCorpus { .. })));
}

#[test]
fn leave_one_out_ignores_template_order() {
    let dir = corpus_dir(6, 5);
    let db = build_db::<f64>(dir.path(), &PipelineConfig::default()).unwrap().db;
    let base = leave_one_out(&db, Level1Rule::Vote).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let mut shuffled: TemplateDb64 = db.clone();
        shuffled.templates.shuffle(&mut rng);
        let r = leave_one_out(&shuffled, Level1Rule::Vote).unwrap();
        assert_eq!(r.per_class, base.per_class);
        assert_eq!(r.confusion_level2, base.confusion_level2);
    }
}

#[test]
fn holdout_counts_queries_per_class() {
    let dir = corpus_dir(5, 4);
    let db = build_db::<f64>(dir.path(), &PipelineConfig::default()).unwrap().db;
    let r = holdout(&db, 1, Level1Rule::First).unwrap();
    assert_eq!(r.total(), 5);
    assert!(r.per_class.values().all(|t| t.count == 1));
    assert!(holdout(&db, 4, Level1Rule::Vote).is_err());
}

#[test]
fn single_precision_pipeline_agrees_on_labels() {
    let dir = corpus_dir(6, 4);
    let cfg = PipelineConfig::default();
    let db64 = build_db::<f64>(dir.path(), &cfg).unwrap().db;
    let db32 = build_db::<f32>(dir.path(), &cfg).unwrap().db;
    assert_eq!(db32.len(), db64.len());
    for (a, b) in db32.templates.iter().zip(&db64.templates) {
        for (x, y) in a.features.values.iter().zip(&b.features.values) {
            assert!((*x as f64 - y).abs() <= 1e-3 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }
    let r32 = leave_one_out(&db32, Level1Rule::Vote).unwrap();
    let r64 = leave_one_out(&db64, Level1Rule::Vote).unwrap();
    assert!((r32.overall_level2 - r64.overall_level2).abs() <= 1.0 / 24.0);

    let text = save_db(&db32);
    assert_eq!(load_db::<f32>(text.as_bytes()).unwrap(), db32);
}
