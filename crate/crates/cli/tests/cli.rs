use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use eigensign::imaging::{read_pnm, write_pnm, Raster, RgbImage};
use eigensign::report::parse_eval_csv;
use eigensign::segmenter::connected_components;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_eigensign"));
    c.env_remove("EIGENSIGN_CONFIG");
    c
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    bin().args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    corpus: PathBuf,
    model: PathBuf,
}

/// Full 24 x 10 synthetic corpus plus a trained model, built once.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        let model = dir.path().join("model.txt");
        let o = run(&[&"synth", &corpus, &"--seed", &"11"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = run(&[&"train", &corpus, &model]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o).trim(), "240 templates");
        Fixture { _dir: dir, corpus, model }
    })
}

fn small_corpus(dir: &Path) -> PathBuf {
    let corpus = dir.join("small");
    let o = run(&[&"synth", &corpus, &"--classes", &"4", &"--samples", &"3", &"--seed", &"5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    corpus
}

#[test]
fn synth_writes_expected_layout() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    for label in ["A", "B", "C", "D"] {
        for i in 0..3 {
            let p = corpus.join(label).join(format!("{label}-{i:02}.ppm"));
            assert!(matches!(read_pnm(&std::fs::read(&p).unwrap()).unwrap(), Raster::Rgb(_)), "{}", p.display());
        }
    }
}

#[test]
fn debug_writes_stage_images() {
    let f = fixture();
    let out = tempfile::tempdir().unwrap();
    let o = run(&[&"debug", &f.corpus.join("A/A-00.ppm"), &out.path()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names = ["01-rgb.ppm", "02-hsv.ppm", "03-filtered.ppm", "04-smoothed.ppm", "05-binary.pgm", "06-blob.pbm", "07-crop.pbm"];
    for n in names {
        assert!(out.path().join(n).is_file(), "{n}");
    }
    let Raster::Binary(blob) = read_pnm(&std::fs::read(out.path().join("06-blob.pbm")).unwrap()).unwrap() else {
        panic!("blob is not a bitmap")
    };
    assert_eq!(connected_components(&blob).len(), 1);
    let Raster::Binary(crop) = read_pnm(&std::fs::read(out.path().join("07-crop.pbm")).unwrap()).unwrap() else {
        panic!("crop is not a bitmap")
    };
    assert_eq!((crop.width(), crop.height()), (50, 50));
}

#[test]
fn debug_on_black_image_reports_empty_mask() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("black.ppm");
    std::fs::write(&img, write_pnm(&RgbImage::filled(40, 30, [0, 0, 0]).into())).unwrap();
    let o = run(&[&"debug", &img, &dir.path().join("out")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("EmptyMask"), "{}", stderr(&o));
}

#[test]
fn train_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = run(&[&"train", &empty, &dir.path().join("m.txt")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_skips_unusable_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    std::fs::write(corpus.join("B/B-01.ppm"), write_pnm(&RgbImage::filled(20, 20, [0, 0, 0]).into())).unwrap();
    std::fs::write(corpus.join("C/C-02.ppm"), b"P6\n4 4\n255\n").unwrap();
    let model = dir.path().join("m.txt");
    let o = run(&[&"train", &corpus, &model]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).trim(), "10 templates");
    assert!(stderr(&o).contains("B-01.ppm") && stderr(&o).contains("C-02.ppm"));
    assert!(model.is_file());
}

#[test]
fn classify_training_image_matches_itself() {
    let f = fixture();
    let o = run(&[&"classify", &f.model, &f.corpus.join("K/K-04.ppm")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("level-1 (vote): K"), "{text}");
    assert!(text.contains("level-2: K (weighted sum 0.0000)"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("latency: ")));
}

#[test]
fn classify_report_lists_every_template() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("d.csv");
    let o = run(&[&"classify", &f.model, &f.corpus.join("B/B-00.ppm"), &"--report", &"--out", &csv_path, &"--no-timing"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).take_while(|l| !l.starts_with("level-1")).collect();
    assert_eq!(rows.len(), 240);
    for r in rows {
        let cols: Vec<&str> = r.split_whitespace().collect();
        assert_eq!(cols.len(), 12, "{r}");
        assert!(cols[1..].iter().all(|c| c.parse::<f64>().is_ok()), "{r}");
    }
    assert!(!text.contains("latency"));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 241);
    assert!(csv.starts_with("template,ed1,"));
}

#[test]
fn classify_with_missing_model_fails() {
    let f = fixture();
    let o = run(&[&"classify", &"/nonexistent/model.txt", &f.corpus.join("A/A-00.ppm")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_rejects_corrupt_model() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "EIGENSIGN 9\n").unwrap();
    let o = run(&[&"classify", &bad, &f.corpus.join("A/A-00.ppm")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_model_reports_all_classes() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("e.csv");
    let o = run(&[&"eval", &f.model, &"--out", &csv_path, &"--confusion"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("Symbol"));
    assert!(lines[1..25].iter().all(|l| l.split_whitespace().nth(1) == Some("10")));
    assert!(lines[25].starts_with("Overall") && lines[25].contains("240"));

    let tallies = parse_eval_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(tallies.len(), 24);
    assert_eq!(tallies.values().map(|t| t.count).sum::<usize>(), 240);
    for (label, t) in &tallies {
        let row = lines[1..25].iter().find(|l| l.split_whitespace().next() == Some(label)).unwrap();
        let pct: f64 = row.split_whitespace().nth(3).unwrap().trim_end_matches('%').parse().unwrap();
        assert!((pct - 100.0 * t.level2_correct as f64 / t.count as f64).abs() < 1e-3);
    }
}

#[test]
fn eval_corpus_reports_latency() {
    let f = fixture();
    let o = run(&[&"eval", &f.corpus, &"--holdout", &"2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let overall = text.lines().find(|l| l.starts_with("Overall")).unwrap();
    assert_eq!(overall.split_whitespace().nth(1), Some("48"));
    let latency = text.lines().find_map(|l| l.strip_prefix("mean latency: ")).unwrap();
    let secs: f64 = latency.trim_end_matches(" s/image").parse().unwrap();
    assert!(secs > 0.0 && secs <= 0.5, "{secs}");
}

#[test]
fn eval_without_timing_is_reproducible() {
    let f = fixture();
    let a = run(&[&"eval", &f.model, &"--no-timing"]);
    let b = run(&[&"eval", &f.model, &"--no-timing"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("latency"));
}

#[test]
fn eval_rejects_oversized_holdout() {
    let f = fixture();
    let o = run(&[&"eval", &f.model, &"--holdout", &"10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_environment_are_honored() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = dir.path().join("es.conf");
    std::fs::write(&cfg, "# narrower model\neigen_count = 3\ncrop-side = 40\n").unwrap();

    let model = dir.path().join("m.txt");
    let o = run(&[&"train", &corpus, &model, &"--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&model).unwrap().contains("DIMS 3 40"));

    let model_env = dir.path().join("m2.txt");
    let o = bin().env("EIGENSIGN_CONFIG", &cfg).args([std::ffi::OsStr::new("train"), corpus.as_os_str(), model_env.as_os_str()]).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&model_env).unwrap().contains("DIMS 3 40"));

    let o = run(&[&"train", &corpus, &dir.path().join("m3.txt"), &"--config", &cfg, &"--eigen-count", &"2"]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(dir.path().join("m3.txt")).unwrap().contains("DIMS 2 40"));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let o = run(&[&"train", &corpus, &model, &"--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn level1_rule_flag_changes_label_line() {
    let f = fixture();
    let o = run(&[&"classify", &f.model, &f.corpus.join("A/A-01.ppm"), &"--level1-rule", &"first", &"--no-timing"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("level-1 (first): A"));
}
