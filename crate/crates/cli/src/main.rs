//! `eigensign` command-line tool.
//!
//! Exit status: 0 on success, 2 on input or model errors, 3 when training
//! skipped some files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use eigensign::config::{parse_config, Overrides};
use eigensign::evaluator::synth::{synth_corpus, write_corpus, Jitter, SynthParams};
use eigensign::evaluator::{build_db, evaluate, evaluate_corpus, EvalReport, Protocol};
use eigensign::imaging::{rgb_to_hsv, write_pnm, GrayImage, Raster, RgbImage};
use eigensign::pipeline::segment;
use eigensign::report::{distance_csv, eval_csv, render_confusion, render_distance_table, render_eval_table};
use eigensign::{classify, extract_features, load_db, read_pnm, save_db, Level1Rule, PipelineConfig, TemplateDb64};

#[derive(Parser)]
#[command(name = "eigensign", version, about = "Static hand-gesture alphabet recognition")]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Settings {
    /// Lower skin hue bound in degrees.
    #[arg(long, global = true)]
    hue_lo: Option<f64>,
    /// Upper skin hue bound in degrees.
    #[arg(long, global = true)]
    hue_hi: Option<f64>,
    /// Lower skin saturation bound in [0, 1].
    #[arg(long, global = true)]
    sat_lo: Option<f64>,
    /// Upper skin saturation bound in [0, 1].
    #[arg(long, global = true)]
    sat_hi: Option<f64>,
    /// Majority filter radius (window side is 2r+1).
    #[arg(long, global = true)]
    smooth_radius: Option<usize>,
    /// Side of the square crop fed to feature extraction.
    #[arg(long, global = true)]
    crop_side: Option<usize>,
    /// Number of leading eigenpairs kept per image.
    #[arg(long, global = true)]
    eigen_count: Option<usize>,
    /// Level-1 decision rule: vote or first.
    #[arg(long, global = true)]
    level1_rule: Option<Level1Rule>,
    /// key=value settings file; command-line flags take precedence.
    #[arg(long, global = true, env = "EIGENSIGN_CONFIG")]
    config: Option<PathBuf>,
    /// Omit the latency line so output is reproducible byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Dump every pipeline stage of one image as numbered PNM files.
    Debug { image: PathBuf, out_dir: PathBuf },
    /// Build a template database from a `<label>/<sample>.ppm` corpus.
    Train { corpus: PathBuf, model: PathBuf },
    /// Classify one image against a trained database.
    Classify {
        model: PathBuf,
        image: PathBuf,
        /// Print the per-template distance table.
        #[arg(long)]
        report: bool,
        /// Write the distance table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-class success rates of both levels (model file or corpus directory).
    Eval {
        input: PathBuf,
        /// Use the last K samples of each class as queries instead of leave-one-out.
        #[arg(long, value_name = "K")]
        holdout: Option<usize>,
        /// Write per-class counts as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the level-2 confusion matrix.
        #[arg(long)]
        confusion: bool,
    },
    /// Generate a seeded synthetic gesture corpus.
    Synth {
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        classes: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Maximum translation in pixels.
        #[arg(long, default_value_t = Jitter::default().max_shift)]
        max_shift: usize,
        /// Maximum relative scale change (at most 0.05).
        #[arg(long, default_value_t = Jitter::default().scale)]
        scale_jitter: f64,
        /// Salt-and-pepper fraction (at most 0.02).
        #[arg(long, default_value_t = Jitter::default().noise)]
        noise: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn fail(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| fail(format!("{}: {e}", path.display())))
}

impl Settings {
    fn overrides(&self) -> Result<Overrides, Failure> {
        let file = match &self.config {
            Some(path) => {
                let text = String::from_utf8(read_file(path)?).map_err(|_| fail("config file is not UTF-8"))?;
                parse_config(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?
            }
            None => Overrides::default(),
        };
        Ok(file.merge(Overrides {
            hue_lo: self.hue_lo,
            hue_hi: self.hue_hi,
            sat_lo: self.sat_lo,
            sat_hi: self.sat_hi,
            smooth_radius: self.smooth_radius,
            crop_side: self.crop_side,
            eigen_count: self.eigen_count,
            level1_rule: self.level1_rule,
        }))
    }
}

/// Adopts the database's crop side and eigen count unless the user asked
/// for different ones.
fn config_for_db(overrides: &Overrides, db: &TemplateDb64) -> Result<(PipelineConfig, Level1Rule), Failure> {
    if overrides.crop_side.is_some_and(|s| s != db.vector_len)
        || overrides.eigen_count.is_some_and(|k| k != db.eigen_count)
    {
        return Err(fail(format!(
            "ShapeMismatch: model was trained with crop side {} and eigen count {}",
            db.vector_len, db.eigen_count
        )));
    }
    let merged = overrides.clone().merge(Overrides {
        crop_side: Some(db.vector_len),
        eigen_count: Some(db.eigen_count),
        ..Default::default()
    });
    Ok(merged.resolve()?)
}

fn load_model(path: &Path) -> Result<TemplateDb64, Failure> {
    let bytes = read_file(path)?;
    load_db::<f64>(&bytes).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn hsv_image(img: &RgbImage) -> RgbImage {
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let [r, g, b] = img.get(x, y);
        let hsv = rgb_to_hsv(r, g, b);
        let h = hsv.h.unwrap_or(0.0) / 360.0;
        [(h * 255.0).round() as u8, (hsv.s * 255.0).round() as u8, (hsv.v * 255.0).round() as u8]
    })
}

fn cmd_debug(settings: &Settings, image: &Path, out_dir: &Path) -> CmdResult {
    let (cfg, _) = settings.overrides()?.resolve()?;
    let raster = read_pnm(&read_file(image)?).map_err(|e| fail(format!("{}: {e}", image.display())))?;
    let rgb = match &raster {
        Raster::Rgb(img) => img.clone(),
        Raster::Gray(g) => RgbImage::from_fn(g.width(), g.height(), |x, y| [g.get(x, y); 3]),
        Raster::Binary(m) => {
            RgbImage::from_fn(m.width(), m.height(), |x, y| if m.get(x, y) { [255; 3] } else { [0; 3] })
        }
    };
    let stages = segment(&raster, &cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| fail(format!("{}: {e}", out_dir.display())))?;
    let outputs: [(&str, Raster); 7] = [
        ("01-rgb.ppm", rgb.clone().into()),
        ("02-hsv.ppm", hsv_image(&rgb).into()),
        ("03-filtered.ppm", rgb.masked(&stages.skin).into()),
        ("04-smoothed.ppm", rgb.masked(&stages.smoothed).into()),
        ("05-binary.pgm", GrayImage::from(&stages.smoothed).into()),
        ("06-blob.pbm", stages.blob.clone().into()),
        ("07-crop.pbm", stages.crop.clone().into()),
    ];
    for (name, raster) in &outputs {
        write_file(&out_dir.join(name), write_pnm(raster))?;
    }
    println!("wrote {} stage images to {}", outputs.len(), out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(settings: &Settings, corpus: &Path, model: &Path) -> CmdResult {
    let (cfg, _) = settings.overrides()?.resolve()?;
    let built = build_db::<f64>(corpus, &cfg)?;
    for (path, err) in &built.skipped {
        eprintln!("skipped {}: {err}", path.display());
    }
    write_file(model, save_db(&built.db))?;
    println!("{} templates", built.db.len());
    if built.skipped.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} file(s) skipped", built.skipped.len());
        Ok(ExitCode::from(3))
    }
}

fn cmd_classify(settings: &Settings, model: &Path, image: &Path, report: bool, out: Option<&Path>) -> CmdResult {
    let db = load_model(model)?;
    let (cfg, rule) = config_for_db(&settings.overrides()?, &db)?;
    let start = Instant::now();
    let raster = read_pnm(&read_file(image)?).map_err(|e| fail(format!("{}: {e}", image.display())))?;
    let stages = segment(&raster, &cfg)?;
    let features = extract_features::<f64>(&stages.crop, cfg.eigen_count)?;
    let result = classify(&features, &db.templates, rule)?;
    let elapsed = start.elapsed();

    if report {
        print!("{}", render_distance_table(&result));
    }
    if let Some(path) = out {
        write_file(path, distance_csv(&result)?)?;
    }
    let rule_name = match rule {
        Level1Rule::Vote => "vote",
        Level1Rule::First => "first",
    };
    println!("level-1 ({rule_name}): {}", result.level1_label);
    println!(
        "level-2: {} (weighted sum {:.4})",
        result.level2_label, result.rows[result.level2_row].weighted_sum
    );
    if !settings.no_timing {
        println!("latency: {:.4} s", elapsed.as_secs_f64());
    }
    Ok(ExitCode::SUCCESS)
}

fn print_eval(report: &EvalReport, settings: &Settings, confusion: bool, out: Option<&Path>) -> Result<(), Failure> {
    print!("{}", render_eval_table(report, !settings.no_timing));
    if confusion {
        println!();
        print!("{}", render_confusion(report));
    }
    if let Some(path) = out {
        write_file(path, eval_csv(report)?)?;
    }
    Ok(())
}

fn cmd_eval(settings: &Settings, input: &Path, holdout: Option<usize>, out: Option<&Path>, confusion: bool) -> CmdResult {
    let protocol = holdout.map_or(Protocol::LeaveOneOut, Protocol::Holdout);
    let overrides = settings.overrides()?;
    if input.is_dir() {
        let (cfg, rule) = overrides.resolve()?;
        let (report, built) = evaluate_corpus::<f64>(input, &cfg, protocol, rule)?;
        for (path, err) in &built.skipped {
            eprintln!("skipped {}: {err}", path.display());
        }
        print_eval(&report, settings, confusion, out)?;
    } else {
        let db = load_model(input)?;
        let (_, rule) = config_for_db(&overrides, &db)?;
        let report = evaluate(&db, protocol, rule)?;
        print_eval(&report, settings, confusion, out)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(out_dir: &Path, params: SynthParams) -> CmdResult {
    let corpus = synth_corpus(&params)?;
    let written = write_corpus(out_dir, &corpus)?;
    println!("wrote {written} images in {} classes to {}", corpus.len(), out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CmdResult {
    let s = &cli.settings;
    match cli.command {
        Command::Debug { image, out_dir } => cmd_debug(s, &image, &out_dir),
        Command::Train { corpus, model } => cmd_train(s, &corpus, &model),
        Command::Classify { model, image, report, out } => cmd_classify(s, &model, &image, report, out.as_deref()),
        Command::Eval { input, holdout, out, confusion } => cmd_eval(s, &input, holdout, out.as_deref(), confusion),
        Command::Synth { out_dir, seed, classes, samples, max_shift, scale_jitter, noise } => {
            let mut params = SynthParams::new(seed, classes, samples);
            params.jitter = Jitter { max_shift, scale: scale_jitter, noise };
            cmd_synth(&out_dir, params)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
