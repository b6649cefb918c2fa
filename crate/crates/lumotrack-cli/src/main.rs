//! Command-line frontend: track a sequence, score saved results, tone-map
//! a single image, or run a built-in synthetic smoke test.
//!
//! Exit codes: 0 success, 1 usage or invalid parameters, 2 I/O failure,
//! 3 malformed input data, 4 solver warnings escalated by `--strict`.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{build_tracker_config, Overrides};
use lumotrack::enhance::{enhance_image, EnhancementMaps};
use lumotrack::eval::{
    assemble_report, curves, load_sequence, read_results, track_sequence, track_sequence_with,
    write_curve_data, write_report_csv, write_report_json, write_results, Sequence, SequenceResult,
};
use lumotrack::illum::{classify_light, log_average_luminance, world_illuminance};
use lumotrack::raster::save_gray;
use lumotrack::synth::{Scene, SceneConfig};
use lumotrack::{Image, LightMode, Rect, Tracker, TrackerConfig};

#[derive(Parser)]
#[command(
    name = "lumotrack",
    version,
    about = "Illumination-adaptive dual-filter visual tracker"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Track one sequence directory and write per-frame boxes.
    Track(TrackArgs),
    /// Score existing results files against ground truth.
    Eval(EvalArgs),
    /// Tone-map a single image and report the lighting verdict.
    Enhance(EnhanceArgs),
    /// Run fast built-in checks on synthetic footage.
    Selftest,
}

#[derive(Args)]
struct TrackArgs {
    /// Sequence directory holding img/ and groundtruth_rect.txt.
    #[arg(long, value_name = "DIR")]
    seq: PathBuf,
    /// Results file to write, one "x,y,w,h" line per frame.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Save the per-frame target mask as PNGs next to the results file.
    #[arg(long)]
    dump_masks: bool,
    /// Fail with exit code 4 if the solver reported warnings.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of <sequence>.txt results files.
    #[arg(long, value_name = "DIR")]
    results: PathBuf,
    /// One sequence directory, or a dataset root of sequence directories.
    #[arg(long, value_name = "DIR")]
    seq: PathBuf,
    /// Output directory for report.json, report.csv and curve data.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct EnhanceArgs {
    /// Input image.
    input: PathBuf,
    /// Output image path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub(crate) struct Failure {
    pub(crate) code: u8,
    pub(crate) msg: String,
}

impl Failure {
    pub(crate) fn new(code: u8, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

impl From<lumotrack::Error> for Failure {
    fn from(e: lumotrack::Error) -> Self {
        use lumotrack::Error;
        let code = match &e {
            Error::Format { .. } | Error::MissingAsset { .. } => 3,
            Error::Io { .. } | Error::Image { .. } => 2,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage_ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if usage_ok { 0 } else { 1 });
        }
    };
    let outcome = match cli.cmd {
        Cmd::Track(args) => cmd_track(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Enhance(args) => cmd_enhance(args),
        Cmd::Selftest => cmd_selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_track(args: TrackArgs) -> Result<(), Failure> {
    let cfg = build_tracker_config(&args.overrides)?;
    let seq = load_sequence(&args.seq)?;
    let mask_dir = if args.dump_masks {
        let dir = args
            .out
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
            .join("masks");
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::new(2, format!("cannot create {}: {e}", dir.display())))?;
        Some(dir)
    } else {
        None
    };
    let tracked = if let Some(dir) = &mask_dir {
        track_sequence_with(&seq, &cfg, |frame_idx, tracker| {
            if let Some(mask) = tracker.last_mask() {
                save_gray(mask, dir.join(format!("{:04}.png", frame_idx + 1)))?;
            }
            Ok(())
        })?
    } else {
        track_sequence(&seq, &cfg)?
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::new(2, format!("cannot create {}: {e}", parent.display())))?;
    }
    write_results(&args.out, &tracked.boxes)?;
    println!("sequence: {}", seq.name);
    println!("frames: {}", seq.len());
    println!("mode: {}", tracked.mode);
    println!("fps_compute: {:.2}", tracked.fps_compute);
    println!("fps_total: {:.2}", tracked.fps_total);
    if tracked.solver_warnings > 0 {
        eprintln!("solver warnings: {}", tracked.solver_warnings);
        if args.strict {
            return Err(Failure::new(
                4,
                format!(
                    "solver reported {} warning(s) and --strict is set",
                    tracked.solver_warnings
                ),
            ));
        }
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let sequences = discover_sequences(&args.seq)?;
    let mut results = Vec::with_capacity(sequences.len());
    let mut scored = 0usize;
    for seq in &sequences {
        let path = args.results.join(format!("{}.txt", seq.name));
        results.push(match read_results(&path) {
            Ok(boxes) if boxes.len() == seq.len() => {
                scored += 1;
                score_sequence(seq, boxes)
            }
            Ok(boxes) => {
                let why = format!("{} result boxes for {} frames", boxes.len(), seq.len());
                log::warn!("{}: {why}; skipped", seq.name);
                failed_result(seq, why)
            }
            Err(e) => {
                log::warn!("{}: {e}; skipped", seq.name);
                failed_result(seq, e.to_string())
            }
        });
    }
    if scored == 0 {
        return Err(Failure::new(
            3,
            format!("no usable results files in {}", args.results.display()),
        ));
    }
    let report = assemble_report(results, &sequences);
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::new(2, format!("cannot create {}: {e}", args.out.display())))?;
    write_report_json(&args.out.join("report.json"), &report)?;
    write_report_csv(&args.out.join("report.csv"), &report)?;
    write_curve_data(&args.out, &report)?;
    println!(
        "sequences: {scored} scored, {} skipped",
        sequences.len() - scored
    );
    println!("dp20: {:.4}", report.dp20);
    println!("auc: {:.4}", report.auc);
    Ok(())
}

/// Accept either one sequence directory or a root whose children are
/// sequence directories.
fn discover_sequences(root: &Path) -> Result<Vec<Sequence>, Failure> {
    if root.join("img").is_dir() {
        return Ok(vec![load_sequence(root)?]);
    }
    let entries = fs::read_dir(root)
        .map_err(|e| Failure::new(2, format!("cannot read {}: {e}", root.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("img").is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(Failure::new(
            3,
            format!("no sequence directories under {}", root.display()),
        ));
    }
    dirs.iter()
        .map(|d| load_sequence(d).map_err(Failure::from))
        .collect()
}

fn score_sequence(seq: &Sequence, boxes: Vec<Rect>) -> SequenceResult {
    let (precision, success) = curves(&boxes, &seq.ground_truth);
    SequenceResult {
        name: seq.name.clone(),
        frames: seq.len(),
        mode: None,
        dp20: lumotrack::eval::dp20(&precision),
        auc: lumotrack::eval::auc(&success),
        precision,
        success,
        fps_compute: 0.0,
        fps_total: 0.0,
        solver_warnings: 0,
        failed: None,
        boxes,
    }
}

fn failed_result(seq: &Sequence, why: String) -> SequenceResult {
    SequenceResult {
        name: seq.name.clone(),
        frames: seq.len(),
        mode: None,
        dp20: 0.0,
        auc: 0.0,
        precision: vec![0.0; 51],
        success: vec![0.0; 51],
        fps_compute: 0.0,
        fps_total: 0.0,
        solver_warnings: 0,
        failed: Some(why),
        boxes: Vec::new(),
    }
}

fn cmd_enhance(args: EnhanceArgs) -> Result<(), Failure> {
    let cfg = build_tracker_config(&args.overrides)?;
    let illum = &cfg.illuminance;
    let img = Image::load(&args.input)?;
    let l_w = world_illuminance(&img, illum)?;
    let l_tilde = log_average_luminance(&l_w, illum.delta)?;
    let mode = classify_light(l_tilde, illum.tau);
    let maps = EnhancementMaps::compute(&img, illum, l_tilde)?;
    let out = if maps.degenerate {
        img
    } else {
        enhance_image(&img, &maps)?
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::new(2, format!("cannot create {}: {e}", parent.display())))?;
    }
    out.save(&args.out)?;
    println!("log_average_luminance: {l_tilde:.6}");
    println!("mode: {mode}");
    Ok(())
}

fn cmd_selftest() -> Result<(), Failure> {
    let mut failures = 0usize;
    let mut check = |name: &str, pass: bool, detail: String| {
        if pass {
            println!("PASS {name}: {detail}");
        } else {
            println!("FAIL {name}: {detail}");
            failures += 1;
        }
    };

    let base = SceneConfig {
        dims: (150, 220),
        target0: Rect::from_center(75.0, 70.0, 36.0, 36.0),
        velocity: (2.5, 0.5),
        frames: 12,
        ..SceneConfig::default()
    };

    match selftest_tracking(&base) {
        Ok((mode, cle)) => check(
            "day tracking",
            mode == LightMode::Day && cle <= 5.0,
            format!("mode {mode}, mean centre error {cle:.2} px"),
        ),
        Err(e) => check("day tracking", false, e.msg),
    }

    let dark = SceneConfig {
        brightness: 0.08,
        ..base
    };
    match selftest_tracking(&dark) {
        Ok((mode, cle)) => check(
            "night tracking",
            mode == LightMode::Night && cle <= 8.0,
            format!("mode {mode}, mean centre error {cle:.2} px"),
        ),
        Err(e) => check("night tracking", false, e.msg),
    }

    let gray = Image::from_fn(32, 32, |_, _| (0.18, 0.18, 0.18));
    match enhance_uniform_error(&gray) {
        Ok(err) => check(
            "uniform enhancement",
            err <= 1e-9,
            format!("max deviation from white {err:.2e}"),
        ),
        Err(e) => check("uniform enhancement", false, e.msg),
    }

    if failures > 0 {
        Err(Failure::new(1, format!("{failures} selftest check(s) failed")))
    } else {
        println!("all selftest checks passed");
        Ok(())
    }
}

/// Track a synthetic scene in memory; returns the chosen mode and the
/// mean centre error in pixels.
fn selftest_tracking(cfg: &SceneConfig) -> Result<(LightMode, f64), Failure> {
    let scene = Scene::new(cfg.clone());
    let first = scene.frame(0);
    let tracker_cfg = TrackerConfig::default();
    let mut tracker = Tracker::init(&first, scene.truth(0), tracker_cfg)?;
    let mut total = 0.0;
    for i in 1..scene.num_frames() {
        let state = tracker.track_frame(&scene.frame(i))?;
        let truth = scene.truth(i);
        let (cx, cy) = state.position;
        let (tx, ty) = truth.center();
        total += ((cx - tx).powi(2) + (cy - ty).powi(2)).sqrt();
    }
    let mean = total / (scene.num_frames() - 1) as f64;
    Ok((tracker.mode(), mean))
}

/// Enhancing a uniform image must yield uniform white.
fn enhance_uniform_error(img: &Image) -> Result<f64, Failure> {
    let cfg = TrackerConfig::default();
    let illum = &cfg.illuminance;
    let l_w = world_illuminance(img, illum)?;
    let l_tilde = log_average_luminance(&l_w, illum.delta)?;
    let maps = EnhancementMaps::compute(img, illum, l_tilde)?;
    if maps.degenerate {
        return Ok(f64::INFINITY);
    }
    let out = enhance_image(img, &maps)?;
    let mut worst = 0.0f64;
    for v in out.data().iter() {
        worst = worst.max((v - 1.0).abs());
    }
    Ok(worst)
}
