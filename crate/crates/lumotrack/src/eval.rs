//! Benchmark harness: sequence ingestion, one-pass evaluation, and
//! precision/success metrics.
//!
//! A sequence directory holds zero-padded frames under `img/` and a
//! `groundtruth_rect.txt` with one 1-based "x,y,w,h" line per frame
//! (comma or tab separated; a NaN line marks an absent target and is
//! excluded from metrics). Evaluation initializes a tracker from the
//! frame-1 box, runs to the end without resets, and scores the predicted
//! boxes with 51-sample precision (center error 0..50 px) and success
//! (overlap 0..1) curves. Aggregates are unweighted means over sequences.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::raster::Image;
use crate::tracker::{Tracker, TrackerConfig};

/// Center-error thresholds: 0..=50 px, step 1.
pub const PRECISION_SAMPLES: usize = 51;
/// Overlap thresholds: 0..=1, step 0.02.
pub const SUCCESS_SAMPLES: usize = 51;
/// The headline precision threshold in pixels.
pub const DP_THRESHOLD_PX: usize = 20;

/// Recognized sequence attribute tags.
pub const KNOWN_ATTRIBUTES: [&str; 5] = ["VC", "FM", "LR", "OCC", "IV"];

/// An on-disk sequence: ordered frame paths plus per-frame annotations.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<PathBuf>,
    /// `None` marks an absent/occluded frame (NaN sentinel in the file).
    pub ground_truth: Vec<Option<Rect>>,
    pub attributes: Vec<String>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn load_frame(&self, i: usize) -> Result<Image> {
        Image::load(&self.frames[i])
    }
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Loads a sequence directory: `img/0001.png`-style frames,
/// `groundtruth_rect.txt`, and an optional `attributes.txt`.
pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".to_string());

    let img_dir = dir.join("img");
    let entries = fs::read_dir(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
    let mut frames: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(Error::format(&img_dir, None, "no frame images found"));
    }

    let gt_path = dir.join("groundtruth_rect.txt");
    let text = fs::read_to_string(&gt_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            Error::format(&gt_path, None, "ground-truth file missing")
        }
        _ => Error::io(&gt_path, e),
    })?;
    let mut ground_truth = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        ground_truth.push(parse_box_line(line, &gt_path, idx + 1)?.map(|(x, y, w, h)| {
            // File origin is 1-based; internal boxes are 0-based.
            Rect::new(x - 1.0, y - 1.0, w, h)
        }));
    }
    if ground_truth.len() != frames.len() {
        return Err(Error::format(
            &gt_path,
            None,
            format!(
                "{} annotation lines for {} frames",
                ground_truth.len(),
                frames.len()
            ),
        ));
    }
    for (i, gt) in ground_truth.iter().enumerate() {
        if let Some(r) = gt {
            if !r.is_valid() {
                return Err(Error::format(
                    &gt_path,
                    Some(i + 1),
                    "box must have positive area",
                ));
            }
        }
    }

    let attr_path = dir.join("attributes.txt");
    let attributes = match fs::read_to_string(&attr_path) {
        Ok(text) => {
            let mut tags = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                let tag = line.trim();
                if tag.is_empty() {
                    continue;
                }
                if !KNOWN_ATTRIBUTES.contains(&tag) {
                    return Err(Error::format(
                        &attr_path,
                        Some(idx + 1),
                        format!("unknown attribute {tag:?}"),
                    ));
                }
                tags.push(tag.to_string());
            }
            tags
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(Error::io(&attr_path, e)),
    };

    Ok(Sequence {
        name,
        frames,
        ground_truth,
        attributes,
    })
}

/// Parses one "x,y,w,h" line (comma or tab separated, literal file
/// coordinates). A line whose fields are NaN yields `None`.
fn parse_box_line(
    line: &str,
    path: &Path,
    line_no: usize,
) -> Result<Option<(f64, f64, f64, f64)>> {
    let fields: Vec<&str> = line
        .split([',', '\t'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if fields.len() != 4 {
        return Err(Error::format(
            path,
            Some(line_no),
            format!("expected 4 fields, got {}", fields.len()),
        ));
    }
    let mut vals = [0.0f64; 4];
    for (i, f) in fields.iter().enumerate() {
        vals[i] = f.parse::<f64>().map_err(|_| {
            Error::format(path, Some(line_no), format!("unparsable number {f:?}"))
        })?;
    }
    if vals.iter().any(|v| v.is_nan()) {
        return Ok(None);
    }
    Ok(Some((vals[0], vals[1], vals[2], vals[3])))
}

/// Euclidean distance between box centers, in pixels.
pub fn center_error(pred: &Rect, gt: &Rect) -> f64 {
    pred.center_distance(gt)
}

/// Intersection-over-union of two boxes.
pub fn iou(pred: &Rect, gt: &Rect) -> f64 {
    pred.iou(gt)
}

/// Precision and success curves for one trajectory. Frames without ground
/// truth are skipped; if none remain, both curves are all zeros.
pub fn curves(pred: &[Rect], gt: &[Option<Rect>]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(pred.len(), gt.len(), "prediction/annotation length mismatch");
    let mut cle = Vec::new();
    let mut overlap = Vec::new();
    for (p, g) in pred.iter().zip(gt.iter()) {
        if let Some(g) = g {
            cle.push(center_error(p, g));
            overlap.push(iou(p, g));
        }
    }
    let n = cle.len() as f64;
    let mut precision = vec![0.0; PRECISION_SAMPLES];
    let mut success = vec![0.0; SUCCESS_SAMPLES];
    if n == 0.0 {
        return (precision, success);
    }
    for (t, p) in precision.iter_mut().enumerate() {
        *p = cle.iter().filter(|&&e| e <= t as f64).count() as f64 / n;
    }
    for (t, s) in success.iter_mut().enumerate() {
        let thr = t as f64 * 0.02;
        *s = overlap.iter().filter(|&&o| o >= thr).count() as f64 / n;
    }
    (precision, success)
}

/// Fraction of frames with center error within the headline threshold.
pub fn dp20(precision: &[f64]) -> f64 {
    precision[DP_THRESHOLD_PX]
}

/// Mean of the success-curve samples.
pub fn auc(success: &[f64]) -> f64 {
    success.iter().sum::<f64>() / success.len() as f64
}

/// One tracked-and-scored sequence inside a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceResult {
    pub name: String,
    pub frames: usize,
    /// Lighting mode the tracker decided ("day"/"night"), when tracked.
    pub mode: Option<String>,
    pub precision: Vec<f64>,
    pub success: Vec<f64>,
    pub dp20: f64,
    pub auc: f64,
    /// Frames per second counting only tracker compute.
    pub fps_compute: f64,
    /// Frames per second including image decoding.
    pub fps_total: f64,
    pub solver_warnings: usize,
    /// Failure message when the tracker aborted; such sequences are
    /// excluded from aggregates.
    pub failed: Option<String>,
    /// Predicted boxes (internal 0-based coordinates); not serialized.
    #[serde(skip)]
    pub boxes: Vec<Rect>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeReport {
    pub sequences: usize,
    pub dp20: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub sequences: Vec<SequenceResult>,
    pub aggregate_precision: Vec<f64>,
    pub aggregate_success: Vec<f64>,
    pub dp20: f64,
    pub auc: f64,
    pub mean_fps_compute: f64,
    pub mean_fps_total: f64,
    pub attributes: BTreeMap<String, AttributeReport>,
}

/// Raw outcome of tracking one sequence.
#[derive(Debug, Clone)]
pub struct TrackedSequence {
    pub boxes: Vec<Rect>,
    pub mode: String,
    pub fps_compute: f64,
    pub fps_total: f64,
    pub solver_warnings: usize,
}

/// Runs the tracker over every frame of a sequence, initializing from the
/// frame-1 annotation.
pub fn track_sequence(seq: &Sequence, cfg: &TrackerConfig) -> Result<TrackedSequence> {
    track_sequence_with(seq, cfg, |_, _| Ok(()))
}

/// Like [`track_sequence`], invoking `observer(frame_index, tracker)` after
/// every frame (including init). Observer time is not billed as compute.
pub fn track_sequence_with(
    seq: &Sequence,
    cfg: &TrackerConfig,
    mut observer: impl FnMut(usize, &Tracker) -> Result<()>,
) -> Result<TrackedSequence> {
    if seq.is_empty() {
        return Err(Error::invalid_input("sequence has no frames"));
    }
    let init_box = seq.ground_truth[0]
        .ok_or_else(|| Error::invalid_input("first frame has no ground-truth box"))?;

    let wall = Instant::now();
    let mut compute = std::time::Duration::ZERO;

    let frame = seq.load_frame(0)?;
    let t = Instant::now();
    let mut tracker = Tracker::init(&frame, init_box, cfg.clone())?;
    compute += t.elapsed();
    let mut boxes = vec![tracker.state().bbox()];
    observer(0, &tracker)?;

    for i in 1..seq.len() {
        let frame = seq.load_frame(i)?;
        let t = Instant::now();
        let state = tracker.track_frame(&frame)?;
        compute += t.elapsed();
        boxes.push(state.bbox());
        observer(i, &tracker)?;
    }

    let n = seq.len() as f64;
    let total = wall.elapsed();
    Ok(TrackedSequence {
        boxes,
        mode: tracker.mode().to_string(),
        fps_compute: n / compute.as_secs_f64().max(1e-9),
        fps_total: n / total.as_secs_f64().max(1e-9),
        solver_warnings: tracker.solver_warnings(),
    })
}

/// One-pass evaluation over many sequences (parallel, deterministic
/// output order). Failed sequences are reported but excluded from
/// aggregate curves and rates.
pub fn run_ope(sequences: &[Sequence], cfg: &TrackerConfig) -> EvalReport {
    let results: Vec<SequenceResult> = sequences
        .par_iter()
        .map(|seq| match track_sequence(seq, cfg) {
            Ok(t) => {
                let (precision, success) = curves(&t.boxes, &seq.ground_truth);
                let dp = dp20(&precision);
                let au = auc(&success);
                SequenceResult {
                    name: seq.name.clone(),
                    frames: seq.len(),
                    mode: Some(t.mode),
                    precision,
                    success,
                    dp20: dp,
                    auc: au,
                    fps_compute: t.fps_compute,
                    fps_total: t.fps_total,
                    solver_warnings: t.solver_warnings,
                    failed: None,
                    boxes: t.boxes,
                }
            }
            Err(e) => {
                log::warn!("sequence {} failed: {e}", seq.name);
                SequenceResult {
                    name: seq.name.clone(),
                    frames: seq.len(),
                    mode: None,
                    precision: vec![0.0; PRECISION_SAMPLES],
                    success: vec![0.0; SUCCESS_SAMPLES],
                    dp20: 0.0,
                    auc: 0.0,
                    fps_compute: 0.0,
                    fps_total: 0.0,
                    solver_warnings: 0,
                    failed: Some(e.to_string()),
                    boxes: Vec::new(),
                }
            }
        })
        .collect();
    assemble_report(results, sequences)
}

/// Builds a report from already-scored sequences (used both by `run_ope`
/// and by offline scoring of results files).
pub fn assemble_report(results: Vec<SequenceResult>, sequences: &[Sequence]) -> EvalReport {
    let ok: Vec<&SequenceResult> = results.iter().filter(|r| r.failed.is_none()).collect();
    let n = ok.len() as f64;
    let mut aggregate_precision = vec![0.0; PRECISION_SAMPLES];
    let mut aggregate_success = vec![0.0; SUCCESS_SAMPLES];
    let mut fps_c = 0.0;
    let mut fps_t = 0.0;
    for r in &ok {
        for (a, v) in aggregate_precision.iter_mut().zip(r.precision.iter()) {
            *a += v / n;
        }
        for (a, v) in aggregate_success.iter_mut().zip(r.success.iter()) {
            *a += v / n;
        }
        fps_c += r.fps_compute / n;
        fps_t += r.fps_total / n;
    }

    // Attribute splits: unweighted means over tagged, successful sequences.
    let mut attributes = BTreeMap::new();
    for tag in KNOWN_ATTRIBUTES {
        let tagged: Vec<&&SequenceResult> = ok
            .iter()
            .filter(|r| {
                sequences
                    .iter()
                    .find(|s| s.name == r.name)
                    .is_some_and(|s| s.attributes.iter().any(|a| a == tag))
            })
            .collect();
        if tagged.is_empty() {
            continue;
        }
        let m = tagged.len() as f64;
        attributes.insert(
            tag.to_string(),
            AttributeReport {
                sequences: tagged.len(),
                dp20: tagged.iter().map(|r| r.dp20).sum::<f64>() / m,
                auc: tagged.iter().map(|r| r.auc).sum::<f64>() / m,
            },
        );
    }

    let dp = if ok.is_empty() {
        0.0
    } else {
        dp20(&aggregate_precision)
    };
    let au = if ok.is_empty() {
        0.0
    } else {
        auc(&aggregate_success)
    };
    EvalReport {
        sequences: results,
        aggregate_precision,
        aggregate_success,
        dp20: dp,
        auc: au,
        mean_fps_compute: fps_c,
        mean_fps_total: fps_t,
        attributes,
    }
}

/// Writes per-frame boxes as 1-based "x,y,w,h" lines with two decimals.
pub fn write_results(path: &Path, boxes: &[Rect]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut out = String::new();
    for r in boxes {
        out.push_str(&format!(
            "{:.2},{:.2},{:.2},{:.2}\n",
            r.x + 1.0,
            r.y + 1.0,
            r.w,
            r.h
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a results file back into internal 0-based boxes.
pub fn read_results(path: &Path) -> Result<Vec<Rect>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut boxes = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_box_line(line, path, idx + 1)? {
            Some((x, y, w, h)) => boxes.push(Rect::new(x - 1.0, y - 1.0, w, h)),
            None => {
                return Err(Error::format(
                    path,
                    Some(idx + 1),
                    "results may not contain NaN boxes",
                ))
            }
        }
    }
    Ok(boxes)
}

/// Serializes the report as pretty JSON.
pub fn write_report_json(path: &Path, report: &EvalReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::invalid_input(format!("report serialization: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// One-line-per-sequence CSV summary plus an aggregate row.
pub fn write_report_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut out = String::from("name,frames,mode,dp20,auc,fps_compute,fps_total,failed\n");
    for r in &report.sequences {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.2},{:.2},{}\n",
            r.name,
            r.frames,
            r.mode.as_deref().unwrap_or("-"),
            r.dp20,
            r.auc,
            r.fps_compute,
            r.fps_total,
            r.failed.as_deref().unwrap_or("")
        ));
    }
    out.push_str(&format!(
        "AGGREGATE,,,{:.6},{:.6},{:.2},{:.2},\n",
        report.dp20, report.auc, report.mean_fps_compute, report.mean_fps_total
    ));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Two-column curve dumps ready for external plotting.
pub fn write_curve_data(dir: &Path, report: &EvalReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p_path = dir.join("precision_curve.dat");
    let mut p = fs::File::create(&p_path).map_err(|e| Error::io(&p_path, e))?;
    for (t, v) in report.aggregate_precision.iter().enumerate() {
        writeln!(p, "{t} {v:.6}").map_err(|e| Error::io(&p_path, e))?;
    }
    let s_path = dir.join("success_curve.dat");
    let mut s = fs::File::create(&s_path).map_err(|e| Error::io(&s_path, e))?;
    for (t, v) in report.aggregate_success.iter().enumerate() {
        writeln!(s, "{:.2} {v:.6}", t as f64 * 0.02).map_err(|e| Error::io(&s_path, e))?;
    }
    Ok(())
}
