//! Per-frame orchestration loop.
//!
//! Frame 1 fixes the lighting mode and the patch geometry; every later
//! frame runs crop -> (night enhancement) -> mask -> features -> fused
//! detection -> scale estimation -> model update -> retraining. All state
//! lives in one single-owner handle and the loop is fully deterministic.

use ndarray::Array2;

use crate::dcf::{
    self,
    baseline::{detect_baseline, train_baseline, BaselineFilter},
    gaussian_label, train_dual_filters, AdmmSchedule, AppearanceModel, DualFilter, GaussianLabel,
    ResponseMap, SolverReport, TrainConfig,
};
use crate::enhance::{enhance_image, EnhancementMaps};
use crate::error::{Error, Result};
use crate::features::{crop_patch, CnSource, FeatureConfig, FeatureExtractor, FeatureMap};
use crate::geom::Rect;
use crate::illum::{
    classify_light, log_average_luminance, world_illuminance, IlluminanceConfig, LightMode,
};
use crate::mask::{downsample_mask, generate_mask, GridRect};
use crate::raster::Image;
use crate::scale::{ScaleConfig, ScaleFilterState};

/// Which translation engine drives the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Context + target-focused filter pair with fused response.
    #[default]
    Dual,
    /// Independently coded single-filter reference path.
    BaselineSingle,
}

/// Lighting-mode selection at init.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeSelect {
    /// Decide from the first frame's log-average luminance.
    #[default]
    Auto,
    ForceDay,
    ForceNight,
}

#[derive(Debug, Clone)]
pub struct TrackerConfig {
    pub illuminance: IlluminanceConfig,
    /// Profile active when the first frame reads as daylight.
    pub day: TrainConfig,
    /// Profile active when the first frame reads as night.
    pub night: TrainConfig,
    pub schedule: AdmmSchedule,
    pub scale: ScaleConfig,
    /// Search-region area as a multiple of the target area.
    pub search_area_scale: f64,
    /// Feature cell edge in pixels.
    pub cell_size: usize,
    /// Label width relative to the target's cell diagonal.
    pub sigma_factor: f64,
    /// Cap on the resized search patch, in feature cells of area.
    pub max_model_cells: usize,
    pub mode: ModeSelect,
    pub backend: Backend,
    /// Apply low-light enhancement to night patches.
    pub enhance: bool,
    /// Gate the target-focused stream with the illuminance-change mask.
    pub masked: bool,
    /// Sub-cell quadratic peak interpolation.
    pub subcell_refine: bool,
    pub cn: CnSource,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            illuminance: IlluminanceConfig::default(),
            day: TrainConfig::day(),
            night: TrainConfig::night(),
            schedule: AdmmSchedule::default(),
            scale: ScaleConfig::default(),
            search_area_scale: 5.0,
            cell_size: 4,
            sigma_factor: 1.0 / 16.0,
            max_model_cells: 2500,
            mode: ModeSelect::Auto,
            backend: Backend::Dual,
            enhance: true,
            masked: true,
            subcell_refine: true,
            cn: CnSource::Builtin,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        self.illuminance.validate()?;
        self.day.validate()?;
        self.night.validate()?;
        self.scale.validate()?;
        if !self.search_area_scale.is_finite() || self.search_area_scale < 1.0 {
            return Err(Error::invalid_config("search_area_scale must be >= 1"));
        }
        if self.cell_size == 0 {
            return Err(Error::invalid_config("cell_size must be positive"));
        }
        if !self.sigma_factor.is_finite() || self.sigma_factor <= 0.0 {
            return Err(Error::invalid_config("sigma_factor must be positive"));
        }
        if self.max_model_cells < 9 {
            return Err(Error::invalid_config("max_model_cells too small"));
        }
        Ok(())
    }
}

/// Public per-frame output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    /// Box center (x, y) in frame pixels.
    pub position: (f64, f64),
    /// Box size (w, h) in pixels.
    pub size: (f64, f64),
    pub mode: LightMode,
    /// 1-based; the init frame is 1.
    pub frame_index: usize,
    pub low_confidence: bool,
}

impl TrackState {
    pub fn bbox(&self) -> Rect {
        Rect::from_center(self.position.0, self.position.1, self.size.0, self.size.1)
    }
}

/// Crop/enhance/mask/feature stage with geometry frozen at init.
#[derive(Debug, Clone)]
struct PatchPipeline {
    /// Resized search patch (width, height) px; a whole number of cells.
    patch_px: (usize, usize),
    /// Target footprint on the resized patch, pixel coordinates.
    mask_window: GridRect,
    area_scale: f64,
    cell: usize,
    extractor: FeatureExtractor,
    illum: IlluminanceConfig,
    night: bool,
    enhance: bool,
    masked: bool,
}

impl PatchPipeline {
    fn night_cfg(&self) -> Option<&IlluminanceConfig> {
        (self.night && self.enhance).then_some(&self.illum)
    }

    /// Context features, target-focused features, and the pixel mask (when
    /// masking is on) for a crop at `center` covering `size` times the
    /// search-area factor.
    fn bundle(
        &self,
        frame: &Image,
        center: (f64, f64),
        size: (f64, f64),
    ) -> Result<(FeatureMap, FeatureMap, Option<Array2<f64>>)> {
        let patch = crop_patch(frame, center, size, self.area_scale, self.patch_px);
        // The change plane always comes from the raw crop: it measures what
        // the enhancer would do, whether or not it is applied.
        let l_w = world_illuminance(&patch, &self.illum)?;
        let l_tilde = log_average_luminance(&l_w, self.illum.delta)?;
        let maps = EnhancementMaps::compute(&patch, &self.illum, l_tilde)?;
        let feature_patch = if self.night && self.enhance && !maps.degenerate {
            enhance_image(&patch, &maps)?
        } else {
            patch
        };
        let x_g = self.extractor.extract(&feature_patch)?;
        if !self.masked {
            let x_o = x_g.clone();
            return Ok((x_g, x_o, None));
        }
        let mask = generate_mask(&maps.theta, self.mask_window)?;
        let cell_mask = downsample_mask(&mask.gated, self.cell);
        let x_o = x_g.masked(&cell_mask)?;
        Ok((x_g, x_o, Some(mask.gated)))
    }
}

pub struct Tracker {
    cfg: TrackerConfig,
    active: TrainConfig,
    mode: LightMode,
    init_luminance: f64,
    pipeline: PatchPipeline,
    frame_dims: (usize, usize),
    base_size: (f64, f64),
    position: (f64, f64),
    support: GridRect,
    label: GaussianLabel,
    scale: ScaleFilterState,
    model: AppearanceModel,
    dual: Option<DualFilter>,
    single: Option<BaselineFilter>,
    last_report: Option<SolverReport>,
    last_response: Option<Array2<f64>>,
    last_mask: Option<Array2<f64>>,
    warnings: usize,
    frame_index: usize,
    low_confidence: bool,
}

impl Tracker {
    /// Builds the handle from the first frame and its box, decides the
    /// lighting mode, and trains all filters on frame 1.
    pub fn init(frame: &Image, bbox: Rect, cfg: TrackerConfig) -> Result<Tracker> {
        cfg.validate()?;
        let (fh, fw) = frame.dims();
        if fh == 0 || fw == 0 {
            return Err(Error::invalid_input("empty frame"));
        }
        if !bbox.is_valid() {
            return Err(Error::invalid_input(
                "bbox needs positive area and finite coordinates",
            ));
        }
        let ix = (bbox.x + bbox.w).min(fw as f64) - bbox.x.max(0.0);
        let iy = (bbox.y + bbox.h).min(fh as f64) - bbox.y.max(0.0);
        if ix <= 0.0 || iy <= 0.0 {
            return Err(Error::invalid_input("bbox does not intersect the frame"));
        }

        // Mode decision from the whole first frame.
        let l_w = world_illuminance(frame, &cfg.illuminance)?;
        let init_luminance = log_average_luminance(&l_w, cfg.illuminance.delta)?;
        let mode = match cfg.mode {
            ModeSelect::Auto => classify_light(init_luminance, cfg.illuminance.tau),
            ModeSelect::ForceDay => LightMode::Day,
            ModeSelect::ForceNight => LightMode::Night,
        };
        let active = match mode {
            LightMode::Day => cfg.day,
            LightMode::Night => cfg.night,
        };

        // Patch geometry, frozen for the whole sequence.
        let base_size = (bbox.w, bbox.h);
        let axis = cfg.search_area_scale.sqrt();
        let search = (base_size.0 * axis, base_size.1 * axis);
        let cell = cfg.cell_size as f64;
        let shrink = ((cfg.max_model_cells as f64 * cell * cell) / (search.0 * search.1))
            .sqrt()
            .min(1.0);
        let snap = |v: f64| ((v * shrink / cell).round().max(3.0) as usize) * cfg.cell_size;
        let patch_px = (snap(search.0), snap(search.1));
        let grid = (patch_px.1 / cfg.cell_size, patch_px.0 / cfg.cell_size);
        // Target footprint after the same resize.
        let t_px = (
            ((patch_px.0 as f64 / axis).round() as usize).clamp(1, patch_px.0),
            ((patch_px.1 as f64 / axis).round() as usize).clamp(1, patch_px.1),
        );
        let mask_window = GridRect::centered(patch_px.1, patch_px.0, t_px.1, t_px.0);
        let t_cells = (
            ((t_px.1 as f64 / cell).round() as usize).clamp(1, grid.0),
            ((t_px.0 as f64 / cell).round() as usize).clamp(1, grid.1),
        );
        let support = GridRect::centered(grid.0, grid.1, t_cells.0, t_cells.1);
        let label = gaussian_label(grid, cfg.sigma_factor, t_cells);

        let extractor = FeatureExtractor::new(&FeatureConfig {
            cell_size: cfg.cell_size,
            windowed: true,
            cn: cfg.cn.clone(),
        })?;
        let pipeline = PatchPipeline {
            patch_px,
            mask_window,
            area_scale: cfg.search_area_scale,
            cell: cfg.cell_size,
            extractor,
            illum: cfg.illuminance,
            night: mode == LightMode::Night,
            enhance: cfg.enhance,
            masked: cfg.masked,
        };

        let position = bbox.center();
        let (x_g, x_o, mask) = pipeline.bundle(frame, position, base_size)?;
        let model = AppearanceModel::init(x_g, x_o);
        let (dual, single, report) =
            train_backend(&model, &label, &active, &cfg.schedule, support, cfg.backend)?;

        let mut scale = ScaleFilterState::new(cfg.scale.clone(), (fh, fw), base_size)?;
        scale.update(frame, position, base_size, active.eta_s, pipeline.night_cfg())?;

        let warnings = report_warnings(&report);
        Ok(Tracker {
            cfg,
            active,
            mode,
            init_luminance,
            pipeline,
            frame_dims: (fh, fw),
            base_size,
            position,
            support,
            label,
            scale,
            model,
            dual,
            single,
            last_report: report,
            last_response: None,
            last_mask: mask,
            warnings,
            frame_index: 1,
            low_confidence: false,
        })
    }

    /// Advances one frame: translation at the previous scale, then scale at
    /// the new position, then model update and retraining.
    pub fn track_frame(&mut self, frame: &Image) -> Result<TrackState> {
        if frame.dims() != self.frame_dims {
            return Err(Error::invalid_input("frame size changed mid-sequence"));
        }
        let mut low_conf = false;
        let size = self.current_size();

        let (z_g, z_o, _) = self.pipeline.bundle(frame, self.position, size)?;
        let resp = match self.cfg.backend {
            Backend::Dual => dcf::detect(
                self.dual.as_ref().expect("dual backend trained"),
                &z_g,
                &z_o,
                self.active.psi,
            )?,
            Backend::BaselineSingle => ResponseMap {
                values: detect_baseline(
                    self.single.as_ref().expect("baseline backend trained"),
                    &z_g,
                )?,
                imag_residual: 0.0,
            },
        };
        let peak = dcf::locate_peak(&resp, self.cfg.subcell_refine);
        low_conf |= peak.low_confidence;
        self.last_response = Some(resp.values);

        // One response cell spans cell_size pixels of the resized patch,
        // which maps back to the frame through the crop's resize ratio.
        let cell = self.cfg.cell_size as f64;
        let axis = self.cfg.search_area_scale.sqrt();
        let px_per_cell = (
            cell * size.0 * axis / self.pipeline.patch_px.0 as f64,
            cell * size.1 * axis / self.pipeline.patch_px.1 as f64,
        );
        let mut cx = self.position.0 + peak.dx * px_per_cell.0;
        let mut cy = self.position.1 + peak.dy * px_per_cell.1;
        let (fh, fw) = self.frame_dims;
        let pred = Rect::from_center(cx, cy, size.0, size.1);
        let ox = (pred.x + pred.w).min(fw as f64) - pred.x.max(0.0);
        let oy = (pred.y + pred.h).min(fh as f64) - pred.y.max(0.0);
        if ox <= 0.0 || oy <= 0.0 {
            // Fully out of frame: keep tracking the clamped crop.
            low_conf = true;
        }
        cx = cx.clamp(0.0, fw as f64 - 1.0);
        cy = cy.clamp(0.0, fh as f64 - 1.0);
        self.position = (cx, cy);

        // Scale after translation.
        let est = self
            .scale
            .detect(frame, self.position, size, self.pipeline.night_cfg())?;
        low_conf |= est.low_confidence;
        self.scale.apply_multiplier(est.multiplier);
        let new_size = self.current_size();

        // Learn from the settled box.
        let (x_g, x_o, mask) = self.pipeline.bundle(frame, self.position, new_size)?;
        self.model.update(&x_g, &x_o, self.active.eta_t);
        let (dual, single, report) = train_backend(
            &self.model,
            &self.label,
            &self.active,
            &self.cfg.schedule,
            self.support,
            self.cfg.backend,
        )?;
        self.dual = dual;
        self.single = single;
        self.warnings += report_warnings(&report);
        self.last_report = report;
        self.scale
            .update(frame, self.position, new_size, self.active.eta_s, self.pipeline.night_cfg())?;
        self.last_mask = mask;

        self.frame_index += 1;
        self.low_confidence = low_conf;
        Ok(self.state())
    }

    pub fn state(&self) -> TrackState {
        TrackState {
            position: self.position,
            size: self.current_size(),
            mode: self.mode,
            frame_index: self.frame_index,
            low_confidence: self.low_confidence,
        }
    }

    pub fn current_size(&self) -> (f64, f64) {
        (
            self.base_size.0 * self.scale.scale(),
            self.base_size.1 * self.scale.scale(),
        )
    }

    pub fn mode(&self) -> LightMode {
        self.mode
    }

    /// Log-average luminance of the init frame the mode was decided on.
    pub fn init_luminance(&self) -> f64 {
        self.init_luminance
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    /// Count of solver warnings accumulated over the sequence.
    pub fn solver_warnings(&self) -> usize {
        self.warnings
    }

    pub fn last_report(&self) -> Option<&SolverReport> {
        self.last_report.as_ref()
    }

    /// Fused response of the most recent detection, response-grid resolution.
    pub fn last_response(&self) -> Option<&Array2<f64>> {
        self.last_response.as_ref()
    }

    /// Pixel-resolution mask of the most recent training patch.
    pub fn last_mask(&self) -> Option<&Array2<f64>> {
        self.last_mask.as_ref()
    }
}

fn train_backend(
    model: &AppearanceModel,
    label: &GaussianLabel,
    active: &TrainConfig,
    schedule: &AdmmSchedule,
    support: GridRect,
    backend: Backend,
) -> Result<(Option<DualFilter>, Option<BaselineFilter>, Option<SolverReport>)> {
    match backend {
        Backend::Dual => {
            let (filter, report) =
                train_dual_filters(&model.x_g, &model.x_o, label, active, schedule, support)?;
            Ok((Some(filter), None, Some(report)))
        }
        Backend::BaselineSingle => {
            let filter = train_baseline(&model.x_g, label, active.lambda, schedule, support)?;
            Ok((None, Some(filter), None))
        }
    }
}

fn report_warnings(report: &Option<SolverReport>) -> usize {
    usize::from(report.as_ref().is_some_and(|r| r.warning.is_some()))
}
