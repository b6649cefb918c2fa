//! CPU real-time visual object tracking with illumination-adaptive mode
//! switching.
//!
//! The tracker decides on the first frame whether a sequence was shot in
//! daylight or at night, tone-maps dark patches with a log-curve enhancer,
//! derives a target-aware binary mask from the per-pixel illuminance change
//! the enhancer induces, and trains a pair of correlation filters (a context
//! filter on the full search region and a target-focused filter on the
//! masked region) coupled by a mutual-constraint term. Detection fuses both
//! filter responses. Scale is estimated by a separate 1-D scale-space filter.
//!
//! Everything runs single-threaded per tracker instance and is fully
//! deterministic: the same sequence and configuration produce bit-identical
//! trajectories.
//!
//! # Crates-level layout
//! - [`raster`]: the `[0,1]`-normalized RGB raster type, cropping, resizing
//!   and file I/O.
//! - [`illum`]: per-pixel world illuminance, log-average luminance and the
//!   day/night decider.
//! - [`enhance`]: low-light enhancement and the illuminance-change map.
//! - [`mask`]: three-sigma target-aware masking.
//! - [`features`]: grayscale + fHOG + color-names cell-grid features.
//! - [`dcf`]: the dual-filter ADMM trainer and fused detection.
//! - [`scale`]: 1-D scale-space correlation filter.
//! - [`tracker`]: the per-frame orchestration loop.
//! - [`eval`]: sequence ingestion, one-pass evaluation, DP/AUC metrics.
//! - [`synth`]: deterministic synthetic sequences for self-tests.

pub mod dcf;
pub mod enhance;
pub mod error;
pub mod eval;
pub mod features;
pub mod fft2;
pub mod geom;
pub mod illum;
pub mod mask;
pub mod raster;
pub mod scale;
pub mod synth;
pub mod tracker;

pub use error::{Error, Result};
pub use geom::Rect;
pub use illum::{IlluminanceConfig, LightMode};
pub use raster::Image;
pub use tracker::{Tracker, TrackerConfig, TrackState};
