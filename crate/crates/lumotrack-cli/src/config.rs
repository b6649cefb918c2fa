//! Layered parameter assembly: built-in defaults, then a flat key=value
//! file, then command-line flags — later layers win.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use lumotrack::tracker::{ModeSelect, TrackerConfig};

use crate::Failure;

/// Shared parameter flags. Filter-profile values (`mu`, `psi`, rates,
/// `lambda`) apply to both the day and the night profile, whichever ends
/// up active.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Flat key=value parameter file (same keys as these flags).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Lighting mode: auto, day or night.
    #[arg(long)]
    pub mode: Option<String>,
    /// Day/night decision threshold on log-average luminance.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Coupling strength between the two translation filters.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Weight of the target-focused response in fusion.
    #[arg(long)]
    pub psi: Option<f64>,
    /// Appearance-model learning rate.
    #[arg(long)]
    pub eta_t: Option<f64>,
    /// Scale-model learning rate.
    #[arg(long)]
    pub eta_s: Option<f64>,
    /// Ridge weight of the filter objective.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Feature cell edge in pixels.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Search-region area as a multiple of the target area.
    #[arg(long)]
    pub sc: Option<f64>,
    /// Disable night patch enhancement.
    #[arg(long)]
    pub no_enhance: bool,
    /// Disable the target-aware mask.
    #[arg(long)]
    pub no_mask: bool,
}

pub fn build_tracker_config(ov: &Overrides) -> Result<TrackerConfig, Failure> {
    let mut cfg = TrackerConfig::default();
    if let Some(path) = &ov.config {
        apply_file(&mut cfg, path)?;
    }
    apply_flags(&mut cfg, ov)?;
    cfg.validate().map_err(Failure::from)?;
    Ok(cfg)
}

fn apply_file(cfg: &mut TrackerConfig, path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read config {}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::new(
                3,
                format!("{}:{}: expected key=value", path.display(), idx + 1),
            ));
        };
        apply_kv(cfg, key.trim(), value.trim())
            .map_err(|msg| Failure::new(3, format!("{}:{}: {msg}", path.display(), idx + 1)))?;
    }
    Ok(())
}

fn apply_kv(cfg: &mut TrackerConfig, key: &str, value: &str) -> Result<(), String> {
    match key.replace('_', "-").as_str() {
        "mode" => cfg.mode = parse_mode(value)?,
        "tau" => cfg.illuminance.tau = num(value)?,
        // Luminance weighting has no dedicated flags; the file still
        // reaches every field.
        "alpha-r" => cfg.illuminance.alpha_r = num(value)?,
        "alpha-g" => cfg.illuminance.alpha_g = num(value)?,
        "alpha-b" => cfg.illuminance.alpha_b = num(value)?,
        "delta" => cfg.illuminance.delta = num(value)?,
        "mu" => set_both(cfg, |p, v| p.mu = v, num(value)?),
        "psi" => set_both(cfg, |p, v| p.psi = v, num(value)?),
        "eta-t" => set_both(cfg, |p, v| p.eta_t = v, num(value)?),
        "eta-s" => set_both(cfg, |p, v| p.eta_s = v, num(value)?),
        "lambda" => set_both(cfg, |p, v| p.lambda = v, num(value)?),
        "cells" => {
            cfg.cell_size = value
                .parse()
                .map_err(|_| format!("bad cell count {value:?}"))?
        }
        "sc" => cfg.search_area_scale = num(value)?,
        "no-enhance" => cfg.enhance = !flag(value)?,
        "no-mask" => cfg.masked = !flag(value)?,
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}

fn apply_flags(cfg: &mut TrackerConfig, ov: &Overrides) -> Result<(), Failure> {
    if let Some(m) = &ov.mode {
        cfg.mode = parse_mode(m).map_err(|m| Failure::new(1, m))?;
    }
    if let Some(v) = ov.tau {
        cfg.illuminance.tau = v;
    }
    if let Some(v) = ov.mu {
        set_both(cfg, |p, x| p.mu = x, v);
    }
    if let Some(v) = ov.psi {
        set_both(cfg, |p, x| p.psi = x, v);
    }
    if let Some(v) = ov.eta_t {
        set_both(cfg, |p, x| p.eta_t = x, v);
    }
    if let Some(v) = ov.eta_s {
        set_both(cfg, |p, x| p.eta_s = x, v);
    }
    if let Some(v) = ov.lambda {
        set_both(cfg, |p, x| p.lambda = x, v);
    }
    if let Some(c) = ov.cells {
        cfg.cell_size = c;
    }
    if let Some(v) = ov.sc {
        cfg.search_area_scale = v;
    }
    if ov.no_enhance {
        cfg.enhance = false;
    }
    if ov.no_mask {
        cfg.masked = false;
    }
    Ok(())
}

fn set_both(cfg: &mut TrackerConfig, set: impl Fn(&mut lumotrack::dcf::TrainConfig, f64), v: f64) {
    set(&mut cfg.day, v);
    set(&mut cfg.night, v);
}

fn parse_mode(v: &str) -> Result<ModeSelect, String> {
    match v.to_ascii_lowercase().as_str() {
        "auto" => Ok(ModeSelect::Auto),
        "day" => Ok(ModeSelect::ForceDay),
        "night" => Ok(ModeSelect::ForceNight),
        other => Err(format!("mode must be auto, day or night (got {other:?})")),
    }
}

fn num(v: &str) -> Result<f64, String> {
    v.parse().map_err(|_| format!("bad number {v:?}"))
}

fn flag(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("bad boolean {v:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lumotrack::tracker::ModeSelect;
    use std::io::Write as _;

    #[test]
    fn file_then_flags_precedence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nmode = day\nmu = 42\ntau=0.2\nno-mask = true").unwrap();
        let ov = Overrides {
            config: Some(f.path().to_path_buf()),
            mode: Some("night".into()),
            tau: None,
            ..Overrides::default()
        };
        let cfg = build_tracker_config(&ov).unwrap();
        // Flag beats file; file beats default.
        assert_eq!(cfg.mode, ModeSelect::ForceNight);
        assert_eq!(cfg.day.mu, 42.0);
        assert_eq!(cfg.night.mu, 42.0);
        assert_eq!(cfg.illuminance.tau, 0.2);
        assert!(!cfg.masked);
    }

    #[test]
    fn file_reaches_the_luminance_weights() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "alpha-r = 0.5\nalpha_g = 0.3\nalpha-b = 0.2\ndelta = 1e-3").unwrap();
        let ov = Overrides {
            config: Some(f.path().to_path_buf()),
            ..Overrides::default()
        };
        let cfg = build_tracker_config(&ov).unwrap();
        assert_eq!(cfg.illuminance.alpha_r, 0.5);
        assert_eq!(cfg.illuminance.alpha_g, 0.3);
        assert_eq!(cfg.illuminance.alpha_b, 0.2);
        assert_eq!(cfg.illuminance.delta, 1e-3);
    }

    #[test]
    fn unknown_key_is_a_format_failure() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "bogus = 1").unwrap();
        let ov = Overrides {
            config: Some(f.path().to_path_buf()),
            ..Overrides::default()
        };
        let err = build_tracker_config(&ov).unwrap_err();
        assert_eq!(err.code, 3);
    }

    #[test]
    fn invalid_values_fail_validation() {
        let ov = Overrides {
            tau: Some(2.0),
            ..Overrides::default()
        };
        let err = build_tracker_config(&ov).unwrap_err();
        assert_eq!(err.code, 1);
    }
}
