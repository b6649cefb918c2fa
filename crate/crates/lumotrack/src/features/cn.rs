//! Color-attribute features: a 10-channel soft color embedding looked up
//! from a 32x32x32 quantized RGB table.
//!
//! The table can be supplied as a binary asset (see [`CnTable::load`] for
//! the exact layout) or synthesized procedurally: the builtin table
//! soft-assigns each quantized color to ten fixed prototype colors with a
//! Gaussian kernel and normalizes, which gives a smooth, deterministic
//! color embedding with the same interface as a learned table.

use std::path::Path;
use std::sync::OnceLock;

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::raster::Image;

pub const CN_CHANNELS: usize = 10;
const QUANT: usize = 32;
const TABLE_ROWS: usize = QUANT * QUANT * QUANT;

/// Prototype colors for the builtin embedding (normalized RGB).
const PROTOTYPES: [[f64; 3]; CN_CHANNELS] = [
    [0.0, 0.0, 0.0],    // black
    [1.0, 1.0, 1.0],    // white
    [0.5, 0.5, 0.5],    // grey
    [1.0, 0.0, 0.0],    // red
    [0.0, 1.0, 0.0],    // green
    [0.0, 0.0, 1.0],    // blue
    [1.0, 1.0, 0.0],    // yellow
    [1.0, 0.5, 0.0],    // orange
    [0.6, 0.2, 0.7],    // purple
    [0.55, 0.35, 0.15], // brown
];
const KERNEL_BANDWIDTH: f64 = 0.35;

/// Quantized-RGB to color-probability lookup table.
pub struct CnTable {
    /// `TABLE_ROWS` rows of `CN_CHANNELS` probabilities, row-major by
    /// (r, g, b) quantized index: row = (r*32 + g)*32 + b.
    probs: Vec<[f64; CN_CHANNELS]>,
}

impl CnTable {
    /// The procedurally generated builtin table (computed once).
    pub fn builtin() -> &'static CnTable {
        static TABLE: OnceLock<CnTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let mut probs = vec![[0.0; CN_CHANNELS]; TABLE_ROWS];
            for r in 0..QUANT {
                for g in 0..QUANT {
                    for b in 0..QUANT {
                        let c = [
                            (r as f64 + 0.5) / QUANT as f64,
                            (g as f64 + 0.5) / QUANT as f64,
                            (b as f64 + 0.5) / QUANT as f64,
                        ];
                        let row = &mut probs[(r * QUANT + g) * QUANT + b];
                        let mut sum = 0.0;
                        for (k, p) in PROTOTYPES.iter().enumerate() {
                            let d2 = (c[0] - p[0]).powi(2)
                                + (c[1] - p[1]).powi(2)
                                + (c[2] - p[2]).powi(2);
                            let w = (-d2 / (2.0 * KERNEL_BANDWIDTH * KERNEL_BANDWIDTH)).exp();
                            row[k] = w;
                            sum += w;
                        }
                        for v in row.iter_mut() {
                            *v /= sum;
                        }
                    }
                }
            }
            CnTable { probs }
        })
    }

    /// Loads a table from a flat binary file: 32768 rows x 10 columns of
    /// little-endian f32, row-major by (r, g, b) quantized 5-bit index
    /// (red slowest, blue fastest).
    pub fn load(path: impl AsRef<Path>) -> Result<CnTable> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingAsset {
                    path: path.to_path_buf(),
                    reason: "color lookup table file not found".into(),
                }
            } else {
                Error::io(path, e)
            }
        })?;
        let expect = TABLE_ROWS * CN_CHANNELS * 4;
        if bytes.len() != expect {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: None,
                msg: format!(
                    "color table must be exactly {expect} bytes ({TABLE_ROWS}x{CN_CHANNELS} le f32), got {}",
                    bytes.len()
                ),
            });
        }
        let mut probs = vec![[0.0; CN_CHANNELS]; TABLE_ROWS];
        for (row, chunk) in probs.iter_mut().zip(bytes.chunks_exact(CN_CHANNELS * 4)) {
            for (v, b) in row.iter_mut().zip(chunk.chunks_exact(4)) {
                *v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
            }
        }
        Ok(CnTable { probs })
    }

    /// Writes the table in the same binary layout [`CnTable::load`] reads.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = Vec::with_capacity(TABLE_ROWS * CN_CHANNELS * 4);
        for row in &self.probs {
            for &v in row {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Probability row for a normalized RGB color.
    #[inline]
    pub fn lookup(&self, r: f64, g: f64, b: f64) -> &[f64; CN_CHANNELS] {
        let q = |v: f64| ((v.max(0.0) * QUANT as f64) as usize).min(QUANT - 1);
        &self.probs[(q(r) * QUANT + q(g)) * QUANT + q(b)]
    }
}

/// Cell-mean pooling of per-pixel color probabilities onto the feature
/// grid (`floor(dim/cell)` cells; trailing pixels ignored).
pub fn extract_cn(patch: &Image, cell: usize, table: &CnTable) -> Array3<f64> {
    let (h, w) = patch.dims();
    let ch = h / cell;
    let cw = w / cell;
    let mut out = Array3::zeros((ch, cw, CN_CHANNELS));
    let inv_area = 1.0 / (cell * cell) as f64;
    for cy in 0..ch {
        for cx in 0..cw {
            for y in cy * cell..(cy + 1) * cell {
                for x in cx * cell..(cx + 1) * cell {
                    let (r, g, b) = patch.pixel(y, x);
                    let row = table.lookup(r, g, b);
                    for k in 0..CN_CHANNELS {
                        out[[cy, cx, k]] += row[k];
                    }
                }
            }
            for k in 0..CN_CHANNELS {
                out[[cy, cx, k]] *= inv_area;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_rows_are_normalized_distributions() {
        let t = CnTable::builtin();
        for probe in [
            (0.0, 0.0, 0.0),
            (1.0, 1.0, 1.0),
            (0.9, 0.1, 0.2),
            (0.33, 0.77, 0.5),
        ] {
            let row = t.lookup(probe.0, probe.1, probe.2);
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v.is_finite() && v >= 0.0));
        }
    }

    #[test]
    fn saturated_colors_hit_their_prototype() {
        let t = CnTable::builtin();
        let red = t.lookup(1.0, 0.0, 0.0);
        let argmax = red
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 3); // red prototype index
        let blue = t.lookup(0.0, 0.0, 1.0);
        let argmax = blue
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 5);
    }

    #[test]
    fn uniform_patch_pools_to_constant_cells() {
        let img = Image::from_fn(16, 16, |_, _| (0.8, 0.2, 0.1));
        let f = extract_cn(&img, 4, CnTable::builtin());
        assert_eq!(f.dim(), (4, 4, CN_CHANNELS));
        let first: Vec<f64> = (0..CN_CHANNELS).map(|k| f[[0, 0, k]]).collect();
        for cy in 0..4 {
            for cx in 0..4 {
                for k in 0..CN_CHANNELS {
                    assert!((f[[cy, cx, k]] - first[k]).abs() < 1e-12);
                }
            }
        }
        let sum: f64 = first.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn file_round_trip_and_error_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cn.bin");
        CnTable::builtin().save(&path).unwrap();
        let loaded = CnTable::load(&path).unwrap();
        for probe in [(0.1, 0.5, 0.9), (0.7, 0.7, 0.1)] {
            let a = CnTable::builtin().lookup(probe.0, probe.1, probe.2);
            let b = loaded.lookup(probe.0, probe.1, probe.2);
            for k in 0..CN_CHANNELS {
                // f32 storage rounds the values.
                assert!((a[k] - b[k]).abs() < 1e-6);
            }
        }

        let missing = dir.path().join("nope.bin");
        assert!(matches!(
            CnTable::load(&missing),
            Err(Error::MissingAsset { .. })
        ));

        let truncated = dir.path().join("short.bin");
        std::fs::write(&truncated, [0u8; 16]).unwrap();
        assert!(matches!(
            CnTable::load(&truncated),
            Err(Error::Format { .. })
        ));
    }
}
