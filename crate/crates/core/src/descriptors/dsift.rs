use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{l2_hys, signed_angle, DescriptorKind, DescriptorSet};
use crate::error::{Error, Result};
use crate::image::Plane;

/// Spatial bins per patch side.
pub const SIFT_SPATIAL_BINS: usize = 4;
pub const SIFT_ORIENTATION_BINS: usize = 8;
const SIFT_DIM: usize = SIFT_SPATIAL_BINS * SIFT_SPATIAL_BINS * SIFT_ORIENTATION_BINS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftConfig {
    /// Side of one spatial bin in pixels; a patch spans `4 * bin_size`.
    pub bin_size: usize,
    pub step: usize,
    /// Descriptors whose raw norm falls below this are emitted as zeros.
    pub norm_threshold: f64,
    pub clip: f64,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            bin_size: 4,
            step: 8,
            norm_threshold: 1e-5,
            clip: 0.2,
        }
    }
}

impl SiftConfig {
    pub fn patch(&self) -> usize {
        SIFT_SPATIAL_BINS * self.bin_size
    }

    pub fn dim(&self) -> usize {
        SIFT_DIM
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_size == 0 || self.step == 0 || !(self.clip > 0.0) || self.norm_threshold < 0.0 {
            return Err(Error::Config(format!("invalid SIFT config {self:?}")));
        }
        Ok(())
    }
}

/// Number of descriptor sites `(rows, cols)` for an image size.
pub fn dsift_grid(width: usize, height: usize, config: &SiftConfig) -> Result<(usize, usize)> {
    config.validate()?;
    let patch = config.patch();
    if width < patch || height < patch {
        return Err(Error::ImageTooSmall(format!(
            "{width}x{height} image is smaller than one {patch}x{patch} SIFT patch"
        )));
    }
    Ok((
        (height - patch) / config.step + 1,
        (width - patch) / config.step + 1,
    ))
}

/// Upright single-scale SIFT on a regular grid.
///
/// Site `(i, j)` covers the patch whose top-left pixel is
/// `(j * step, i * step)`. Pixel centres inside the patch vote into 4×4
/// spatial bins and 8 orientation bins (bin `o` centred at `o * 45°`,
/// orientation measured with y pointing down) with trilinear interpolation,
/// weighted by gradient magnitude and a Gaussian of σ = half the patch width
/// centred on the patch. Layout is `(spatial_row * 4 + spatial_col) * 8 + o`.
pub fn extract_dsift(image: &Plane, config: &SiftConfig) -> Result<DescriptorSet> {
    let (rows, cols) = dsift_grid(image.width(), image.height(), config)?;
    let patch = config.patch();
    let (gx, gy) = image.gradients();
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| x.hypot(*y)).collect();
    let angle: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| signed_angle(*x, *y)).collect();

    // Spatial votes are identical for every site: precompute them per pixel.
    let sigma = patch as f64 / 2.0;
    let centre = patch as f64 / 2.0;
    let axis_votes: Vec<Vec<(usize, f64)>> = (0..patch)
        .map(|u| {
            let t = (u as f64 + 0.5) / config.bin_size as f64 - 0.5;
            let lower = t.floor();
            let f = t - lower;
            let mut v = Vec::with_capacity(2);
            for (b, wgt) in [(lower, 1.0 - f), (lower + 1.0, f)] {
                if b >= 0.0 && (b as usize) < SIFT_SPATIAL_BINS && wgt > 0.0 {
                    v.push((b as usize, wgt));
                }
            }
            v
        })
        .collect();
    let mut pixel_votes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(patch * patch);
    for v in 0..patch {
        for u in 0..patch {
            let d2 = (u as f64 + 0.5 - centre).powi(2) + (v as f64 + 0.5 - centre).powi(2);
            let g = (-d2 / (2.0 * sigma * sigma)).exp();
            let mut votes = Vec::with_capacity(4);
            for &(by, wy) in &axis_votes[v] {
                for &(bx, wx) in &axis_votes[u] {
                    votes.push(((by * SIFT_SPATIAL_BINS + bx) * SIFT_ORIENTATION_BINS, g * wy * wx));
                }
            }
            pixel_votes.push(votes);
        }
    }

    let obin = TAU / SIFT_ORIENTATION_BINS as f64;
    let width = image.width();
    let mut vectors = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let (x0, y0) = (j * config.step, i * config.step);
            let mut d = vec![0.0; SIFT_DIM];
            for v in 0..patch {
                for u in 0..patch {
                    let idx = (y0 + v) * width + x0 + u;
                    let m = mag[idx];
                    if m == 0.0 {
                        continue;
                    }
                    let pos = angle[idx] / obin;
                    let lower = pos.floor();
                    let f = pos - lower;
                    let o0 = lower as usize % SIFT_ORIENTATION_BINS;
                    let o1 = (o0 + 1) % SIFT_ORIENTATION_BINS;
                    for &(base, w) in &pixel_votes[v * patch + u] {
                        d[base + o0] += m * w * (1.0 - f);
                        d[base + o1] += m * w * f;
                    }
                }
            }
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < config.norm_threshold {
                d.iter_mut().for_each(|x| *x = 0.0);
            } else {
                l2_hys(&mut d, config.clip, 0.0);
            }
            vectors.push(d);
        }
    }
    Ok(DescriptorSet {
        kind: DescriptorKind::Dsift,
        band_index: 0,
        vectors,
        grid_shape: (rows, cols),
    })
}
