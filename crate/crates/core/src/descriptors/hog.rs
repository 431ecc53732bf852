use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{l2_hys, signed_angle, unsigned_angle, DescriptorKind, DescriptorSet};
use crate::error::{Error, Result};
use crate::image::Plane;

const HYS_CLIP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogConfig {
    pub cell: usize,
    pub bins: usize,
    /// Block side length in cells.
    pub block: usize,
    /// Block stride in cells.
    pub block_stride: usize,
    pub unsigned_orientations: bool,
    pub epsilon: f64,
}

impl Default for HogConfig {
    fn default() -> Self {
        Self {
            cell: 8,
            bins: 9,
            block: 2,
            block_stride: 1,
            unsigned_orientations: true,
            epsilon: 1e-6,
        }
    }
}

impl HogConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cell < 2 || self.bins < 2 || self.block < 1 || self.block_stride < 1 {
            return Err(Error::Config(format!("invalid HOG config {self:?}")));
        }
        Ok(())
    }
}

/// Cell and block counts for an image size:
/// `(cells_x, cells_y, blocks_x, blocks_y, descriptor length)`.
pub fn hog_layout(width: usize, height: usize, config: &HogConfig) -> Result<(usize, usize, usize, usize, usize)> {
    config.validate()?;
    let cells_x = width / config.cell;
    let cells_y = height / config.cell;
    if cells_x < config.block || cells_y < config.block {
        return Err(Error::ImageTooSmall(format!(
            "{width}x{height} image holds fewer than one {0}x{0}-cell HOG block",
            config.block
        )));
    }
    let blocks_x = (cells_x - config.block) / config.block_stride + 1;
    let blocks_y = (cells_y - config.block) / config.block_stride + 1;
    let dim = blocks_x * blocks_y * config.block * config.block * config.bins;
    Ok((cells_x, cells_y, blocks_x, blocks_y, dim))
}

/// Histogram of oriented gradients.
///
/// Bin `i` is centred on orientation `i * span / bins` (span is 180° for
/// unsigned orientations, 360° otherwise) and each pixel splits its gradient
/// magnitude linearly between the two nearest bin centres. Pixels beyond the
/// last whole cell are ignored. Blocks of `block × block` cells slide by
/// `block_stride` cells and are L2-hys normalised; the output concatenates
/// blocks row-major, cells row-major within a block, then bins.
pub fn extract_hog(image: &Plane, config: &HogConfig) -> Result<DescriptorSet> {
    let (cells_x, cells_y, blocks_x, blocks_y, dim) = hog_layout(image.width(), image.height(), config)?;
    let bins = config.bins;
    let span = if config.unsigned_orientations { PI } else { TAU };
    let bin_width = span / bins as f64;
    let (gx, gy) = image.gradients();
    let w = image.width();

    let mut cells = vec![0.0; cells_x * cells_y * bins];
    for y in 0..cells_y * config.cell {
        for x in 0..cells_x * config.cell {
            let i = y * w + x;
            let mag = gx[i].hypot(gy[i]);
            if mag == 0.0 {
                continue;
            }
            let angle = if config.unsigned_orientations {
                unsigned_angle(gx[i], gy[i])
            } else {
                signed_angle(gx[i], gy[i])
            };
            let pos = angle / bin_width;
            let lower = pos.floor();
            let frac = pos - lower;
            let b0 = lower as usize % bins;
            let b1 = (b0 + 1) % bins;
            let base = ((y / config.cell) * cells_x + x / config.cell) * bins;
            cells[base + b0] += mag * (1.0 - frac);
            cells[base + b1] += mag * frac;
        }
    }

    let mut out = Vec::with_capacity(dim);
    let mut block = Vec::with_capacity(config.block * config.block * bins);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            block.clear();
            for cy in 0..config.block {
                for cx in 0..config.block {
                    let cell_y = by * config.block_stride + cy;
                    let cell_x = bx * config.block_stride + cx;
                    let base = (cell_y * cells_x + cell_x) * bins;
                    block.extend_from_slice(&cells[base..base + bins]);
                }
            }
            l2_hys(&mut block, HYS_CLIP, config.epsilon);
            out.extend_from_slice(&block);
        }
    }
    debug_assert_eq!(out.len(), dim);
    Ok(DescriptorSet {
        kind: DescriptorKind::Hog,
        band_index: 0,
        vectors: vec![out],
        grid_shape: (blocks_y, blocks_x),
    })
}
