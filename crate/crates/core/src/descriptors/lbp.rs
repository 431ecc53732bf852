use std::f64::consts::TAU;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{DescriptorKind, DescriptorSet};
use crate::error::{Error, Result};
use crate::image::Plane;

/// 58 uniform 8-bit patterns plus one shared non-uniform bin.
pub const UNIFORM_BINS: usize = 59;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbpConfig {
    pub radius: f64,
    pub neighbors: usize,
    pub cell: usize,
    pub uniform: bool,
}

impl Default for LbpConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            neighbors: 8,
            cell: 8,
            uniform: true,
        }
    }
}

impl LbpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.uniform && self.neighbors != 8 {
            return Err(Error::Config("uniform LBP mapping needs 8 neighbours".into()));
        }
        if self.neighbors == 0 || self.neighbors > 8 || !(self.radius > 0.0) || self.cell == 0 {
            return Err(Error::Config(format!("invalid LBP config {self:?}")));
        }
        Ok(())
    }

    fn bins(&self) -> usize {
        if self.uniform {
            UNIFORM_BINS
        } else {
            1 << self.neighbors
        }
    }
}

fn transitions(code: u8) -> u32 {
    (code ^ code.rotate_right(1)).count_ones()
}

/// Label of an 8-bit pattern: uniform patterns (at most two circular bit
/// transitions) are numbered 0..58 in increasing code order, everything
/// else maps to 58.
pub fn uniform_label(code: u8) -> usize {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0u8; 256];
        let mut next = 0u8;
        for c in 0..=255u8 {
            t[c as usize] = if transitions(c) <= 2 {
                next += 1;
                next - 1
            } else {
                (UNIFORM_BINS - 1) as u8
            };
        }
        debug_assert_eq!(next as usize, UNIFORM_BINS - 1);
        t
    });
    table[code as usize] as usize
}

fn neighbor_offsets(config: &LbpConfig) -> Vec<(f64, f64)> {
    let snap = |v: f64| {
        let r = v.round();
        if (v - r).abs() < 1e-9 {
            r
        } else {
            v
        }
    };
    (0..config.neighbors)
        .map(|p| {
            let a = TAU * p as f64 / config.neighbors as f64;
            (snap(config.radius * a.cos()), snap(-config.radius * a.sin()))
        })
        .collect()
}

/// Per-pixel codes, row-major. Neighbour `p` sits at angle `2πp/P`
/// counter-clockwise from the +x axis (y points down, so its offset is
/// `(r cos a, -r sin a)`), is sampled bilinearly with edge replication, and
/// sets bit `p` when it is `>=` the centre.
pub fn lbp_codes(image: &Plane, config: &LbpConfig) -> Result<Vec<u8>> {
    config.validate()?;
    let min = 2 * config.radius.ceil() as usize + 1;
    if image.width() < min || image.height() < min {
        return Err(Error::ImageTooSmall(format!(
            "LBP radius {} needs at least {min}x{min}",
            config.radius
        )));
    }
    let offsets = neighbor_offsets(config);
    let mut codes = Vec::with_capacity(image.width() * image.height());
    for y in 0..image.height() {
        for x in 0..image.width() {
            let c = image.get(x, y);
            let mut code = 0u8;
            for (p, &(dx, dy)) in offsets.iter().enumerate() {
                if image.sample_bilinear(x as f64 + dx, y as f64 + dy) >= c {
                    code |= 1 << p;
                }
            }
            codes.push(code);
        }
    }
    Ok(codes)
}

/// Local binary pattern histograms over non-overlapping `cell × cell`
/// cells, each L1-normalised, concatenated row-major.
pub fn extract_lbp(image: &Plane, config: &LbpConfig) -> Result<DescriptorSet> {
    config.validate()?;
    let cells_x = image.width() / config.cell;
    let cells_y = image.height() / config.cell;
    if cells_x == 0 || cells_y == 0 {
        return Err(Error::ImageTooSmall(format!(
            "{}x{} image holds no {}-pixel LBP cell",
            image.width(),
            image.height(),
            config.cell
        )));
    }
    let codes = lbp_codes(image, config)?;
    let bins = config.bins();
    let mut hist = vec![0.0; cells_x * cells_y * bins];
    let w = image.width();
    for y in 0..cells_y * config.cell {
        for x in 0..cells_x * config.cell {
            let code = codes[y * w + x];
            let label = if config.uniform {
                uniform_label(code)
            } else {
                code as usize
            };
            hist[((y / config.cell) * cells_x + x / config.cell) * bins + label] += 1.0;
        }
    }
    let per_cell = (config.cell * config.cell) as f64;
    hist.iter_mut().for_each(|h| *h /= per_cell);
    Ok(DescriptorSet {
        kind: DescriptorKind::Lbp,
        band_index: 0,
        vectors: vec![hist],
        grid_shape: (cells_y, cells_x),
    })
}
