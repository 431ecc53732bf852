//! Per-band HOG, uniform LBP and dense SIFT.
//!
//! All extractors are pure functions of `(image, config)`. Gradients use
//! central differences with edge replication (see [`Plane::gradients`]).

mod dsift;
mod hog;
mod lbp;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dsift::{dsift_grid, extract_dsift, SiftConfig, SIFT_ORIENTATION_BINS, SIFT_SPATIAL_BINS};
pub use hog::{extract_hog, hog_layout, HogConfig};
pub use lbp::{extract_lbp, lbp_codes, uniform_label, LbpConfig, UNIFORM_BINS};

use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};
use crate::image::Plane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Hog,
    Lbp,
    Dsift,
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DescriptorKind::Hog => "hog",
            DescriptorKind::Lbp => "lbp",
            DescriptorKind::Dsift => "dsift",
        })
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hog" => Ok(Self::Hog),
            "lbp" => Ok(Self::Lbp),
            "dsift" => Ok(Self::Dsift),
            other => Err(Error::Config(format!("unknown descriptor `{other}`"))),
        }
    }
}

/// Output of one extractor on one band. HOG and LBP produce a single
/// concatenated vector; dense SIFT produces one vector per grid site in
/// row-major site order.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    pub kind: DescriptorKind,
    pub band_index: usize,
    pub vectors: Vec<Vec<f64>>,
    pub grid_shape: (usize, usize),
}

impl DescriptorSet {
    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

/// Descriptor configurations bundled for pipelines.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptorConfigs {
    pub hog: HogConfig,
    pub lbp: LbpConfig,
    pub sift: SiftConfig,
}

pub fn extract_band(kind: DescriptorKind, image: &Plane, band_index: usize, configs: &DescriptorConfigs) -> Result<DescriptorSet> {
    let mut set = match kind {
        DescriptorKind::Hog => extract_hog(image, &configs.hog)?,
        DescriptorKind::Lbp => extract_lbp(image, &configs.lbp)?,
        DescriptorKind::Dsift => extract_dsift(image, &configs.sift)?,
    };
    set.band_index = band_index;
    Ok(set)
}

/// Runs one extractor on every band of a cube, bands in parallel.
pub fn extract_cube(kind: DescriptorKind, cube: &HyperspectralCube, configs: &DescriptorConfigs) -> Result<Vec<DescriptorSet>> {
    (0..cube.bands())
        .into_par_iter()
        .map(|b| extract_band(kind, &cube.band(b), b, configs))
        .collect()
}

/// Unsigned orientation in `[0, π)` of a gradient.
pub(crate) fn unsigned_angle(gx: f64, gy: f64) -> f64 {
    let a = gy.atan2(gx);
    let a = if a < 0.0 { a + std::f64::consts::PI } else { a };
    if a >= std::f64::consts::PI {
        0.0
    } else {
        a
    }
}

/// Signed orientation in `[0, 2π)`.
pub(crate) fn signed_angle(gx: f64, gy: f64) -> f64 {
    let a = gy.atan2(gx);
    let a = if a < 0.0 { a + std::f64::consts::TAU } else { a };
    if a >= std::f64::consts::TAU {
        0.0
    } else {
        a
    }
}

/// `v / sqrt(|v|² + eps²)`, clip at `clip`, repeat.
pub(crate) fn l2_hys(v: &mut [f64], clip: f64, eps: f64) {
    let scale = |v: &mut [f64]| {
        let n = (v.iter().map(|x| x * x).sum::<f64>() + eps * eps).sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
    };
    scale(v);
    v.iter_mut().for_each(|x| *x = x.min(clip));
    scale(v);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_parse_display() {
        for k in [DescriptorKind::Hog, DescriptorKind::Lbp, DescriptorKind::Dsift] {
            assert_eq!(k.to_string().parse::<DescriptorKind>().unwrap(), k);
        }
        assert!("sift".parse::<DescriptorKind>().is_err());
    }

    #[test]
    fn angles_wrap() {
        assert_eq!(unsigned_angle(1.0, 0.0), 0.0);
        assert_eq!(unsigned_angle(-1.0, 0.0), 0.0);
        assert!((unsigned_angle(0.0, 1.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((signed_angle(0.0, -1.0) - 1.5 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn extract_cube_tags_bands() {
        let wl = vec![400.0, 500.0, 600.0];
        let mut rng = crate::rng::SplitMix64::new(1);
        let data = (0..3 * 20 * 20).map(|_| rng.next_f64() as f32).collect();
        let cube = HyperspectralCube::new(20, 20, wl, data).unwrap();
        let sets = extract_cube(DescriptorKind::Lbp, &cube, &DescriptorConfigs::default()).unwrap();
        assert_eq!(sets.iter().map(|s| s.band_index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
