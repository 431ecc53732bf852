//! Band exclusion, median filtering and resizing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};
use crate::image::Plane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub target_size: usize,
    pub median_window: usize,
    pub drop_first: usize,
    pub drop_last: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_size: 263,
            median_window: 3,
            drop_first: 0,
            drop_last: 0,
        }
    }
}

impl PreprocessConfig {
    /// 33-band camera settings: the first 6 and last 3 bands are noisy.
    pub fn noisy_edge_bands() -> Self {
        Self {
            drop_first: 6,
            drop_last: 3,
            ..Self::default()
        }
    }

    pub fn validate(&self, bands: usize) -> Result<()> {
        if self.median_window == 0 || self.median_window.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "median window must be odd and >= 1, got {}",
                self.median_window
            )));
        }
        if self.target_size < self.median_window {
            return Err(Error::Config(format!(
                "target size {} is smaller than the median window {}",
                self.target_size, self.median_window
            )));
        }
        if self.drop_first + self.drop_last >= bands {
            return Err(Error::Config(format!(
                "dropping {}+{} of {bands} bands leaves nothing",
                self.drop_first, self.drop_last
            )));
        }
        Ok(())
    }
}

/// Keeps bands `[drop_first, bands - drop_last)`.
pub fn exclude_bands(cube: &HyperspectralCube, drop_first: usize, drop_last: usize) -> Result<HyperspectralCube> {
    let bands = cube.bands();
    if drop_first + drop_last >= bands {
        return Err(Error::Config(format!(
            "dropping {drop_first}+{drop_last} of {bands} bands leaves nothing"
        )));
    }
    let keep = drop_first..bands - drop_last;
    let n = cube.height() * cube.width();
    let data = cube.data()[keep.start * n..keep.end * n].to_vec();
    let wavelengths = cube.wavelengths()[keep].to_vec();
    HyperspectralCube::new(cube.height(), cube.width(), wavelengths, data)
}

/// Median over a `window × window` neighbourhood with edge replication.
pub fn median_filter_band(image: &Plane, window: usize) -> Result<Plane> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::Config(format!("median window must be odd, got {window}")));
    }
    if image.width() == 0 || image.height() == 0 {
        return Err(Error::ImageTooSmall("empty image".into()));
    }
    if window == 1 {
        return Ok(image.clone());
    }
    let r = (window / 2) as isize;
    let mid = window * window / 2;
    let (w, h) = (image.width(), image.height());
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut buf = Vec::with_capacity(window * window);
            (0..w)
                .map(|x| {
                    buf.clear();
                    for dy in -r..=r {
                        for dx in -r..=r {
                            buf.push(image.get_clamped(x as isize + dx, y as isize + dy));
                        }
                    }
                    *buf.select_nth_unstable_by(mid, f64::total_cmp).1
                })
                .collect()
        })
        .collect();
    Ok(Plane::new(w, h, rows.concat()))
}

/// Bilinear resize to `target × target` with corner-aligned sampling: output
/// pixel `i` samples source coordinate `i * (n - 1) / (target - 1)`.
pub fn resize_band(image: &Plane, target: usize) -> Result<Plane> {
    if target < 1 {
        return Err(Error::Config("resize target must be >= 1".into()));
    }
    if image.width() < 2 || image.height() < 2 {
        return Err(Error::ImageTooSmall(format!(
            "resize needs at least 2x2, got {}x{}",
            image.width(),
            image.height()
        )));
    }
    let scale = |n: usize| {
        if target == 1 {
            0.0
        } else {
            (n - 1) as f64 / (target - 1) as f64
        }
    };
    let (sx, sy) = (scale(image.width()), scale(image.height()));
    Ok(Plane::from_fn(target, target, |x, y| {
        image.sample_bilinear(x as f64 * sx, y as f64 * sy)
    }))
}

/// Band exclusion, then per-band median filter, then per-band resize.
pub fn preprocess_cube(cube: &HyperspectralCube, config: &PreprocessConfig) -> Result<HyperspectralCube> {
    config.validate(cube.bands())?;
    let kept = exclude_bands(cube, config.drop_first, config.drop_last)?;
    filter_and_resize(&kept, config)
}

/// Median filter and resize only; band exclusion is left to the caller.
pub fn filter_and_resize(cube: &HyperspectralCube, config: &PreprocessConfig) -> Result<HyperspectralCube> {
    let planes: Vec<Plane> = (0..cube.bands())
        .into_par_iter()
        .map(|b| {
            let filtered = median_filter_band(&cube.band(b), config.median_window)?;
            if filtered.width() == config.target_size && filtered.height() == config.target_size {
                Ok(filtered)
            } else {
                resize_band(&filtered, config.target_size)
            }
        })
        .collect::<Result<_>>()?;
    HyperspectralCube::from_planes(&planes, cube.wavelengths().to_vec())
}
