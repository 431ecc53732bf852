//! Hyperspectral cube model, on-disk format, manifests and synthetic data.
//!
//! On disk a cube is a text header plus a raw payload file next to it:
//!
//! ```text
//! height: 220
//! width: 180
//! bands: 33
//! wavelengths: 400,410,...,720
//! dtype: float32le
//! interleave: bsq
//! payload: subject01_s0.raw
//! ```
//!
//! The payload holds `height * width * bands` little-endian float32 values in
//! band-sequential order: index `(band * height + row) * width + col`.

mod manifest;
mod synthetic;

use std::path::{Path, PathBuf};

pub use manifest::{BandExclusion, DatasetManifest, Sample};
pub use synthetic::{generate_synthetic, render_subject_sample, SpectralMode, SyntheticSpec};

use crate::error::{Error, Result};
use crate::image::Plane;
use crate::io::{self, Header};

pub const DTYPE: &str = "float32le";
pub const INTERLEAVE: &str = "bsq";

#[derive(Debug, Clone, PartialEq)]
pub struct HyperspectralCube {
    height: usize,
    width: usize,
    wavelengths: Vec<f64>,
    data: Vec<f32>,
}

impl HyperspectralCube {
    /// Validates every cube invariant: one strictly increasing wavelength per
    /// band, `height * width * bands` samples, all finite and non-negative.
    pub fn new(height: usize, width: usize, wavelengths: Vec<f64>, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || wavelengths.is_empty() {
            return Err(Error::Config(format!(
                "cube dimensions must be positive, got {height}x{width}x{}",
                wavelengths.len()
            )));
        }
        check_wavelengths(&wavelengths)?;
        let expected = height * width * wavelengths.len();
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        if let Some((index, &v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidValue {
                index,
                value: v as f64,
            });
        }
        Ok(Self {
            height,
            width,
            wavelengths,
            data,
        })
    }

    /// Assembles a cube from equally sized band planes (converted to f32).
    pub fn from_planes(planes: &[Plane], wavelengths: Vec<f64>) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::Config("cube needs at least one band".into()))?;
        let (w, h) = (first.width(), first.height());
        if wavelengths.len() != planes.len() {
            return Err(Error::DimensionMismatch {
                expected: planes.len(),
                found: wavelengths.len(),
            });
        }
        let mut data = Vec::with_capacity(w * h * planes.len());
        for p in planes {
            if p.width() != w || p.height() != h {
                return Err(Error::Config("band planes differ in size".into()));
            }
            data.extend(p.data().iter().map(|&v| v as f32));
        }
        Self::new(h, w, wavelengths, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn band_slice(&self, band: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[band * n..(band + 1) * n]
    }

    pub fn band(&self, band: usize) -> Plane {
        Plane::new(
            self.width,
            self.height,
            self.band_slice(band).iter().map(|&v| v as f64).collect(),
        )
    }

    pub fn planes(&self) -> Vec<Plane> {
        (0..self.bands()).map(|b| self.band(b)).collect()
    }

    /// Spectrum of one pixel, one value per band.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f64> {
        let n = self.height * self.width;
        let i = row * self.width + col;
        (0..self.bands()).map(|b| self.data[b * n + i] as f64).collect()
    }
}

fn check_wavelengths(wavelengths: &[f64]) -> Result<()> {
    for (i, w) in wavelengths.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::InvalidValue { index: i, value: *w });
        }
    }
    if let Some(i) = wavelengths.windows(2).position(|p| p[1] <= p[0]) {
        return Err(Error::NonIncreasingWavelengths { index: i + 1 });
    }
    Ok(())
}

/// Payload path written next to a header: same stem, `.raw` extension.
pub fn payload_path_for(header_path: &Path) -> PathBuf {
    header_path.with_extension("raw")
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<HyperspectralCube> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = Header::parse(&text, path)?;
    header.expect("dtype", DTYPE, path)?;
    header.expect("interleave", INTERLEAVE, path)?;
    let height: usize = header.parse_value("height", path)?;
    let width: usize = header.parse_value("width", path)?;
    let bands: usize = header.parse_value("bands", path)?;
    let wavelengths: Vec<f64> = header.parse_list("wavelengths", path)?;
    if wavelengths.len() != bands {
        return Err(Error::Header {
            path: path.to_path_buf(),
            reason: format!("{} wavelengths for {bands} bands", wavelengths.len()),
        });
    }
    check_wavelengths(&wavelengths)?;

    let payload_name = header.require("payload", path)?;
    let payload_path = path
        .parent()
        .map(|p| p.join(payload_name))
        .unwrap_or_else(|| PathBuf::from(payload_name));
    let bytes = io::read_file(&payload_path)?;
    let expected = height * width * bands;
    if bytes.len() != expected * 4 {
        return Err(Error::DimensionMismatch {
            expected,
            found: bytes.len() / 4,
        });
    }
    let data = io::decode_f32_le(&bytes).expect("length checked");
    HyperspectralCube::new(height, width, wavelengths, data)
}

pub fn write_cube(cube: &HyperspectralCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let payload_path = payload_path_for(path);
    let payload_name = payload_path
        .file_name()
        .ok_or_else(|| Error::Config(format!("invalid cube path {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    let wavelengths: Vec<String> = cube.wavelengths.iter().map(|w| w.to_string()).collect();
    let mut header = Header::new();
    header
        .push("height", cube.height)
        .push("width", cube.width)
        .push("bands", cube.bands())
        .push("wavelengths", wavelengths.join(","))
        .push("dtype", DTYPE)
        .push("interleave", INTERLEAVE)
        .push("payload", payload_name);
    io::write_file(&payload_path, &io::encode_f32_le(&cube.data))?;
    io::write_file(path, header.render().as_bytes())
}
