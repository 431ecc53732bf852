//! Spectral cube to linear sRGB conversion.
//!
//! Tristimulus values are integrated over the cube's own wavelength grid with
//! trapezoidal weights, using the CIE 2006 2° colour matching functions, the
//! D65 illuminant and a silicon sensor responsivity curve:
//!
//! ```text
//! X = k * Σ_b Δ_b · s(λ_b) · D65(λ_b) · Si(λ_b) · x̄(λ_b)
//! ```
//!
//! with `k` chosen so a flat unit spectrum has `Y = 1`. XYZ is mapped to
//! linear sRGB by the standard D65 matrix, scaled by one global factor so the
//! flat unit spectrum's largest channel is 1, then clamped to `[0, 1]`.

use std::path::Path;

use rayon::prelude::*;

use crate::cube::HyperspectralCube;
use crate::error::{Error, Result};

const CMF_CSV: &str = include_str!("../../data/cie2006_xyz_2deg.csv");
const D65_CSV: &str = include_str!("../../data/d65.csv");
const SILICON_CSV: &str = include_str!("../../data/silicon_responsivity.csv");

/// XYZ to linear sRGB, D65 reference white.
pub const XYZ_TO_LINEAR_SRGB: [[f64; 3]; 3] = [
    [3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0, 1.876_010_8, 0.041_556_0],
    [0.055_643_4, -0.204_025_9, 1.057_225_2],
];

/// Nominal wavelengths of the output bands, which are stored as B, G, R so
/// the 3-band cube keeps increasing wavelengths.
pub const RGB_BAND_WAVELENGTHS: [f64; 3] = [465.0, 550.0, 610.0];

/// Curves sampled on a shared 1 nm grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResponse {
    pub wavelengths: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub z_bar: Vec<f64>,
    pub illuminant: Vec<f64>,
    pub sensor: Vec<f64>,
}

/// A tabulated curve with one or more value columns.
#[derive(Debug, Clone)]
struct Table {
    wavelengths: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    fn parse(reader: impl std::io::Read, columns: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut wavelengths = Vec::new();
        let mut cols = vec![Vec::new(); columns];
        for record in rdr.records() {
            let record = record?;
            if record.len() < columns + 1 {
                return Err(Error::Config(format!(
                    "response table row has {} fields, expected {}",
                    record.len(),
                    columns + 1
                )));
            }
            let parse = |i: usize| -> Result<f64> {
                record[i]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad number `{}`", &record[i])))
            };
            wavelengths.push(parse(0)?);
            for (c, col) in cols.iter_mut().enumerate() {
                let v = parse(c + 1)?;
                if !(v >= 0.0) {
                    return Err(Error::Config(format!("negative response value {v}")));
                }
                col.push(v);
            }
        }
        if wavelengths.len() < 2 || wavelengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "response table needs >= 2 strictly increasing wavelengths".into(),
            ));
        }
        Ok(Self {
            wavelengths,
            columns: cols,
        })
    }

    fn range(&self) -> (f64, f64) {
        (self.wavelengths[0], *self.wavelengths.last().unwrap())
    }
}

/// Linear interpolation on a sorted grid; zero outside it.
pub fn interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    if n == 0 || x < grid[0] || x > grid[n - 1] {
        return 0.0;
    }
    let i = grid.partition_point(|&g| g <= x);
    if i == 0 {
        return values[0];
    }
    if i >= n {
        return values[n - 1];
    }
    let (x0, x1) = (grid[i - 1], grid[i]);
    let t = (x - x0) / (x1 - x0);
    values[i - 1] + t * (values[i] - values[i - 1])
}

impl SpectralResponse {
    /// Bundled CIE 2006 2° CMFs, D65 and a generic silicon photodiode curve.
    pub fn default_response() -> Self {
        let cmf = Table::parse(CMF_CSV.as_bytes(), 3).expect("bundled CMF table");
        let d65 = Table::parse(D65_CSV.as_bytes(), 1).expect("bundled D65 table");
        let si = Table::parse(SILICON_CSV.as_bytes(), 1).expect("bundled silicon table");
        Self::from_tables(&cmf, &d65, &si).expect("bundled tables overlap")
    }

    /// Loads `wavelength_nm,x_bar,y_bar,z_bar` and two `wavelength_nm,value`
    /// CSV files (each with a header row).
    pub fn from_csv_files(cmf: &Path, illuminant: &Path, sensor: &Path) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
        let cmf = Table::parse(open(cmf)?, 3)?;
        let ill = Table::parse(open(illuminant)?, 1)?;
        let sen = Table::parse(open(sensor)?, 1)?;
        Self::from_tables(&cmf, &ill, &sen)
    }

    fn from_tables(cmf: &Table, illuminant: &Table, sensor: &Table) -> Result<Self> {
        let lo = cmf.range().0.max(illuminant.range().0).max(sensor.range().0).ceil();
        let hi = cmf.range().1.min(illuminant.range().1).min(sensor.range().1).floor();
        if hi <= lo {
            return Err(Error::Config("response curves do not overlap".into()));
        }
        let wavelengths: Vec<f64> = (0..=(hi - lo) as usize).map(|i| lo + i as f64).collect();
        let resample = |t: &Table, c: usize| -> Vec<f64> {
            wavelengths
                .iter()
                .map(|&l| interpolate(&t.wavelengths, &t.columns[c], l))
                .collect()
        };
        let response = Self {
            x_bar: resample(cmf, 0),
            y_bar: resample(cmf, 1),
            z_bar: resample(cmf, 2),
            illuminant: resample(illuminant, 0),
            sensor: resample(sensor, 0),
            wavelengths,
        };
        let y_integral: f64 = response.y_bar.iter().sum();
        if !(y_integral > 0.0) {
            return Err(Error::Config("y_bar has no positive integral".into()));
        }
        Ok(response)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.wavelengths[0], *self.wavelengths.last().unwrap())
    }

    /// `(x̄, ȳ, z̄) · illuminant · sensor` at an arbitrary wavelength.
    pub fn weighted_cmf(&self, wl: f64) -> [f64; 3] {
        let g = &self.wavelengths;
        let common = interpolate(g, &self.illuminant, wl) * interpolate(g, &self.sensor, wl);
        [
            common * interpolate(g, &self.x_bar, wl),
            common * interpolate(g, &self.y_bar, wl),
            common * interpolate(g, &self.z_bar, wl),
        ]
    }
}

/// Trapezoidal quadrature weights on an increasing grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Per-band tristimulus weights on the cube grid, normalised so that a flat
/// unit spectrum has `Y = 1`.
pub fn tristimulus_weights(wavelengths: &[f64], response: &SpectralResponse) -> Result<[Vec<f64>; 3]> {
    let (lo, hi) = response.range();
    let cube_lo = wavelengths.first().copied().unwrap_or(f64::NAN);
    let cube_hi = wavelengths.last().copied().unwrap_or(f64::NAN);
    let no_overlap = Error::NoSpectralOverlap {
        cube_lo,
        cube_hi,
        resp_lo: lo,
        resp_hi: hi,
    };
    if wavelengths.is_empty() || cube_hi < lo || cube_lo > hi {
        return Err(no_overlap);
    }
    if cube_lo < lo || cube_hi > hi {
        log::warn!(
            "cube spans {cube_lo}-{cube_hi} nm but response curves cover {lo}-{hi} nm; integrating the overlap only"
        );
    }
    let dw = trapezoid_weights(wavelengths);
    let mut rows: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(wavelengths.len()));
    for (&wl, &d) in wavelengths.iter().zip(&dw) {
        let w = response.weighted_cmf(wl);
        for c in 0..3 {
            rows[c].push(d * w[c]);
        }
    }
    let norm: f64 = rows[1].iter().sum();
    if !(norm > 0.0) {
        return Err(no_overlap);
    }
    for row in rows.iter_mut() {
        row.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(rows)
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

/// Per-pixel XYZ, row-major, one triple per pixel.
pub fn hsi_to_xyz(cube: &HyperspectralCube, response: &SpectralResponse) -> Result<Vec<[f64; 3]>> {
    let rows = tristimulus_weights(cube.wavelengths(), response)?;
    let n = cube.height() * cube.width();
    let bands: Vec<&[f32]> = (0..cube.bands()).map(|b| cube.band_slice(b)).collect();
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut xyz = [0.0; 3];
            for (b, band) in bands.iter().enumerate() {
                let s = band[i] as f64;
                for c in 0..3 {
                    xyz[c] += rows[c][b] * s;
                }
            }
            xyz
        })
        .collect())
}

/// Linear RGB before clamping, scaled so the flat unit spectrum's largest
/// channel equals 1.
pub fn hsi_to_rgb_unclamped(cube: &HyperspectralCube, response: &SpectralResponse) -> Result<Vec<[f64; 3]>> {
    let rows = tristimulus_weights(cube.wavelengths(), response)?;
    let white_xyz = [rows[0].iter().sum(), 1.0, rows[2].iter().sum()];
    let white = mat_vec(&XYZ_TO_LINEAR_SRGB, white_xyz);
    let scale = 1.0 / white.iter().cloned().fold(f64::MIN, f64::max);
    let xyz = hsi_to_xyz(cube, response)?;
    Ok(xyz
        .into_iter()
        .map(|v| mat_vec(&XYZ_TO_LINEAR_SRGB, v).map(|c| c * scale))
        .collect())
}

/// Linear RGB as a 3-band cube in B, G, R band order (see
/// [`RGB_BAND_WAVELENGTHS`]), values in `[0, 1]`.
pub fn hsi_to_rgb(cube: &HyperspectralCube, response: &SpectralResponse) -> Result<HyperspectralCube> {
    let rgb = hsi_to_rgb_unclamped(cube, response)?;
    let n = rgb.len();
    let mut data = vec![0f32; 3 * n];
    for (i, px) in rgb.iter().enumerate() {
        // band 0 = B, band 1 = G, band 2 = R
        for (band, channel) in [2usize, 1, 0].into_iter().enumerate() {
            data[band * n + i] = px[channel].clamp(0.0, 1.0) as f32;
        }
    }
    HyperspectralCube::new(cube.height(), cube.width(), RGB_BAND_WAVELENGTHS.to_vec(), data)
}

/// sRGB transfer curve, for export only.
pub fn srgb_gamma(linear: f64) -> f64 {
    if linear <= 0.003_130_8 {
        12.92 * linear
    } else {
        1.055 * linear.powf(1.0 / 2.4) - 0.055
    }
}

pub fn chromaticity(xyz: [f64; 3]) -> (f64, f64) {
    let s = xyz[0] + xyz[1] + xyz[2];
    (xyz[0] / s, xyz[1] / s)
}
