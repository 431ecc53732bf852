//! Synthetic face-like hyperspectral datasets.
//!
//! Every scene is a linear mix of four materials: background, skin and two
//! facial-feature materials. Abundances come from a face ellipse, a set of
//! Gaussian blobs and a smooth stripe field; `spatial_contrast` controls how
//! far each subject's layout departs from the shared template. Each material
//! spectrum is a smooth base curve plus a subject-specific sum of Gaussian
//! bumps in wavelength scaled by `spectral_contrast`.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{write_cube, BandExclusion, DatasetManifest, HyperspectralCube, Sample};
use crate::colorimetry::{self, SpectralResponse};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// How subject-specific spectral perturbations are built.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMode {
    /// Free Gaussian bumps.
    #[default]
    Bumps,
    /// Bumps projected onto the null space of the default RGB response, so
    /// subjects differ across bands but integrate to the same tristimulus
    /// values.
    Metameric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_subjects: usize,
    pub samples_per_subject: usize,
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub spectral_contrast: f64,
    pub spatial_contrast: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default = "default_start")]
    pub wavelength_start: f64,
    #[serde(default = "default_end")]
    pub wavelength_end: f64,
    #[serde(default)]
    pub spectral_mode: SpectralMode,
}

fn default_start() -> f64 {
    400.0
}

fn default_end() -> f64 {
    720.0
}

impl SyntheticSpec {
    pub fn new(n_subjects: usize, samples_per_subject: usize, size: (usize, usize, usize)) -> Self {
        Self {
            n_subjects,
            samples_per_subject,
            height: size.0,
            width: size.1,
            bands: size.2,
            spectral_contrast: 0.8,
            spatial_contrast: 0.8,
            noise_sigma: 0.0,
            seed: 0,
            wavelength_start: default_start(),
            wavelength_end: default_end(),
            spectral_mode: SpectralMode::Bumps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_subject < super::manifest::MIN_SAMPLES_PER_SUBJECT {
            return Err(Error::Config(format!(
                "samples_per_subject must be at least 3, got {}",
                self.samples_per_subject
            )));
        }
        if self.n_subjects == 0 || self.height == 0 || self.width == 0 || self.bands == 0 {
            return Err(Error::Config("synthetic counts must be >= 1".into()));
        }
        for (name, v) in [
            ("spectral_contrast", self.spectral_contrast),
            ("spatial_contrast", self.spatial_contrast),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config("noise_sigma must be finite and >= 0".into()));
        }
        if self.bands > 1 && !(self.wavelength_end > self.wavelength_start) {
            return Err(Error::Config("wavelength_end must exceed wavelength_start".into()));
        }
        Ok(())
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        if self.bands == 1 {
            return vec![self.wavelength_start];
        }
        let step = (self.wavelength_end - self.wavelength_start) / (self.bands - 1) as f64;
        (0..self.bands)
            .map(|i| self.wavelength_start + step * i as f64)
            .collect()
    }

    pub fn subject_id(k: usize) -> String {
        format!("s{k:03}")
    }
}

const MATERIALS: usize = 4;
const BG: usize = 0;
const SKIN: usize = 1;
const FEAT_A: usize = 2;
const FEAT_B: usize = 3;

struct Blob {
    cx: f64,
    cy: f64,
    sigma: f64,
}

struct SubjectScene {
    center: (f64, f64),
    axes: (f64, f64),
    blobs: Vec<Blob>,
    stripe_freq: (f64, f64),
    stripe_phase: f64,
    spectra: [Vec<f64>; MATERIALS],
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn base_spectrum(material: usize, wl: f64, lo: f64, hi: f64) -> f64 {
    let t = if hi > lo { (wl - lo) / (hi - lo) } else { 0.0 };
    let skin = 0.35 + 0.25 / (1.0 + (-(wl - 580.0) / 30.0).exp());
    match material {
        BG => 0.15 + 0.05 * t,
        SKIN => skin,
        FEAT_A => 0.45 * skin,
        FEAT_B => 1.25 * skin,
        _ => unreachable!("unknown material {material}"),
    }
}

fn bumps(rng: &mut SplitMix64, wavelengths: &[f64], lo: f64, hi: f64, amplitude: f64) -> Vec<f64> {
    let span = (hi - lo).max(1.0);
    let params: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let a = rng.uniform(-amplitude, amplitude);
            let c = rng.uniform(lo, hi);
            let w = rng.uniform(0.06, 0.15) * span;
            (a, c, w)
        })
        .collect();
    wavelengths
        .iter()
        .map(|&l| {
            params
                .iter()
                .map(|&(a, c, w)| a * (-(l - c).powi(2) / (2.0 * w * w)).exp())
                .sum()
        })
        .collect()
}

/// Removes the components of `v` visible to the three tristimulus rows.
fn project_out(v: &mut [f64], rows: &[Vec<f64>; 3]) {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let mut u = r.clone();
        for b in &basis {
            let d: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            u.iter_mut().for_each(|x| *x /= n);
            basis.push(u);
        }
    }
    for b in &basis {
        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
}

const BUMP_AMPLITUDE: f64 = 0.2;
const METAMER_AMPLITUDE: f64 = 0.12;

fn subject_scene(spec: &SyntheticSpec, k: usize, tristimulus: Option<&[Vec<f64>; 3]>) -> SubjectScene {
    let mut rng = SplitMix64::derive(spec.seed, 1 + k as u64);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let sc = spec.spatial_contrast;
    let mut jitter = |scale: f64| sc * scale * rng.uniform(-1.0, 1.0);

    let center = (0.5 * w + jitter(0.06 * w), 0.5 * h + jitter(0.06 * h));
    let axes = (0.36 * w * (1.0 + jitter(0.25)), 0.44 * h * (1.0 + jitter(0.25)));
    let template = [(0.35, 0.40), (0.65, 0.40), (0.50, 0.72), (0.50, 0.56)];
    let size = w.min(h);
    let blobs = template
        .iter()
        .map(|&(bx, by)| Blob {
            cx: (bx + jitter(0.12)) * w,
            cy: (by + jitter(0.12)) * h,
            sigma: 0.08 * size * (1.0 + jitter(0.4)),
        })
        .collect();
    let stripe_freq = (1.5 + jitter(1.0), 2.0 + jitter(1.0));
    let stripe_phase = jitter(std::f64::consts::PI);

    let wavelengths = spec.wavelengths();
    let (lo, hi) = (spec.wavelength_start, spec.wavelength_end);
    let spectra = std::array::from_fn(|m| {
        let base: Vec<f64> = wavelengths
            .iter()
            .map(|&l| base_spectrum(m, l, lo, hi))
            .collect();
        if m == BG {
            return base;
        }
        let mut p = bumps(&mut rng, &wavelengths, lo, hi, BUMP_AMPLITUDE);
        if let Some(rows) = tristimulus {
            project_out(&mut p, rows);
            let peak = p.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if peak > 0.0 {
                p.iter_mut().for_each(|x| *x *= METAMER_AMPLITUDE / peak);
            }
        }
        base.iter()
            .zip(&p)
            .map(|(b, d)| b + spec.spectral_contrast * d)
            .collect()
    });
    SubjectScene {
        center,
        axes,
        blobs,
        stripe_freq,
        stripe_phase,
        spectra,
    }
}

fn abundances(scene: &SubjectScene, x: f64, y: f64, w: f64, h: f64) -> [f64; MATERIALS] {
    let dx = (x - scene.center.0) / scene.axes.0;
    let dy = (y - scene.center.1) / scene.axes.1;
    let r = (dx * dx + dy * dy).sqrt();
    let face = smoothstep((1.0 - r) / 0.12 + 0.5);
    let blob: f64 = scene
        .blobs
        .iter()
        .map(|b| (-((x - b.cx).powi(2) + (y - b.cy).powi(2)) / (2.0 * b.sigma * b.sigma)).exp())
        .sum::<f64>()
        .min(1.0);
    let stripes = 0.5
        + 0.5
            * (TAU * (scene.stripe_freq.0 * x / w + scene.stripe_freq.1 * y / h) + scene.stripe_phase)
                .sin();
    let a = face * 0.8 * blob;
    let b = (face - a) * 0.6 * stripes;
    [1.0 - face, face - a - b, a, b]
}

fn render(spec: &SyntheticSpec, scene: &SubjectScene, noise: &mut SplitMix64) -> HyperspectralCube {
    let (h, w, nb) = (spec.height, spec.width, spec.bands);
    let mut data = vec![0f32; h * w * nb];
    for y in 0..h {
        for x in 0..w {
            let ab = abundances(scene, x as f64 + 0.5, y as f64 + 0.5, w as f64, h as f64);
            for band in 0..nb {
                let v: f64 = (0..MATERIALS).map(|m| ab[m] * scene.spectra[m][band]).sum();
                data[(band * h + y) * w + x] = v as f32;
            }
        }
    }
    // Noise is drawn band-sequentially so the stream order matches the payload.
    for v in data.iter_mut() {
        let mut x = *v as f64;
        if spec.noise_sigma > 0.0 {
            x += spec.noise_sigma * noise.normal();
        }
        *v = x.clamp(0.0, 1.0) as f32;
    }
    HyperspectralCube::new(h, w, spec.wavelengths(), data).expect("synthetic cube is valid")
}

fn tristimulus_rows(spec: &SyntheticSpec) -> Result<Option<[Vec<f64>; 3]>> {
    match spec.spectral_mode {
        SpectralMode::Bumps => Ok(None),
        SpectralMode::Metameric => {
            let response = SpectralResponse::default_response();
            colorimetry::tristimulus_weights(&spec.wavelengths(), &response).map(Some)
        }
    }
}

/// Renders sample `sample` of subject `subject` in memory.
pub fn render_subject_sample(spec: &SyntheticSpec, subject: usize, sample: usize) -> Result<HyperspectralCube> {
    spec.validate()?;
    let rows = tristimulus_rows(spec)?;
    let scene = subject_scene(spec, subject, rows.as_ref());
    let mut rng = noise_stream(spec, subject, sample);
    Ok(render(spec, &scene, &mut rng))
}

fn noise_stream(spec: &SyntheticSpec, subject: usize, sample: usize) -> SplitMix64 {
    SplitMix64::derive(spec.seed, ((subject as u64 + 1) << 32) | (sample as u64 + 1))
}

/// Writes all cubes plus `manifest.json` into `out_dir` and returns the manifest.
pub fn generate_synthetic(spec: &SyntheticSpec, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    let rows = tristimulus_rows(spec)?;
    let subjects: Vec<String> = (0..spec.n_subjects).map(SyntheticSpec::subject_id).collect();
    let mut samples = Vec::new();
    for (k, id) in subjects.iter().enumerate() {
        let scene = subject_scene(spec, k, rows.as_ref());
        for s in 0..spec.samples_per_subject {
            let mut rng = noise_stream(spec, k, s);
            let cube = render(spec, &scene, &mut rng);
            let name = format!("{id}_{s}.hdr");
            write_cube(&cube, out_dir.join(&name))?;
            samples.push(Sample {
                subject: id.clone(),
                path: name.into(),
                session: s as u32,
            });
        }
    }
    let manifest = DatasetManifest::new(subjects, samples, BandExclusion::default())
        .with_root(out_dir);
    manifest.save(out_dir.join("manifest.json"))?;
    Ok(manifest)
}
