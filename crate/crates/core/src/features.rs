//! Per-cube feature files.
//!
//! Layout: a `key: value` header (`kind`, `bands`, `vectors_per_band`,
//! `dim`, `grid`, `dtype`), a line `end`, then
//! `bands * vectors_per_band * dim` little-endian float32 values, band-major.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::descriptors::{DescriptorKind, DescriptorSet};
use crate::encoding::{fisher_encode, l2_normalize, power_normalize, GmmModel};
use crate::error::{Error, Result};
use crate::io::{self, Header};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Hog,
    Lbp,
    /// Raw dense SIFT descriptors, one per grid site.
    Dsift,
    /// One Fisher vector per band.
    DsiftFv,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Hog => "hog",
            FeatureKind::Lbp => "lbp",
            FeatureKind::Dsift => "dsift",
            FeatureKind::DsiftFv => "dsift-fv",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hog" => Ok(Self::Hog),
            "lbp" => Ok(Self::Lbp),
            "dsift" => Ok(Self::Dsift),
            "dsift-fv" => Ok(Self::DsiftFv),
            other => Err(Error::Config(format!("unknown feature kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub kind: FeatureKind,
    pub grid: (usize, usize),
    pub dim: usize,
    /// `per_band[b]` holds that band's vectors.
    pub per_band: Vec<Vec<Vec<f64>>>,
}

impl FeatureFile {
    /// Wraps per-band descriptor sets of one cube.
    pub fn from_sets(sets: Vec<DescriptorSet>) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::InsufficientData("no bands to store".into()))?;
        let kind = match first.kind {
            DescriptorKind::Hog => FeatureKind::Hog,
            DescriptorKind::Lbp => FeatureKind::Lbp,
            DescriptorKind::Dsift => FeatureKind::Dsift,
        };
        let (grid, dim) = (first.grid_shape, first.dim());
        Ok(Self {
            kind,
            grid,
            dim,
            per_band: sets.into_iter().map(|s| s.vectors).collect(),
        })
    }

    /// Replaces dense SIFT descriptors by one L2-normalised Fisher vector per band.
    pub fn fisher_encoded(&self, gmm: &GmmModel, power_norm: bool) -> Result<Self> {
        if self.kind != FeatureKind::Dsift {
            return Err(Error::Config(format!("cannot Fisher-encode {} features", self.kind)));
        }
        let per_band = self
            .per_band
            .iter()
            .map(|band| {
                let mut fv = fisher_encode(band, gmm)?.values;
                if power_norm {
                    power_normalize(&mut fv);
                }
                Ok(vec![l2_normalize(&fv)?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kind: FeatureKind::DsiftFv,
            grid: (1, 1),
            dim: 2 * gmm.k * gmm.dim,
            per_band,
        })
    }

    /// One classifier input per band: HOG and LBP vectors are L2-normalised,
    /// dense SIFT is Fisher-encoded with `gmm`, Fisher vectors pass through.
    pub fn classifier_inputs(&self, gmm: Option<&GmmModel>, power_norm: bool) -> Result<Vec<Vec<f64>>> {
        match self.kind {
            FeatureKind::Hog | FeatureKind::Lbp => self.band_vectors()?.iter().map(|v| l2_normalize(v)).collect(),
            FeatureKind::Dsift => {
                let gmm = gmm.ok_or_else(|| Error::Config("dense SIFT features need a GMM".into()))?;
                self.fisher_encoded(gmm, power_norm)?.band_vectors()
            }
            FeatureKind::DsiftFv => self.band_vectors(),
        }
    }

    pub fn vectors_per_band(&self) -> usize {
        self.per_band.first().map_or(0, Vec::len)
    }

    /// One vector per band, for single-vector kinds.
    pub fn band_vectors(&self) -> Result<Vec<Vec<f64>>> {
        if self.vectors_per_band() != 1 {
            return Err(Error::Config(format!(
                "{} features hold {} vectors per band, expected 1",
                self.kind,
                self.vectors_per_band()
            )));
        }
        Ok(self.per_band.iter().map(|b| b[0].clone()).collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let per = self.vectors_per_band();
        let mut payload = Vec::with_capacity(self.per_band.len() * per * self.dim);
        for band in &self.per_band {
            if band.len() != per {
                return Err(Error::Config("bands hold different vector counts".into()));
            }
            for v in band {
                if v.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                payload.extend(v.iter().map(|&x| x as f32));
            }
        }
        let mut header = Header::new();
        header
            .push("kind", self.kind)
            .push("bands", self.per_band.len())
            .push("vectors_per_band", per)
            .push("dim", self.dim)
            .push("grid", format!("{},{}", self.grid.0, self.grid.1))
            .push("dtype", "float32le");
        io::write_tagged(path.as_ref(), &header, &payload)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (header, payload) = io::read_tagged(path)?;
        header.expect("dtype", "float32le", path)?;
        let kind: FeatureKind = header.require("kind", path)?.parse()?;
        let bands: usize = header.parse_value("bands", path)?;
        let per: usize = header.parse_value("vectors_per_band", path)?;
        let dim: usize = header.parse_value("dim", path)?;
        let grid: Vec<usize> = header.parse_list("grid", path)?;
        if grid.len() != 2 {
            return Err(Error::Header {
                path: path.to_path_buf(),
                reason: "grid must be `rows,cols`".into(),
            });
        }
        let expected = bands * per * dim;
        if payload.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: payload.len(),
            });
        }
        let mut chunks = payload.chunks(dim.max(1));
        let per_band = (0..bands)
            .map(|_| {
                (0..per)
                    .map(|_| {
                        chunks
                            .next()
                            .map(|c| c.iter().map(|&x| x as f64).collect())
                            .unwrap_or_default()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            kind,
            grid: (grid[0], grid[1]),
            dim,
            per_band,
        })
    }
}
