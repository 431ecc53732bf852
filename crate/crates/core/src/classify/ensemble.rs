use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{train_svm, LinearSvm, SvmTrainConfig};
use crate::error::{Error, Result};
use crate::io;

/// One set of one-vs-all SVMs per band, over a shared class list.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEnsemble {
    pub classes: Vec<String>,
    /// `per_band[b][c]` separates class `c` from the rest on band `b`.
    pub per_band: Vec<Vec<LinearSvm>>,
    pub dim: usize,
    /// Free-form description of how features were produced.
    pub provenance: serde_json::Value,
}

/// A single band's prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    pub class: usize,
    pub margin: f64,
}

/// Trains `bands × classes` one-vs-all SVMs; `labels[n]` indexes `classes`.
pub fn train_band_ensemble(
    per_band_features: &[Vec<Vec<f64>>],
    labels: &[usize],
    classes: Vec<String>,
    config: &SvmTrainConfig,
) -> Result<BandEnsemble> {
    config.validate()?;
    if per_band_features.is_empty() {
        return Err(Error::InsufficientData("no bands".into()));
    }
    if classes.len() < 2 {
        return Err(Error::Labels("one-vs-all needs at least two classes".into()));
    }
    let n = labels.len();
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
        return Err(Error::Labels(format!("label {bad} outside {} classes", classes.len())));
    }
    for (c, name) in classes.iter().enumerate() {
        if !labels.contains(&c) {
            return Err(Error::Labels(format!("class `{name}` has no samples")));
        }
    }
    let dim = per_band_features[0].first().map_or(0, Vec::len);
    for (b, feats) in per_band_features.iter().enumerate() {
        if feats.len() != n {
            return Err(Error::Labels(format!(
                "band {b} has {} samples, expected {n}",
                feats.len()
            )));
        }
        if let Some(x) = feats.iter().find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
    }

    let k = classes.len();
    let binary: Vec<Vec<i8>> = (0..k)
        .map(|c| labels.iter().map(|&l| if l == c { 1 } else { -1 }).collect())
        .collect();
    let flat: Vec<LinearSvm> = (0..per_band_features.len() * k)
        .into_par_iter()
        .map(|job| {
            let (b, c) = (job / k, job % k);
            let mut svm = train_svm(&per_band_features[b], &binary[c], config)?;
            svm.class_id = c;
            Ok(svm)
        })
        .collect::<Result<_>>()?;
    let mut per_band = Vec::with_capacity(per_band_features.len());
    let mut it = flat.into_iter();
    for _ in 0..per_band_features.len() {
        per_band.push(it.by_ref().take(k).collect());
    }
    Ok(BandEnsemble {
        classes,
        per_band,
        dim,
        provenance: serde_json::Value::Null,
    })
}

impl BandEnsemble {
    pub fn bands(&self) -> usize {
        self.per_band.len()
    }

    pub fn svm_count(&self) -> usize {
        self.per_band.iter().map(Vec::len).sum()
    }

    /// Class with the largest decision value on one band; ties go to the
    /// lower class index.
    pub fn predict_band(&self, band: usize, feature: &[f64]) -> Result<Vote> {
        let svms = self.per_band.get(band).ok_or_else(|| {
            Error::Config(format!("band {band} out of range ({} bands)", self.bands()))
        })?;
        if feature.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: feature.len(),
            });
        }
        let mut best = Vote {
            class: 0,
            margin: f64::NEG_INFINITY,
        };
        for svm in svms {
            let m = svm.decision(feature);
            if m > best.margin {
                best = Vote {
                    class: svm.class_id,
                    margin: m,
                };
            }
        }
        Ok(best)
    }

    pub fn band_votes(&self, per_band_features: &[Vec<f64>]) -> Result<Vec<Vote>> {
        if per_band_features.len() != self.bands() {
            return Err(Error::DimensionMismatch {
                expected: self.bands(),
                found: per_band_features.len(),
            });
        }
        per_band_features
            .iter()
            .enumerate()
            .map(|(b, f)| self.predict_band(b, f))
            .collect()
    }

    /// Writes `ensemble.json` plus one `band{b}_class{c}.f32` payload per SVM
    /// holding `dim` float32 weights followed by the bias. Weights are
    /// rounded to float32, so a reloaded model can break exact vote ties
    /// differently.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let mut svms = Vec::new();
        for (b, band) in self.per_band.iter().enumerate() {
            for svm in band {
                let file = format!("band{b:03}_class{:03}.f32", svm.class_id);
                let mut payload: Vec<f32> = svm.weights.iter().map(|&w| w as f32).collect();
                payload.push(svm.bias as f32);
                io::write_file(&dir.join(&file), &io::encode_f32_le(&payload))?;
                svms.push(SvmEntry {
                    band: b,
                    class: svm.class_id,
                    file,
                });
            }
        }
        let manifest = EnsembleManifest {
            classes: self.classes.clone(),
            bands: self.bands(),
            dim: self.dim,
            provenance: self.provenance.clone(),
            svms,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        io::write_file(&dir.join(ENSEMBLE_FILE), text.as_bytes())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(ENSEMBLE_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: EnsembleManifest = serde_json::from_str(&text)?;
        let k = manifest.classes.len();
        let mut per_band: Vec<Vec<Option<LinearSvm>>> = vec![vec![None; k]; manifest.bands];
        for entry in &manifest.svms {
            if entry.band >= manifest.bands || entry.class >= k {
                return Err(Error::Config(format!("SVM entry out of range: {}", entry.file)));
            }
            let bytes = io::read_file(&dir.join(&entry.file))?;
            let values = io::decode_f32_le(&bytes).unwrap_or_default();
            if values.len() != manifest.dim + 1 {
                return Err(Error::DimensionMismatch {
                    expected: manifest.dim + 1,
                    found: values.len(),
                });
            }
            per_band[entry.band][entry.class] = Some(LinearSvm {
                weights: values[..manifest.dim].iter().map(|&v| v as f64).collect(),
                bias: values[manifest.dim] as f64,
                class_id: entry.class,
            });
        }
        let per_band = per_band
            .into_iter()
            .enumerate()
            .map(|(b, svms)| {
                svms.into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Config(format!("band {b} is missing an SVM")))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            classes: manifest.classes,
            per_band,
            dim: manifest.dim,
            provenance: manifest.provenance,
        })
    }
}

const ENSEMBLE_FILE: &str = "ensemble.json";

#[derive(Serialize, Deserialize)]
struct SvmEntry {
    band: usize,
    class: usize,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct EnsembleManifest {
    classes: Vec<String>,
    bands: usize,
    dim: usize,
    provenance: serde_json::Value,
    svms: Vec<SvmEntry>,
}

/// Fuses band votes: most votes wins; ties go to the larger sum of winning
/// margins among the tied classes, then to the lower class index.
pub fn tally_votes(votes: &[Vote], classes: usize) -> Result<usize> {
    if votes.is_empty() {
        return Err(Error::InsufficientData("no band votes to fuse".into()));
    }
    let mut counts = vec![0usize; classes];
    let mut margins = vec![0.0f64; classes];
    for v in votes {
        counts[v.class] += 1;
        margins[v.class] += v.margin;
    }
    let mut best = 0;
    for c in 1..classes {
        let better = counts[c] > counts[best]
            || (counts[c] == counts[best] && margins[c] > margins[best]);
        if better {
            best = c;
        }
    }
    Ok(best)
}

/// Majority vote over one feature vector per band.
pub fn majority_vote(ensemble: &BandEnsemble, per_band_features: &[Vec<f64>]) -> Result<usize> {
    if ensemble.bands() == 0 {
        return Err(Error::InsufficientData("ensemble has no bands".into()));
    }
    let votes = ensemble.band_votes(per_band_features)?;
    tally_votes(&votes, ensemble.classes.len())
}
