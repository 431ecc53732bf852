//! Evaluation protocol: gallery/probe splits, end-to-end runs and reports.

mod experiment;
mod pipeline;
mod protocol;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use experiment::{compare_hsi_vs_rgb, run_experiment, Experiment};
pub use pipeline::{encode_sample, extract_sample, prepare_cube, SampleDescriptors};
pub use protocol::{make_splits, Split};
pub use report::{render_table, ExperimentReport, ReportSet};

use crate::classify::SvmTrainConfig;
use crate::descriptors::{DescriptorConfigs, DescriptorKind};
use crate::encoding::EmConfig;
use crate::error::{Error, Result};
use crate::preprocess::PreprocessConfig;

/// Feature pipeline evaluated by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hog,
    Lbp,
    DsiftFv,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hog, Method::Lbp, Method::DsiftFv];

    pub fn descriptor(self) -> DescriptorKind {
        match self {
            Method::Hog => DescriptorKind::Hog,
            Method::Lbp => DescriptorKind::Lbp,
            Method::DsiftFv => DescriptorKind::Dsift,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Hog => "HOG",
            Method::Lbp => "LBP",
            Method::DsiftFv => "DSIFT-FV",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hog => "hog",
            Method::Lbp => "lbp",
            Method::DsiftFv => "dsift-fv",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hog" => Ok(Self::Hog),
            "lbp" => Ok(Self::Lbp),
            "dsift-fv" | "dsift" => Ok(Self::DsiftFv),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Which bands feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Every retained hyperspectral band.
    AllBands,
    /// Three bands synthesised by [`crate::colorimetry::hsi_to_rgb`].
    Rgb,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::AllBands => "all-bands",
            Representation::Rgb => "rgb",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub gallery_per_subject: usize,
    pub probe_per_subject: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Use only the first `n` subjects of the manifest.
    pub subjects_limit: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            gallery_per_subject: 1,
            probe_per_subject: 2,
            repetitions: 5,
            seed: 42,
            subjects_limit: None,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gallery_per_subject == 0 || self.probe_per_subject == 0 {
            return Err(Error::Config("gallery and probe sizes must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("at least one repetition is required".into()));
        }
        if self.subjects_limit == Some(0) {
            return Err(Error::Config("subjects limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// `drop_first`/`drop_last` here are overridden by the manifest's band
    /// exclusion when running an experiment.
    pub preprocess: PreprocessConfig,
    pub descriptors: DescriptorConfigs,
    pub em: EmConfig,
    pub svm: SvmTrainConfig,
    /// Signed square root before the final L2 normalisation of Fisher vectors.
    pub power_norm: bool,
    /// Cap on pooled gallery descriptors used to fit the GMM.
    pub gmm_sample_limit: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessConfig::default(),
            descriptors: DescriptorConfigs::default(),
            em: EmConfig::default(),
            svm: SvmTrainConfig::default(),
            power_norm: false,
            gmm_sample_limit: 200_000,
        }
    }
}
