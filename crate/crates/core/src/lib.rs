//! Image-level classification of hyperspectral cubes.
//!
//! Every band of a cube is treated as its own grayscale image. Each band is
//! described with HOG, uniform LBP or dense SIFT (the latter Fisher-encoded
//! against a diagonal GMM), a one-vs-all linear SVM set is trained per band,
//! and the per-band predictions are fused by majority voting.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`cube`]: the cube data model, its on-disk format, dataset manifests and
//!   a synthetic dataset generator.
//! - [`preprocess`]: band exclusion, median filtering and resizing.
//! - [`descriptors`]: HOG, LBP and dense SIFT on single-band images.
//! - [`encoding`]: GMM fitting, Fisher vectors, L2 normalisation.
//! - [`classify`]: linear SVMs and the per-band voting ensemble.
//! - [`colorimetry`]: spectral to linear sRGB conversion.
//! - [`harness`]: the gallery/probe protocol and experiment reports.
//! - [`features`]: the per-cube feature file used between CLI steps.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod colorimetry;
pub mod cube;
pub mod descriptors;
pub mod encoding;
mod error;
pub mod features;
pub mod harness;
pub mod image;
pub mod io;
pub mod preprocess;
pub mod rng;

pub use classify::{BandEnsemble, LinearSvm, SvmTrainConfig};
pub use colorimetry::SpectralResponse;
pub use cube::{DatasetManifest, HyperspectralCube, SyntheticSpec};
pub use descriptors::{DescriptorKind, DescriptorSet, HogConfig, LbpConfig, SiftConfig};
pub use encoding::{EmConfig, FisherVector, GmmModel};
pub use error::{Error, Result};
pub use harness::{ExperimentReport, Method, PipelineConfig, ProtocolConfig, Representation};
pub use image::Plane;
pub use preprocess::PreprocessConfig;
pub use rng::SplitMix64;
