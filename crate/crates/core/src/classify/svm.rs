//! L1-loss linear SVM trained by dual coordinate descent.
//!
//! The bias is learned by appending a constant 1 feature, so it is
//! regularised together with the weights:
//!
//! ```text
//! min_w  ½‖w‖² + C Σ_i max(0, 1 − y_i w·[x_i, 1])
//! ```
//!
//! The dual is `max_α Σα − ½‖Σ α_i y_i x̃_i‖²` subject to `0 ≤ α ≤ C`,
//! solved one coordinate at a time in a freshly shuffled order each epoch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmTrainConfig {
    pub c: f64,
    /// Stop once the largest projected-gradient magnitude in an epoch is
    /// below this.
    pub tol: f64,
    pub max_epochs: usize,
    pub shuffle_seed: u64,
}

impl Default for SvmTrainConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            tol: 1e-3,
            max_epochs: 1000,
            shuffle_seed: 0,
        }
    }
}

impl SvmTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.tol > 0.0) || self.max_epochs == 0 {
            return Err(Error::Config(format!("invalid SVM config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub class_id: usize,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

/// Solver output with the dual state needed for optimality checks.
#[derive(Debug, Clone)]
pub struct SvmTraining {
    pub svm: LinearSvm,
    pub alphas: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub max_violation: f64,
}

impl SvmTraining {
    pub fn primal_objective(&self, features: &[Vec<f64>], labels: &[i8], c: f64) -> f64 {
        let w = &self.svm;
        let reg = 0.5 * (dot(&w.weights, &w.weights) + w.bias * w.bias);
        let loss: f64 = features
            .iter()
            .zip(labels)
            .map(|(x, &y)| (1.0 - y as f64 * w.decision(x)).max(0.0))
            .sum();
        reg + c * loss
    }

    pub fn dual_objective(&self) -> f64 {
        let w = &self.svm;
        self.alphas.iter().sum::<f64>() - 0.5 * (dot(&w.weights, &w.weights) + w.bias * w.bias)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_inputs(features: &[Vec<f64>], labels: &[i8]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::Labels(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::Labels(format!("binary labels must be ±1, found {y}")));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Labels("both classes must be present".into()));
    }
    let dim = features[0].len();
    for (i, x) in features.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if let Some(&v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue { index: i, value: v });
        }
    }
    Ok(dim)
}

pub fn train_svm(features: &[Vec<f64>], labels: &[i8], config: &SvmTrainConfig) -> Result<LinearSvm> {
    train_svm_detailed(features, labels, config).map(|t| t.svm)
}

pub fn train_svm_detailed(features: &[Vec<f64>], labels: &[i8], config: &SvmTrainConfig) -> Result<SvmTraining> {
    config.validate()?;
    let dim = check_inputs(features, labels)?;
    let n = features.len();
    let c = config.c;
    let q_diag: Vec<f64> = features.iter().map(|x| dot(x, x) + 1.0).collect();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(config.shuffle_seed);
    let mut epochs = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;

    while epochs < config.max_epochs {
        epochs += 1;
        rng.shuffle(&mut order);
        max_violation = 0.0;
        for &i in &order {
            let x = &features[i];
            let y = labels[i] as f64;
            let g = y * (dot(&w, x) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = f64::max(max_violation, pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y;
                if step != 0.0 {
                    w.iter_mut().zip(x).for_each(|(wj, xj)| *wj += step * xj);
                    b += step;
                }
            }
        }
        if max_violation < config.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "SVM stopped after {epochs} epochs with projected-gradient violation {max_violation:.3e}"
        );
    }
    Ok(SvmTraining {
        svm: LinearSvm {
            weights: w,
            bias: b,
            class_id: 0,
        },
        alphas: alpha,
        epochs,
        converged,
        max_violation,
    })
}
