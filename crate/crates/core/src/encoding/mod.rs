//! Visual dictionary (diagonal GMM) and Fisher-vector encoding.

mod fisher;
mod gmm;

pub use fisher::{fisher_encode, FisherVector};
pub use gmm::{fit_gmm, EmConfig, GmmFit, GmmModel};

use crate::error::{Error, Result};

/// `v / ‖v‖₂`; the zero vector maps to itself.
pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::InvalidValue { index, value });
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(v.to_vec());
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Signed square root, `sign(x) * sqrt(|x|)`.
pub fn power_normalize(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.signum() * x.abs().sqrt());
}
