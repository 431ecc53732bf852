use super::GmmModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FisherVector {
    /// `2 * k * dim` values: all mean-gradient blocks (component order), then
    /// all variance-gradient blocks.
    pub values: Vec<f64>,
    pub source_band: usize,
}

/// Fisher vector of a descriptor set with respect to the GMM means and
/// variances:
///
/// ```text
/// G_μk = 1/(N √w_k)  Σ_n γ_n(k) (x_n − μ_k) / σ_k
/// G_σk = 1/(N √2w_k) Σ_n γ_n(k) ((x_n − μ_k)² / σ_k² − 1)
/// ```
///
/// An empty set encodes to the zero vector. Components with zero weight
/// contribute zeros.
pub fn fisher_encode(descriptors: &[Vec<f64>], gmm: &GmmModel) -> Result<FisherVector> {
    let (k, dim) = (gmm.k, gmm.dim);
    let mut values = vec![0.0; 2 * k * dim];
    if descriptors.is_empty() {
        return Ok(FisherVector {
            values,
            source_band: 0,
        });
    }
    if let Some(x) = descriptors.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    let (consts, inv_var) = gmm.precompute();
    let sigma: Vec<f64> = gmm.variances.iter().map(|v| v.sqrt()).collect();
    let (mean_part, var_part) = values.split_at_mut(k * dim);
    let mut lp = vec![0.0; k];
    for x in descriptors {
        gmm.log_posteriors(x, &consts, &inv_var, &mut lp);
        for c in 0..k {
            let g = lp[c].exp();
            if g == 0.0 {
                continue;
            }
            let mu = gmm.mean(c);
            for i in 0..dim {
                let j = c * dim + i;
                let z = (x[i] - mu[i]) / sigma[j];
                mean_part[j] += g * z;
                var_part[j] += g * (z * z - 1.0);
            }
        }
    }
    let n = descriptors.len() as f64;
    for c in 0..k {
        let w = gmm.weights[c];
        let (a, b) = if w > 0.0 {
            (1.0 / (n * w.sqrt()), 1.0 / (n * (2.0 * w).sqrt()))
        } else {
            (0.0, 0.0)
        };
        mean_part[c * dim..(c + 1) * dim].iter_mut().for_each(|v| *v *= a);
        var_part[c * dim..(c + 1) * dim].iter_mut().for_each(|v| *v *= b);
    }
    Ok(FisherVector {
        values,
        source_band: 0,
    })
}
