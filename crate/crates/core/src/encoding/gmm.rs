//! Diagonal-covariance Gaussian mixture fitted by EM.

use std::f64::consts::TAU;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, Header};
use crate::rng::SplitMix64;

/// Points per block in the E-step; blocks are reduced in index order so
/// results do not depend on the thread count.
const BLOCK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub k: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub variance_floor: f64,
    /// Seeds the k-means++ initialisation.
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            k: 100,
            max_iters: 100,
            rel_tol: 1e-4,
            variance_floor: 1e-4,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.max_iters == 0 || !(self.rel_tol > 0.0) || !(self.variance_floor > 0.0) {
            return Err(Error::Config(format!("invalid EM config {self:?}")));
        }
        Ok(())
    }
}

/// `k` diagonal Gaussians over `dim`-dimensional data. Means and variances
/// are stored row-major, one row of `dim` values per component.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub k: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub variance_floor: f64,
}

/// A fitted model plus its training trace.
#[derive(Debug, Clone)]
pub struct GmmFit {
    pub model: GmmModel,
    /// Average log-likelihood of the data under the model at the start of
    /// each EM iteration; the last entry belongs to the returned model.
    pub log_likelihoods: Vec<f64>,
    pub converged: bool,
}

impl GmmModel {
    pub fn mean(&self, k: usize) -> &[f64] {
        &self.means[k * self.dim..(k + 1) * self.dim]
    }

    pub fn variance(&self, k: usize) -> &[f64] {
        &self.variances[k * self.dim..(k + 1) * self.dim]
    }

    pub fn validate(&self) -> Result<()> {
        let kd = self.k * self.dim;
        if self.weights.len() != self.k || self.means.len() != kd || self.variances.len() != kd {
            return Err(Error::Config("GMM parameter sizes disagree".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("GMM weights must be >= 0 and sum to 1 (sum {sum})")));
        }
        if self.variances.iter().any(|v| !(*v >= self.variance_floor)) || self.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config("GMM variances below floor or non-finite means".into()));
        }
        Ok(())
    }

    /// Per-component `log w_k - ½ Σ_d log(2π σ²_kd)` and `1/σ²`.
    pub(crate) fn precompute(&self) -> (Vec<f64>, Vec<f64>) {
        let consts = (0..self.k)
            .map(|k| {
                let log_det: f64 = self.variance(k).iter().map(|v| (TAU * v).ln()).sum();
                self.weights[k].ln() - 0.5 * log_det
            })
            .collect();
        let inv = self.variances.iter().map(|v| 1.0 / v).collect();
        (consts, inv)
    }

    /// Fills `log_post` with log-posteriors of one point and returns its
    /// log-likelihood.
    pub(crate) fn log_posteriors(&self, x: &[f64], consts: &[f64], inv_var: &[f64], log_post: &mut [f64]) -> f64 {
        let d = self.dim;
        let mut max = f64::NEG_INFINITY;
        for k in 0..self.k {
            let mu = &self.means[k * d..(k + 1) * d];
            let iv = &inv_var[k * d..(k + 1) * d];
            let mut q = 0.0;
            for i in 0..d {
                let diff = x[i] - mu[i];
                q += diff * diff * iv[i];
            }
            let lp = consts[k] - 0.5 * q;
            log_post[k] = lp;
            max = max.max(lp);
        }
        let sum: f64 = log_post.iter().map(|lp| (lp - max).exp()).sum();
        let ll = max + sum.ln();
        log_post.iter_mut().for_each(|lp| *lp -= ll);
        ll
    }

    /// Average log-likelihood of `data`.
    pub fn average_log_likelihood(&self, data: &[Vec<f64>]) -> f64 {
        let (consts, inv) = self.precompute();
        let mut buf = vec![0.0; self.k];
        let total: f64 = data
            .iter()
            .map(|x| self.log_posteriors(x, &consts, &inv, &mut buf))
            .sum();
        total / data.len() as f64
    }

    /// Writes a header (`k`, `dim`, `variance_floor`) and a float32 payload of
    /// weights, means, variances.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut header = Header::new();
        header
            .push("kind", "gmm")
            .push("k", self.k)
            .push("dim", self.dim)
            .push("variance_floor", self.variance_floor)
            .push("dtype", "float32le");
        let payload: Vec<f32> = self
            .weights
            .iter()
            .chain(&self.means)
            .chain(&self.variances)
            .map(|&v| v as f32)
            .collect();
        io::write_tagged(path.as_ref(), &header, &payload)
    }

    /// Loads a model written by [`GmmModel::save`]. Weights are renormalised
    /// and variances re-floored in f64 after the float32 round trip.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (header, payload) = io::read_tagged(path)?;
        header.expect("kind", "gmm", path)?;
        header.expect("dtype", "float32le", path)?;
        let k: usize = header.parse_value("k", path)?;
        let dim: usize = header.parse_value("dim", path)?;
        let variance_floor: f64 = header.parse_value("variance_floor", path)?;
        let expected = k + 2 * k * dim;
        if payload.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: payload.len(),
            });
        }
        let values: Vec<f64> = payload.iter().map(|&v| v as f64).collect();
        let mut weights = values[..k].to_vec();
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        let means = values[k..k + k * dim].to_vec();
        let variances = values[k + k * dim..]
            .iter()
            .map(|&v| v.max(variance_floor))
            .collect();
        let model = Self {
            k,
            dim,
            weights,
            means,
            variances,
            variance_floor,
        };
        model.validate()?;
        Ok(model)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance to the nearest chosen centre. When every point already
/// coincides with a centre, a uniform point is taken.
fn kmeans_pp(data: &[Vec<f64>], k: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let n = data.len();
    let mut centres = vec![rng.below(n as u64) as usize];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &data[centres[0]])).collect();
    while centres.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.below(n as u64) as usize
        };
        centres.push(next);
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &data[next]));
        }
    }
    centres
}

/// Hard assignment to the seeds followed by one moment estimate per cluster.
fn initial_model(data: &[Vec<f64>], config: &EmConfig, rng: &mut SplitMix64) -> GmmModel {
    let (n, dim, k) = (data.len(), data[0].len(), config.k);
    let seeds = kmeans_pp(data, k, rng);
    let centres: Vec<&[f64]> = seeds.iter().map(|&i| data[i].as_slice()).collect();

    let mut global_mean = vec![0.0; dim];
    for x in data {
        global_mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
    }
    global_mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut global_var = vec![0.0; dim];
    for x in data {
        for i in 0..dim {
            global_var[i] += (x[i] - global_mean[i]).powi(2);
        }
    }
    global_var
        .iter_mut()
        .for_each(|v| *v = (*v / n as f64).max(config.variance_floor));

    let assign: Vec<usize> = data
        .par_iter()
        .map(|x| {
            let mut best = (f64::INFINITY, 0);
            for (c, centre) in centres.iter().enumerate() {
                let d = sq_dist(x, centre);
                if d < best.0 {
                    best = (d, c);
                }
            }
            best.1
        })
        .collect();

    let mut counts = vec![0usize; k];
    let mut means = vec![0.0; k * dim];
    for (x, &c) in data.iter().zip(&assign) {
        counts[c] += 1;
        means[c * dim..(c + 1) * dim]
            .iter_mut()
            .zip(x)
            .for_each(|(m, v)| *m += v);
    }
    for c in 0..k {
        let row = &mut means[c * dim..(c + 1) * dim];
        if counts[c] == 0 {
            row.copy_from_slice(centres[c]);
        } else {
            row.iter_mut().for_each(|m| *m /= counts[c] as f64);
        }
    }
    let mut variances = vec![0.0; k * dim];
    for (x, &c) in data.iter().zip(&assign) {
        for i in 0..dim {
            variances[c * dim + i] += (x[i] - means[c * dim + i]).powi(2);
        }
    }
    for c in 0..k {
        for i in 0..dim {
            let v = &mut variances[c * dim + i];
            *v = if counts[c] == 0 {
                global_var[i]
            } else {
                (*v / counts[c] as f64).max(config.variance_floor)
            };
        }
    }
    // Empty clusters get a pseudo-count of one.
    let mass: Vec<f64> = counts.iter().map(|&c| c.max(1) as f64).collect();
    let total: f64 = mass.iter().sum();
    GmmModel {
        k,
        dim,
        weights: mass.iter().map(|m| m / total).collect(),
        means,
        variances,
        variance_floor: config.variance_floor,
    }
}

struct Stats {
    ll: f64,
    s0: Vec<f64>,
    /// Σ γ (x - μ_old)
    s1: Vec<f64>,
    /// Σ γ (x - μ_old)²
    s2: Vec<f64>,
}

impl Stats {
    fn zeros(k: usize, dim: usize) -> Self {
        Self {
            ll: 0.0,
            s0: vec![0.0; k],
            s1: vec![0.0; k * dim],
            s2: vec![0.0; k * dim],
        }
    }

    fn add(&mut self, other: &Stats) {
        self.ll += other.ll;
        self.s0.iter_mut().zip(&other.s0).for_each(|(a, b)| *a += b);
        self.s1.iter_mut().zip(&other.s1).for_each(|(a, b)| *a += b);
        self.s2.iter_mut().zip(&other.s2).for_each(|(a, b)| *a += b);
    }
}

fn e_step(model: &GmmModel, data: &[Vec<f64>]) -> Stats {
    let (k, dim) = (model.k, model.dim);
    let (consts, inv) = model.precompute();
    let partial: Vec<Stats> = data
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut st = Stats::zeros(k, dim);
            let mut lp = vec![0.0; k];
            for x in chunk {
                st.ll += model.log_posteriors(x, &consts, &inv, &mut lp);
                for c in 0..k {
                    let g = lp[c].exp();
                    if g == 0.0 {
                        continue;
                    }
                    st.s0[c] += g;
                    let mu = model.mean(c);
                    let s1 = &mut st.s1[c * dim..(c + 1) * dim];
                    let s2 = &mut st.s2[c * dim..(c + 1) * dim];
                    for i in 0..dim {
                        let d = x[i] - mu[i];
                        s1[i] += g * d;
                        s2[i] += g * d * d;
                    }
                }
            }
            st
        })
        .collect();
    let mut total = Stats::zeros(k, dim);
    for p in &partial {
        total.add(p);
    }
    total
}

fn m_step(model: &GmmModel, stats: &Stats, n: usize, floor: f64) -> GmmModel {
    let (k, dim) = (model.k, model.dim);
    let mut next = model.clone();
    for c in 0..k {
        let s0 = stats.s0[c];
        next.weights[c] = s0 / n as f64;
        if s0 <= 0.0 {
            // No responsibility: keep the component where it was.
            continue;
        }
        for i in 0..dim {
            let shift = stats.s1[c * dim + i] / s0;
            next.means[c * dim + i] = model.means[c * dim + i] + shift;
            let var = stats.s2[c * dim + i] / s0 - shift * shift;
            next.variances[c * dim + i] = var.max(floor);
        }
    }
    let sum: f64 = next.weights.iter().sum();
    next.weights.iter_mut().for_each(|w| *w /= sum);
    next
}

/// Fits a `config.k`-component diagonal GMM by EM.
///
/// Initialisation is k-means++ (seeded by `config.seed`) followed by one
/// hard-assignment moment estimate. Iteration stops when the relative
/// improvement of the average log-likelihood drops below `config.rel_tol`
/// or after `config.max_iters` M-steps. Variances are floored at every
/// M-step.
pub fn fit_gmm(data: &[Vec<f64>], config: &EmConfig) -> Result<GmmFit> {
    config.validate()?;
    let n = data.len();
    if n < config.k {
        return Err(Error::InsufficientData(format!(
            "{n} descriptors for {} components",
            config.k
        )));
    }
    let dim = data[0].len();
    if dim == 0 {
        return Err(Error::InsufficientData("zero-dimensional descriptors".into()));
    }
    for (i, x) in data.iter().enumerate() {
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
    if config.k > 1 && data.iter().all(|x| x == &data[0]) {
        return Err(Error::SingularFit(format!(
            "all {n} points are identical; {} components cannot be separated",
            config.k
        )));
    }

    let mut rng = SplitMix64::new(config.seed);
    let mut model = initial_model(data, config, &mut rng);
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iters {
        let stats = e_step(&model, data);
        let ll = stats.ll / n as f64;
        if let Some(&prev) = trace.last() {
            let gain = (ll - prev) / f64::max(f64::abs(prev), 1e-12);
            if gain < config.rel_tol {
                trace.push(ll);
                converged = true;
                break;
            }
        }
        trace.push(ll);
        model = m_step(&model, &stats, n, config.variance_floor);
    }
    if !converged {
        trace.push(model.average_log_likelihood(data));
    }
    log::debug!(
        "GMM k={} n={n}: {} iterations, avg log-likelihood {:.6}",
        config.k,
        trace.len(),
        trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(GmmFit {
        model,
        log_likelihoods: trace,
        converged,
    })
}
