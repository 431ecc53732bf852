//! Deterministic inputs for the kernel benchmarks.

use hsi_core::cube::{render_subject_sample, SyntheticSpec};
use hsi_core::{HyperspectralCube, Plane, SplitMix64};

/// A textured `size × size` synthetic band.
pub fn face_band(size: usize) -> Plane {
    cube(size, 4).band(2)
}

pub fn cube(size: usize, bands: usize) -> HyperspectralCube {
    let spec = SyntheticSpec {
        noise_sigma: 0.01,
        ..SyntheticSpec::new(3, 3, (size, size, bands))
    };
    render_subject_sample(&spec, 1, 0).expect("valid synthetic spec")
}

/// `n` random vectors of length `dim` with entries in [0, 1).
pub fn random_vectors(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.next_f64()).collect()).collect()
}

/// Two Gaussian clouds offset along every axis, labelled ±1.
pub fn two_clouds(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
    let mut rng = SplitMix64::new(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label: i8 = if i % 2 == 0 { 1 } else { -1 };
        x.push((0..dim).map(|_| 0.3 * f64::from(label) + rng.normal()).collect());
        y.push(label);
    }
    (x, y)
}
