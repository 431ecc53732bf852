//! Brute-force reference implementations used by the integration tests.
//! Each one is written from the textbook definition and shares no code
//! with the library beyond plain data types.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use hsi_core::{Plane, SplitMix64};

pub fn random_plane(rng: &mut SplitMix64, w: usize, h: usize) -> Plane {
    Plane::from_fn(w, h, |_, _| rng.next_f64())
}

/// Values drawn from a handful of levels so ties are common.
pub fn quantized_plane(rng: &mut SplitMix64, w: usize, h: usize, levels: u64) -> Plane {
    Plane::from_fn(w, h, |_, _| rng.below(levels) as f64 / levels as f64)
}

fn at(img: &Plane, x: isize, y: isize) -> f64 {
    let xc = x.clamp(0, img.width() as isize - 1) as usize;
    let yc = y.clamp(0, img.height() as isize - 1) as usize;
    img.data()[yc * img.width() + xc]
}

pub fn median(img: &Plane, window: usize) -> Vec<f64> {
    let r = (window / 2) as isize;
    let mut out = Vec::new();
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            let mut vals = Vec::new();
            for dy in -r..=r {
                for dx in -r..=r {
                    vals.push(at(img, x + dx, y + dy));
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            out.push(vals[vals.len() / 2]);
        }
    }
    out
}

pub fn bilinear_resize(img: &Plane, target: usize) -> Vec<f64> {
    let sx = (img.width() - 1) as f64 / (target - 1) as f64;
    let sy = (img.height() - 1) as f64 / (target - 1) as f64;
    let mut out = Vec::new();
    for v in 0..target {
        for u in 0..target {
            let (x, y) = (u as f64 * sx, v as f64 * sy);
            out.push(bilinear(img, x, y));
        }
    }
    out
}

/// Area-weighted bilinear interpolation with edge replication.
pub fn bilinear(img: &Plane, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as isize, y0 as isize);
    (1.0 - fx) * (1.0 - fy) * at(img, xi, yi)
        + fx * (1.0 - fy) * at(img, xi + 1, yi)
        + (1.0 - fx) * fy * at(img, xi, yi + 1)
        + fx * fy * at(img, xi + 1, yi + 1)
}

/// Two-step lerp: the same interpolant, but exact when all four corners agree.
fn bilinear_lerp(img: &Plane, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as isize, y0 as isize);
    let lerp = |a: f64, b: f64, t: f64| a + t * (b - a);
    let top = lerp(at(img, xi, yi), at(img, xi + 1, yi), fx);
    let bottom = lerp(at(img, xi, yi + 1), at(img, xi + 1, yi + 1), fx);
    lerp(top, bottom, fy)
}

pub fn lbp_codes(img: &Plane) -> Vec<u8> {
    // Counter-clockwise from +x with y pointing down.
    let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
    let offsets: Vec<(f64, f64)> = (0..8)
        .map(|p| {
            let a = TAU * p as f64 / 8.0;
            (snap(a.cos()), snap(-a.sin()))
        })
        .collect();
    let mut out = Vec::new();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let c = img.data()[y * img.width() + x];
            let mut code = 0u8;
            for (p, &(dx, dy)) in offsets.iter().enumerate() {
                let v = if dx.fract() == 0.0 && dy.fract() == 0.0 {
                    at(img, x as isize + dx as isize, y as isize + dy as isize)
                } else {
                    bilinear_lerp(img, x as f64 + dx, y as f64 + dy)
                };
                if v >= c {
                    code |= 1 << p;
                }
            }
            out.push(code);
        }
    }
    out
}

pub fn uniform_label(code: u8) -> usize {
    let uniform = |c: u8| {
        let bits: Vec<u8> = (0..8).map(|i| (c >> i) & 1).collect();
        (0..8).filter(|&i| bits[i] != bits[(i + 1) % 8]).count() <= 2
    };
    if !uniform(code) {
        return 58;
    }
    (0..code).filter(|&c| uniform(c)).count()
}

pub fn lbp_histograms(img: &Plane, cell: usize) -> Vec<f64> {
    let codes = lbp_codes(img);
    let (cx, cy) = (img.width() / cell, img.height() / cell);
    let mut out = Vec::new();
    for j in 0..cy {
        for i in 0..cx {
            let mut h = vec![0.0; 59];
            for y in j * cell..(j + 1) * cell {
                for x in i * cell..(i + 1) * cell {
                    h[uniform_label(codes[y * img.width() + x])] += 1.0;
                }
            }
            let total: f64 = h.iter().sum();
            out.extend(h.iter().map(|v| v / total));
        }
    }
    out
}

fn gradient(img: &Plane, x: usize, y: usize) -> (f64, f64) {
    let (x, y) = (x as isize, y as isize);
    (at(img, x + 1, y) - at(img, x - 1, y), at(img, x, y + 1) - at(img, x, y - 1))
}

/// Triangular vote of `angle` into the bin centred at `centre`, on a circle
/// of circumference `period`.
fn tri(angle: f64, centre: f64, width: f64, period: f64) -> f64 {
    let mut d = (angle - centre).rem_euclid(period);
    if d > period / 2.0 {
        d = period - d;
    }
    (1.0 - d / width).max(0.0)
}

fn l2_hys(mut v: Vec<f64>, eps: f64) -> Vec<f64> {
    let n = (v.iter().map(|x| x * x).sum::<f64>() + eps * eps).sqrt();
    if n > 0.0 {
        v = v.iter().map(|x| x / n).collect();
    }
    v = v.iter().map(|x| x.min(0.2)).collect();
    let n = (v.iter().map(|x| x * x).sum::<f64>() + eps * eps).sqrt();
    if n > 0.0 {
        v = v.iter().map(|x| x / n).collect();
    }
    v
}

/// Default HOG layout: 9 unsigned bins, `cell`-pixel cells, 2×2 blocks,
/// stride one cell, L2-hys with ε = 1e-6.
pub fn hog(img: &Plane, cell: usize) -> Vec<f64> {
    let bins = 9;
    let width = PI / bins as f64;
    let (cx, cy) = (img.width() / cell, img.height() / cell);
    let mut cells = vec![vec![0.0; bins]; cx * cy];
    for y in 0..cy * cell {
        for x in 0..cx * cell {
            let (gx, gy) = gradient(img, x, y);
            let mag = (gx * gx + gy * gy).sqrt();
            let angle = gy.atan2(gx).rem_euclid(PI);
            for (b, slot) in cells[(y / cell) * cx + x / cell].iter_mut().enumerate() {
                *slot += mag * tri(angle, b as f64 * width, width, PI);
            }
        }
    }
    let mut out = Vec::new();
    for by in 0..cy - 1 {
        for bx in 0..cx - 1 {
            let mut block = Vec::new();
            for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                block.extend_from_slice(&cells[(by + dy) * cx + bx + dx]);
            }
            out.extend(l2_hys(block, 1e-6));
        }
    }
    out
}

/// Dense SIFT with 4×4 spatial bins of `bin` pixels and 8 signed
/// orientation bins, sites every `step` pixels.
pub fn dsift(img: &Plane, bin: usize, step: usize) -> Vec<Vec<f64>> {
    let patch = 4 * bin;
    let sigma = patch as f64 / 2.0;
    let owidth = TAU / 8.0;
    let rows = (img.height() - patch) / step + 1;
    let cols = (img.width() - patch) / step + 1;
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let mut d = vec![0.0; 128];
            for v in 0..patch {
                for u in 0..patch {
                    let (gx, gy) = gradient(img, j * step + u, i * step + v);
                    let mag = (gx * gx + gy * gy).sqrt();
                    let angle = gy.atan2(gx).rem_euclid(TAU);
                    let (px, py) = (u as f64 + 0.5, v as f64 + 0.5);
                    let g = (-((px - sigma).powi(2) + (py - sigma).powi(2)) / (2.0 * sigma * sigma)).exp();
                    let (tx, ty) = (px / bin as f64 - 0.5, py / bin as f64 - 0.5);
                    for sy in 0..4 {
                        for sx in 0..4 {
                            let ws = (1.0 - (tx - sx as f64).abs()).max(0.0) * (1.0 - (ty - sy as f64).abs()).max(0.0);
                            for o in 0..8 {
                                d[(sy * 4 + sx) * 8 + o] +=
                                    mag * g * ws * tri(angle, o as f64 * owidth, owidth, TAU);
                            }
                        }
                    }
                }
            }
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-5 {
                out.push(vec![0.0; 128]);
            } else {
                out.push(l2_hys(d, 0.0));
            }
        }
    }
    out
}

/// Fisher vector from the definition, with posteriors from explicit
/// Gaussian densities.
pub fn fisher(x: &[Vec<f64>], weights: &[f64], means: &[Vec<f64>], vars: &[Vec<f64>]) -> Vec<f64> {
    let k = weights.len();
    let d = means[0].len();
    let n = x.len() as f64;
    let mut gm = vec![vec![0.0; d]; k];
    let mut gs = vec![vec![0.0; d]; k];
    for xi in x {
        let dens: Vec<f64> = (0..k)
            .map(|c| {
                let mut p = weights[c];
                for j in 0..d {
                    let z = xi[j] - means[c][j];
                    p *= (-z * z / (2.0 * vars[c][j])).exp() / (TAU * vars[c][j]).sqrt();
                }
                p
            })
            .collect();
        let total: f64 = dens.iter().sum();
        for c in 0..k {
            let gamma = dens[c] / total;
            for j in 0..d {
                let z = (xi[j] - means[c][j]) / vars[c][j].sqrt();
                gm[c][j] += gamma * z;
                gs[c][j] += gamma * (z * z - 1.0);
            }
        }
    }
    let mut out = Vec::new();
    for c in 0..k {
        out.extend(gm[c].iter().map(|v| v / (n * weights[c].sqrt())));
    }
    for c in 0..k {
        out.extend(gs[c].iter().map(|v| v / (n * (2.0 * weights[c]).sqrt())));
    }
    out
}

/// Most votes; ties by larger margin sum, then lower class.
pub fn tally(votes: &[(usize, f64)], classes: usize) -> usize {
    let mut best: Option<(usize, f64, usize)> = None;
    for c in 0..classes {
        let count = votes.iter().filter(|v| v.0 == c).count();
        let margin: f64 = votes.iter().filter(|v| v.0 == c).map(|v| v.1).sum();
        best = match best {
            Some((bc, bm, bi)) if count < bc || (count == bc && margin <= bm) => Some((bc, bm, bi)),
            _ => Some((count, margin, c)),
        };
    }
    best.unwrap().2
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn table(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

fn linear(rows: &[Vec<f64>], col: usize, x: f64) -> f64 {
    for w in rows.windows(2) {
        if x >= w[0][0] && x <= w[1][0] {
            let t = (x - w[0][0]) / (w[1][0] - w[0][0]);
            return w[0][col] + t * (w[1][col] - w[0][col]);
        }
    }
    0.0
}

/// Chromaticity of a flat spectrum over `[lo, hi]`, integrated on a
/// 0.1 nm grid against the bundled observer, illuminant and sensor tables.
pub fn flat_white_chromaticity(lo: f64, hi: f64) -> (f64, f64) {
    let cmf = table(include_str!("../../data/cie2006_xyz_2deg.csv"));
    let d65 = table(include_str!("../../data/d65.csv"));
    let sensor = table(include_str!("../../data/silicon_responsivity.csv"));
    let steps = ((hi - lo) * 10.0).round() as usize;
    let mut xyz = [0.0; 3];
    for i in 0..=steps {
        let l = lo + (hi - lo) * i as f64 / steps as f64;
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        let e = linear(&d65, 1, l) * linear(&sensor, 1, l);
        for c in 0..3 {
            xyz[c] += w * e * linear(&cmf, c + 1, l);
        }
    }
    let s = xyz[0] + xyz[1] + xyz[2];
    (xyz[0] / s, xyz[1] / s)
}
