//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hsi_core::classify::{tally_votes, train_svm_detailed, Vote};
use hsi_core::colorimetry::{chromaticity, hsi_to_rgb_unclamped, hsi_to_xyz};
use hsi_core::cube::{generate_synthetic, SpectralMode, SyntheticSpec};
use hsi_core::descriptors::{extract_dsift, extract_hog, extract_lbp, lbp_codes};
use hsi_core::encoding::{fisher_encode, fit_gmm};
use hsi_core::harness::{compare_hsi_vs_rgb, Experiment, ReportSet, Representation};
use hsi_core::preprocess::median_filter_band;
use hsi_core::{
    EmConfig, GmmModel, HogConfig, HyperspectralCube, LbpConfig, Method, PipelineConfig, PreprocessConfig,
    ProtocolConfig, SiftConfig, SpectralResponse, SplitMix64, SvmTrainConfig,
};

type Check = Result<String, String>;
type Criterion<'a> = (u8, &'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within_budget(elapsed: Duration, budget_secs: u64, detail: String) -> Check {
    ensure(
        elapsed.as_secs() < budget_secs,
        format!("{detail}; took {:.1}s, budget {budget_secs}s", elapsed.as_secs_f64()),
    )?;
    Ok(detail)
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xacce_0001);
    let instances = 100;
    let mut worst = 0.0f64;

    for i in 0..instances {
        let (w, h) = (3 + rng.below(18) as usize, 3 + rng.below(18) as usize);
        let img = if i % 2 == 0 {
            common::random_plane(&mut rng, w, h)
        } else {
            common::quantized_plane(&mut rng, w, h, 4)
        };
        let window = [1, 3, 5][i % 3];
        let got = median_filter_band(&img, window).map_err(err)?;
        let d = common::max_abs_diff(got.data(), &common::median(&img, window));
        ensure(d == 0.0, format!("median instance {i}: deviation {d}"))?;
    }

    for i in 0..instances {
        let cell = 2 + rng.below(4) as usize;
        let (w, h) = (cell * (1 + rng.below(4) as usize) + rng.below(3) as usize, cell * (1 + rng.below(4) as usize));
        let (w, h) = (w.max(3), h.max(3));
        let img = if i % 2 == 0 {
            common::random_plane(&mut rng, w, h)
        } else {
            common::quantized_plane(&mut rng, w, h, 3)
        };
        let config = LbpConfig {
            cell,
            ..LbpConfig::default()
        };
        let codes = lbp_codes(&img, &config).map_err(err)?;
        ensure(codes == common::lbp_codes(&img), format!("LBP codes differ on instance {i}"))?;
        let hist = extract_lbp(&img, &config).map_err(err)?;
        let d = common::max_abs_diff(&hist.vectors[0], &common::lbp_histograms(&img, cell));
        ensure(d <= 1e-6, format!("LBP histogram instance {i}: deviation {d}"))?;
        worst = worst.max(d);
    }
    for code in 0..=255u8 {
        ensure(
            hsi_core::descriptors::uniform_label(code) == common::uniform_label(code),
            format!("uniform label of {code}"),
        )?;
    }

    for i in 0..instances {
        let cell = [4, 8][i % 2];
        let (w, h) = (2 * cell + rng.below(30) as usize, 2 * cell + rng.below(30) as usize);
        let img = common::random_plane(&mut rng, w, h);
        let config = HogConfig {
            cell,
            ..HogConfig::default()
        };
        let got = extract_hog(&img, &config).map_err(err)?;
        let d = common::max_abs_diff(&got.vectors[0], &common::hog(&img, cell));
        ensure(d <= 1e-6, format!("HOG instance {i}: deviation {d}"))?;
        worst = worst.max(d);
    }

    for i in 0..instances {
        let bin = 2 + rng.below(3) as usize;
        let step = 2 + rng.below(7) as usize;
        let (w, h) = (4 * bin + rng.below(20) as usize, 4 * bin + rng.below(20) as usize);
        let img = common::random_plane(&mut rng, w, h);
        let config = SiftConfig {
            bin_size: bin,
            step,
            ..SiftConfig::default()
        };
        let got = extract_dsift(&img, &config).map_err(err)?;
        let want = common::dsift(&img, bin, step);
        ensure(got.vectors.len() == want.len(), format!("SIFT instance {i}: site count"))?;
        for (a, b) in got.vectors.iter().zip(&want) {
            let d = common::max_abs_diff(a, b);
            ensure(d <= 1e-6, format!("SIFT instance {i}: deviation {d}"))?;
            worst = worst.max(d);
        }
    }

    for i in 0..instances {
        let k = 1 + rng.below(2) as usize;
        let dim = 1 + rng.below(3) as usize;
        let n = 1 + rng.below(8) as usize;
        let raw: Vec<f64> = (0..k).map(|_| 0.2 + rng.next_f64()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let means: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let vars: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| rng.uniform(0.2, 1.5)).collect()).collect();
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.uniform(-1.5, 1.5)).collect()).collect();
        let gmm = GmmModel {
            k,
            dim,
            weights: weights.clone(),
            means: means.concat(),
            variances: vars.concat(),
            variance_floor: 1e-4,
        };
        let got = fisher_encode(&x, &gmm).map_err(err)?;
        let d = common::max_abs_diff(&got.values, &common::fisher(&x, &weights, &means, &vars));
        ensure(d <= 1e-6, format!("Fisher instance {i}: deviation {d}"))?;
        worst = worst.max(d);
    }

    for i in 0..10 * instances {
        let classes = 2 + rng.below(4) as usize;
        let n = 1 + rng.below(9) as usize;
        let votes: Vec<(usize, f64)> = (0..n)
            .map(|_| (rng.below(classes as u64) as usize, rng.below(5) as f64 / 4.0))
            .collect();
        let v: Vec<Vote> = votes.iter().map(|&(class, margin)| Vote { class, margin }).collect();
        ensure(
            tally_votes(&v, classes).map_err(err)? == common::tally(&votes, classes),
            format!("tally instance {i}"),
        )?;
    }

    within_budget(
        start.elapsed(),
        60,
        format!("{instances} instances per oracle, max deviation {worst:.2e}"),
    )
}

fn dimension_contracts() -> Check {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xacce_0002);
    let img = common::random_plane(&mut rng, 263, 263);
    let hog = extract_hog(&img, &HogConfig::default()).map_err(err)?;
    let lbp = extract_lbp(&img, &LbpConfig::default()).map_err(err)?;
    let sift = extract_dsift(&img, &SiftConfig::default()).map_err(err)?;
    let gmm = fit_gmm(
        &sift.vectors,
        &EmConfig {
            max_iters: 5,
            ..EmConfig::default()
        },
    )
    .map_err(err)?
    .model;
    let fv = fisher_encode(&sift.vectors, &gmm).map_err(err)?;
    let got = (hog.dim(), lbp.dim(), sift.vectors.len(), sift.dim(), fv.values.len());
    ensure(
        got == (34596, 60416, 961, 128, 25600),
        format!("lengths (HOG, LBP, SIFT sites, SIFT dim, FV) = {got:?}"),
    )?;
    within_budget(
        start.elapsed(),
        60,
        "HOG 34596, LBP 60416, DSIFT 961x128, FV 25600".into(),
    )
}

fn optimisation_checks() -> Check {
    let mut rng = SplitMix64::new(0xacce_0003);
    let mut worst_drop = 0.0f64;
    for fit_index in 0..100 {
        let dim = 1 + rng.below(4) as usize;
        let k = 1 + rng.below(5) as usize;
        let n = 40 + rng.below(160) as usize;
        let centres: Vec<Vec<f64>> = (0..3).map(|_| (0..dim).map(|_| rng.uniform(-3.0, 3.0)).collect()).collect();
        let data: Vec<Vec<f64>> = (0..n)
            .map(|i| centres[i % 3].iter().map(|c| c + rng.normal() * 0.7).collect())
            .collect();
        let fit = fit_gmm(
            &data,
            &EmConfig {
                k,
                seed: fit_index,
                ..EmConfig::default()
            },
        )
        .map_err(err)?;
        for w in fit.log_likelihoods.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    ensure(worst_drop <= 1e-8, format!("EM log-likelihood dropped by {worst_drop:.3e}"))?;

    let mut converged = 0;
    let mut worst_gap = 0.0f64;
    for trial in 0..50 {
        let n = 10 + rng.below(40) as usize;
        let dim = 1 + rng.below(10) as usize;
        let c = [0.1, 1.0, 10.0][trial % 3];
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.normal()).collect()).collect();
        let mut y: Vec<i8> = x.iter().map(|v| if v[0] + 0.3 * rng.normal() > 0.0 { 1 } else { -1 }).collect();
        y[0] = 1;
        y[1] = -1;
        let config = SvmTrainConfig {
            c,
            shuffle_seed: trial as u64,
            ..SvmTrainConfig::default()
        };
        let t = train_svm_detailed(&x, &y, &config).map_err(err)?;
        if !t.converged {
            continue;
        }
        converged += 1;
        let p = t.primal_objective(&x, &y, c);
        let gap = (p - t.dual_objective()) / (1.0 + p.abs());
        worst_gap = worst_gap.max(gap);
    }
    ensure(converged > 0, "no SVM run converged")?;
    ensure(worst_gap < 1e-2, format!("relative duality gap {worst_gap:.3e}"))?;

    let two = train_svm_detailed(&[vec![1.0], vec![-1.0]], &[1, -1], &SvmTrainConfig::default()).map_err(err)?;
    let (w, b) = (two.svm.weights[0], two.svm.bias);
    ensure(
        (w - 1.0).abs() <= 1e-2 && b.abs() <= 1e-2,
        format!("two-point QP gave w={w}, b={b}; expected 1, 0"),
    )?;
    let two = train_svm_detailed(&[vec![2.0, 0.0], vec![0.0, 0.0]], &[1, -1], &SvmTrainConfig::default())
        .map_err(err)?;
    let s = &two.svm;
    ensure(
        (s.weights[0] - 1.0).abs() <= 1e-2 && s.weights[1].abs() <= 1e-2 && (s.bias + 1.0).abs() <= 1e-2,
        format!("two-point QP gave w={:?}, b={}; expected [1, 0], -1", s.weights, s.bias),
    )?;
    Ok(format!(
        "EM worst drop {worst_drop:.1e} over 100 fits; {converged}/50 SVMs converged, worst gap {worst_gap:.1e}; two-point QPs recovered"
    ))
}

fn synthetic_pipeline() -> PipelineConfig {
    PipelineConfig {
        preprocess: PreprocessConfig {
            target_size: 64,
            ..PreprocessConfig::default()
        },
        ..PipelineConfig::default()
    }
}

fn end_to_end(root: &Path) -> Check {
    let start = Instant::now();
    let spec = SyntheticSpec {
        spectral_contrast: 1.0,
        spatial_contrast: 1.0,
        noise_sigma: 0.0,
        seed: 4,
        ..SyntheticSpec::new(10, 4, (64, 64, 16))
    };
    let manifest = generate_synthetic(&spec, root.join("c4")).map_err(err)?;
    let experiment = Experiment::new(&manifest, &ProtocolConfig::default(), &synthetic_pipeline()).map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for method in Method::ALL {
        let r = experiment.run(method, Representation::AllBands).map_err(err)?;
        ok &= r.accuracies.len() == 5 && r.mean_accuracy == 1.0;
        parts.push(format!("{} {:.3}", method.label(), r.mean_accuracy));
    }
    let detail = parts.join(", ");
    ensure(ok, format!("mean accuracies {detail}"))?;
    within_budget(start.elapsed(), 300, format!("mean accuracies {detail}"))
}

fn metameric_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        spectral_contrast: 1.0,
        spatial_contrast: 0.0,
        noise_sigma: 0.01,
        seed,
        spectral_mode: SpectralMode::Metameric,
        ..SyntheticSpec::new(10, 3, (64, 64, 16))
    }
}

fn trend(root: &Path) -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in 0..5u64 {
        let manifest = generate_synthetic(&metameric_spec(100 + seed), root.join(format!("c5_{seed}"))).map_err(err)?;
        let protocol = ProtocolConfig {
            seed,
            ..ProtocolConfig::default()
        };
        let reports = compare_hsi_vs_rgb(&manifest, &[Method::DsiftFv], &protocol, &synthetic_pipeline()).map_err(err)?;
        let (hsi, rgb) = (reports[0].mean_accuracy, reports[1].mean_accuracy);
        ok &= hsi - rgb >= 0.15;
        parts.push(format!("seed {seed}: {hsi:.3} vs {rgb:.3}"));
    }
    let detail = format!("all-bands vs RGB DSIFT-FV, {}", parts.join("; "));
    ensure(ok, detail.clone())?;
    within_budget(start.elapsed(), 600, detail)
}

fn reproducibility(root: &Path) -> Check {
    let spec = SyntheticSpec {
        noise_sigma: 0.02,
        seed: 6,
        ..SyntheticSpec::new(6, 3, (48, 48, 8))
    };
    let run = |dir: &str| -> Result<Vec<u8>, String> {
        let manifest = generate_synthetic(&spec, root.join(dir)).map_err(err)?;
        let reports = compare_hsi_vs_rgb(
            &manifest,
            &Method::ALL,
            &ProtocolConfig::default(),
            &PipelineConfig {
                preprocess: PreprocessConfig {
                    target_size: 48,
                    ..PreprocessConfig::default()
                },
                ..PipelineConfig::default()
            },
        )
        .map_err(err)?;
        let set = ReportSet { reports };
        let path = root.join(format!("{dir}.json"));
        set.save(&path).map_err(err)?;
        std::fs::read(&path).map_err(err)
    };
    let (a, b) = (run("c6_a")?, run("c6_b")?);
    ensure(a == b, "report JSON differs between identical runs")?;
    Ok(format!("two runs, {} identical report bytes", a.len()))
}

fn colorimetry() -> Check {
    let response = SpectralResponse::default_response();
    let mut worst_xy = 0.0f64;
    for &(lo, hi, bands) in &[(400.0, 720.0, 33usize), (420.0, 700.0, 15), (390.0, 780.0, 40)] {
        let wl: Vec<f64> = (0..bands).map(|i| lo + (hi - lo) * i as f64 / (bands - 1) as f64).collect();
        let flat = HyperspectralCube::new(1, 1, wl, vec![1.0; bands]).map_err(err)?;
        let xyz = hsi_to_xyz(&flat, &response).map_err(err)?[0];
        let (x, y) = chromaticity(xyz);
        let (ox, oy) = common::flat_white_chromaticity(lo, hi);
        worst_xy = worst_xy.max((x - ox).abs()).max((y - oy).abs());
    }
    ensure(worst_xy <= 0.01, format!("white point off by {worst_xy:.4}"))?;

    let mut rng = SplitMix64::new(0xacce_0007);
    let mut worst_lin = 0.0f64;
    let wl: Vec<f64> = (0..33).map(|i| 400.0 + 10.0 * i as f64).collect();
    for _ in 0..20 {
        // Values on a 1/256 grid keep a*X + b*Y exact in float32.
        let mut grid = |n: usize| -> Vec<f32> { (0..n).map(|_| rng.below(256) as f32 / 256.0).collect() };
        let (x, y) = (grid(4 * 4 * 33), grid(4 * 4 * 33));
        let (a, b) = (2.0f32, 0.5f32);
        let combo: Vec<f32> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let cube = |d: Vec<f32>| HyperspectralCube::new(4, 4, wl.clone(), d).map_err(err);
        let fx = hsi_to_rgb_unclamped(&cube(x)?, &response).map_err(err)?;
        let fy = hsi_to_rgb_unclamped(&cube(y)?, &response).map_err(err)?;
        let fc = hsi_to_rgb_unclamped(&cube(combo)?, &response).map_err(err)?;
        for i in 0..fc.len() {
            for c in 0..3 {
                let want = a as f64 * fx[i][c] + b as f64 * fy[i][c];
                worst_lin = worst_lin.max((fc[i][c] - want).abs());
            }
        }
    }
    ensure(worst_lin <= 1e-9, format!("linearity deviation {worst_lin:.3e}"))?;
    Ok(format!("white point within {worst_xy:.1e}, linearity within {worst_lin:.1e}"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let root = dir.path();
    let criteria: Vec<Criterion> = vec![
        (1, "oracle equivalence", Box::new(oracle_equivalence)),
        (2, "dimension contracts", Box::new(dimension_contracts)),
        (3, "optimisation checks", Box::new(optimisation_checks)),
        (4, "end-to-end synthetic", Box::new(|| end_to_end(root))),
        (5, "HSI over RGB trend", Box::new(|| trend(root))),
        (6, "reproducibility", Box::new(|| reproducibility(root))),
        (7, "colorimetry", Box::new(colorimetry)),
    ];
    let filter: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in &criteria {
        if !filter.is_empty() && !filter.contains(id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
