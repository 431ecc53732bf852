use std::path::Path;
use std::process::{Command, Output};

fn hsi(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_hsi"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run hsi");
    assert!(
        out.status.success(),
        "hsi {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, subjects: usize, size: usize, bands: usize) -> std::path::PathBuf {
    let spec = dir.join("spec.json");
    std::fs::write(
        &spec,
        format!(
            r#"{{"n_subjects": {subjects}, "samples_per_subject": 3, "height": {size}, "width": {size},
                "bands": {bands}, "spectral_contrast": 1.0, "spatial_contrast": 1.0,
                "noise_sigma": 0.0, "seed": 3}}"#
        ),
    )
    .unwrap();
    let data = dir.join("data");
    hsi(&["synth", "--spec", p(&spec), "--out", p(&data)]);
    data
}

#[test]
fn dsift_fisher_train_predict_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 3, 32, 4);
    let manifest = data.join("manifest.json");
    assert!(manifest.exists());

    let feats = tmp.path().join("feats");
    std::fs::create_dir_all(&feats).unwrap();
    for s in 0..3 {
        for k in 0..3 {
            let cube = data.join(format!("s{s:03}_{k}.hdr"));
            let out = feats.join(format!("s{s:03}_{k}.feat"));
            hsi(&["extract", "--method", "dsift", "--cube", p(&cube), "--out", p(&out)]);
        }
    }
    let gmm = tmp.path().join("gmm.model");
    hsi(&["train-gmm", "--features", p(&feats), "--k", "4", "--seed", "1", "--out", p(&gmm)]);
    let model = tmp.path().join("model");
    hsi(&[
        "train", "--features", p(&feats), "--labels", p(&manifest), "--c", "10", "--gmm", p(&gmm), "--out", p(&model),
    ]);
    assert!(model.join("ensemble.json").exists());
    assert!(model.join("gmm.model").exists());

    let out = hsi(&["predict", "--model", p(&model), "--cube", p(&data.join("s002_1.hdr"))]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("s002\t"), "{stdout}");
}

#[test]
fn hog_train_without_gmm() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 3, 32, 3);
    let feats = tmp.path().join("feats");
    for s in 0..3 {
        for k in 0..3 {
            let name = format!("s{s:03}_{k}");
            let out = feats.join(format!("{name}.feat"));
            hsi(&["extract", "--method", "hog", "--cube", p(&data.join(format!("{name}.hdr"))), "--out", p(&out)]);
        }
    }
    let model = tmp.path().join("model");
    hsi(&["train", "--features", p(&feats), "--labels", p(&data.join("manifest.json")), "--out", p(&model)]);
    let out = hsi(&["predict", "--model", p(&model), "--cube", p(&data.join("s001_2.hdr"))]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("s001\t"));
}

#[test]
fn preprocess_and_rgb() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 3, 24, 12);
    let cube = data.join("s000_0.hdr");
    let pre = tmp.path().join("pre.hdr");
    hsi(&[
        "preprocess", "--in", p(&cube), "--out", p(&pre), "--drop-first", "2", "--drop-last", "1", "--target", "40",
    ]);
    let header = std::fs::read_to_string(&pre).unwrap();
    assert!(header.contains("height: 40") && header.contains("bands: 9"), "{header}");
    assert_eq!(std::fs::metadata(pre.with_extension("raw")).unwrap().len(), 40 * 40 * 9 * 4);

    let rgb = tmp.path().join("rgb.hdr");
    hsi(&["to-rgb", "--cube", p(&cube), "--out", p(&rgb), "--gamma"]);
    let header = std::fs::read_to_string(&rgb).unwrap();
    assert!(header.contains("bands: 3"), "{header}");
}

#[test]
fn evaluate_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth(tmp.path(), 3, 32, 4);
    let report = tmp.path().join("report.json");
    hsi(&[
        "evaluate",
        "--manifest",
        p(&data.join("manifest.json")),
        "--method",
        "lbp",
        "--seed",
        "42",
        "--repetitions",
        "2",
        "--target",
        "32",
        "--compare-rgb",
        "--out",
        p(&report),
    ]);
    let out = hsi(&["report", "--in", p(&report), "--format", "table"]);
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3, "{table}");
    assert!(lines[0].contains("LBP"));
    assert!(lines[1].starts_with("all-bands") && lines[2].starts_with("rgb"));
}

#[test]
fn bad_arguments_fail() {
    let out = Command::new(env!("CARGO_BIN_EXE_hsi"))
        .args(["extract", "--method", "sift", "--cube", "x.hdr", "--out", "y.feat"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_hsi"))
        .args(["preprocess", "--in", "/nonexistent.hdr", "--out", "/tmp/never.hdr"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
