use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hsi_core::classify::train_band_ensemble;
use hsi_core::colorimetry::{hsi_to_rgb, srgb_gamma};
use hsi_core::cube::{generate_synthetic, load_cube, write_cube};
use hsi_core::descriptors::{extract_cube, DescriptorConfigs};
use hsi_core::encoding::fit_gmm;
use hsi_core::features::{FeatureFile, FeatureKind};
use hsi_core::harness::{compare_hsi_vs_rgb, render_table, Experiment, ReportSet};
use hsi_core::preprocess::preprocess_cube;
use hsi_core::{
    BandEnsemble, DatasetManifest, DescriptorKind, EmConfig, GmmModel, HyperspectralCube, Method, PipelineConfig,
    PreprocessConfig, ProtocolConfig, Representation, SpectralResponse, SplitMix64, SvmTrainConfig, SyntheticSpec,
};

const FEATURE_EXT: &str = "feat";
const MODEL_GMM: &str = "gmm.model";

#[derive(Parser)]
#[command(name = "hsi", version, about = "Hyperspectral image classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop edge bands, median filter and resize a cube.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        drop_first: usize,
        #[arg(long, default_value_t = 0)]
        drop_last: usize,
        #[arg(long, default_value_t = 263)]
        target: usize,
        #[arg(long, default_value_t = 3)]
        median: usize,
    },
    /// Extract per-band descriptors from a cube into a feature file.
    Extract {
        #[arg(long)]
        method: DescriptorKind,
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fisher-encode dense SIFT descriptors against this GMM.
        #[arg(long)]
        gmm: Option<PathBuf>,
        #[arg(long)]
        power_norm: bool,
    },
    /// Fit the visual dictionary on dense SIFT feature files.
    TrainGmm {
        /// Directory of dense SIFT feature files.
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Randomly keep at most this many descriptors (0 keeps all).
        #[arg(long, default_value_t = 200_000)]
        sample_limit: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the per-band SVM ensemble.
    Train {
        /// Directory holding `<cube stem>.feat` for every manifest sample.
        #[arg(long)]
        features: PathBuf,
        /// Dataset manifest supplying the subject of each sample.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
        /// Needed for raw dense SIFT features; copied into the model.
        #[arg(long)]
        gmm: Option<PathBuf>,
        #[arg(long)]
        power_norm: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the subject of a cube.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cube: PathBuf,
        /// Preprocess the cube first, resizing to this size.
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 0)]
        drop_first: usize,
        #[arg(long, default_value_t = 0)]
        drop_last: usize,
    },
    /// Convert a hyperspectral cube to a 3-band linear RGB cube (B, G, R).
    ToRgb {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Apply the sRGB transfer curve (for viewing only).
        #[arg(long)]
        gamma: bool,
        /// Colour-matching function CSV (wavelength_nm,x_bar,y_bar,z_bar).
        #[arg(long, requires_all = ["illuminant", "sensor"])]
        cmf: Option<PathBuf>,
        #[arg(long)]
        illuminant: Option<PathBuf>,
        #[arg(long)]
        sensor: Option<PathBuf>,
    },
    /// Run the gallery/probe protocol on a dataset.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::DsiftFv)]
        method: MethodArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also run on the RGB conversion with identical splits.
        #[arg(long)]
        compare_rgb: bool,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 1)]
        gallery: usize,
        #[arg(long, default_value_t = 2)]
        probe: usize,
        #[arg(long)]
        subjects: Option<usize>,
        #[arg(long, default_value_t = 263)]
        target: usize,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
        #[arg(long)]
        power_norm: bool,
    },
    /// Render a report file.
    Report {
        #[arg(long = "in", default_value = "report.json")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hog,
    Lbp,
    DsiftFv,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Hog => vec![Method::Hog],
            MethodArg::Lbp => vec![Method::Lbp],
            MethodArg::DsiftFv => vec![Method::DsiftFv],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Synth { spec, out } => synth(&spec, &out),
        Command::Preprocess {
            input,
            out,
            drop_first,
            drop_last,
            target,
            median,
        } => {
            let config = PreprocessConfig {
                target_size: target,
                median_window: median,
                drop_first,
                drop_last,
            };
            let cube = load_cube(&input)?;
            write_cube(&preprocess_cube(&cube, &config)?, &out)?;
            Ok(())
        }
        Command::Extract {
            method,
            cube,
            out,
            gmm,
            power_norm,
        } => extract(method, &cube, &out, gmm.as_deref(), power_norm),
        Command::TrainGmm {
            features,
            k,
            seed,
            max_iters,
            sample_limit,
            out,
        } => train_gmm(&features, k, seed, max_iters, sample_limit, &out),
        Command::Train {
            features,
            labels,
            c,
            gmm,
            power_norm,
            out,
        } => train(&features, &labels, c, gmm.as_deref(), power_norm, &out),
        Command::Predict {
            model,
            cube,
            target,
            drop_first,
            drop_last,
        } => predict(&model, &cube, target, drop_first, drop_last),
        Command::ToRgb {
            cube,
            out,
            gamma,
            cmf,
            illuminant,
            sensor,
        } => {
            let response = match (cmf, illuminant, sensor) {
                (Some(c), Some(i), Some(s)) => SpectralResponse::from_csv_files(&c, &i, &s)?,
                _ => SpectralResponse::default_response(),
            };
            let mut rgb = hsi_to_rgb(&load_cube(&cube)?, &response)?;
            if gamma {
                let data = rgb.data().iter().map(|&v| srgb_gamma(v as f64) as f32).collect();
                rgb = HyperspectralCube::new(rgb.height(), rgb.width(), rgb.wavelengths().to_vec(), data)?;
            }
            write_cube(&rgb, &out)?;
            Ok(())
        }
        Command::Evaluate {
            manifest,
            method,
            seed,
            out,
            compare_rgb,
            repetitions,
            gallery,
            probe,
            subjects,
            target,
            k,
            c,
            power_norm,
        } => {
            let manifest = DatasetManifest::load(&manifest)?;
            let protocol = ProtocolConfig {
                gallery_per_subject: gallery,
                probe_per_subject: probe,
                repetitions,
                seed,
                subjects_limit: subjects,
            };
            let pipeline = PipelineConfig {
                preprocess: PreprocessConfig {
                    target_size: target,
                    ..PreprocessConfig::default()
                },
                em: EmConfig {
                    k,
                    seed,
                    ..EmConfig::default()
                },
                svm: SvmTrainConfig {
                    c,
                    ..SvmTrainConfig::default()
                },
                power_norm,
                ..PipelineConfig::default()
            };
            let methods = method.methods();
            let reports = if compare_rgb {
                compare_hsi_vs_rgb(&manifest, &methods, &protocol, &pipeline)?
            } else {
                let experiment = Experiment::new(&manifest, &protocol, &pipeline)?;
                methods
                    .iter()
                    .map(|&m| experiment.run(m, Representation::AllBands))
                    .collect::<hsi_core::Result<_>>()?
            };
            let set = ReportSet { reports };
            set.save(&out)?;
            print!("{}", render_table(&set.reports));
            Ok(())
        }
        Command::Report { input, format } => {
            let set = ReportSet::load(&input)?;
            match format {
                ReportFormat::Table => print!("{}", render_table(&set.reports)),
                ReportFormat::Json => print!("{}", set.to_json()?),
            }
            Ok(())
        }
    }
}

fn synth(spec_path: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let spec: SyntheticSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", spec_path.display()))?;
    let manifest = generate_synthetic(&spec, out)?;
    println!(
        "wrote {} cubes for {} subjects to {}",
        manifest.samples.len(),
        manifest.subjects.len(),
        out.display()
    );
    Ok(())
}

fn extract(kind: DescriptorKind, cube: &Path, out: &Path, gmm: Option<&Path>, power_norm: bool) -> Result<()> {
    let cube = load_cube(cube)?;
    let sets = extract_cube(kind, &cube, &DescriptorConfigs::default())?;
    let mut file = FeatureFile::from_sets(sets)?;
    if let Some(path) = gmm {
        if kind != DescriptorKind::Dsift {
            bail!("--gmm only applies to dense SIFT");
        }
        file = file.fisher_encoded(&GmmModel::load(path)?, power_norm)?;
    }
    file.save(out)?;
    Ok(())
}

fn feature_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == FEATURE_EXT));
    files.sort();
    Ok(files)
}

fn train_gmm(dir: &Path, k: usize, seed: u64, max_iters: usize, sample_limit: usize, out: &Path) -> Result<()> {
    let mut data = Vec::new();
    for path in feature_files(dir)? {
        let file = FeatureFile::load(&path)?;
        if file.kind != FeatureKind::Dsift {
            bail!("{} holds {} features; the GMM needs dense SIFT", path.display(), file.kind);
        }
        data.extend(file.per_band.into_iter().flatten());
    }
    if data.is_empty() {
        bail!("no dense SIFT feature files in {}", dir.display());
    }
    if sample_limit > 0 && data.len() > sample_limit {
        let mut idx: Vec<usize> = (0..data.len()).collect();
        SplitMix64::new(seed).shuffle(&mut idx);
        idx.truncate(sample_limit);
        idx.sort_unstable();
        data = idx.into_iter().map(|i| std::mem::take(&mut data[i])).collect();
    }
    let config = EmConfig {
        k,
        max_iters,
        seed,
        ..EmConfig::default()
    };
    let fit = fit_gmm(&data, &config)?;
    log::info!(
        "fitted {k} components on {} descriptors in {} EM steps (converged: {})",
        data.len(),
        fit.log_likelihoods.len(),
        fit.converged
    );
    fit.model.save(out)?;
    Ok(())
}

fn train(dir: &Path, labels: &Path, c: f64, gmm_path: Option<&Path>, power_norm: bool, out: &Path) -> Result<()> {
    let manifest = DatasetManifest::load(labels)?;
    let gmm = gmm_path.map(GmmModel::load).transpose()?;
    let mut per_band: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut targets = Vec::with_capacity(manifest.samples.len());
    let mut kind = None;
    for sample in &manifest.samples {
        let stem = sample
            .path
            .file_stem()
            .with_context(|| format!("sample path {} has no file name", sample.path.display()))?;
        let path = dir.join(stem).with_extension(FEATURE_EXT);
        let file = FeatureFile::load(&path)?;
        if kind.is_some_and(|k| k != file.kind) {
            bail!("{} mixes feature kinds", dir.display());
        }
        kind = Some(file.kind);
        if file.kind == FeatureKind::DsiftFv && gmm.is_none() {
            bail!("Fisher-vector features need --gmm so new cubes can be encoded at prediction time");
        }
        let inputs = file.classifier_inputs(gmm.as_ref(), power_norm)?;
        if per_band.is_empty() {
            per_band = vec![Vec::new(); inputs.len()];
        }
        if inputs.len() != per_band.len() {
            bail!("{} has {} bands, expected {}", path.display(), inputs.len(), per_band.len());
        }
        for (b, v) in inputs.into_iter().enumerate() {
            per_band[b].push(v);
        }
        targets.push(manifest.subject_index(&sample.subject).expect("validated manifest"));
    }
    let kind = kind.context("manifest has no samples")?;
    let config = SvmTrainConfig {
        c,
        ..SvmTrainConfig::default()
    };
    let mut ensemble = train_band_ensemble(&per_band, &targets, manifest.subjects.clone(), &config)?;
    let uses_gmm = matches!(kind, FeatureKind::Dsift | FeatureKind::DsiftFv);
    if let (true, Some(src)) = (uses_gmm, gmm_path) {
        fs::create_dir_all(out)?;
        fs::copy(src, out.join(MODEL_GMM)).with_context(|| format!("copying {}", src.display()))?;
    }
    ensemble.provenance = json!({
        "features": kind.to_string(),
        "gmm": if uses_gmm { Some(MODEL_GMM) } else { None },
        "power_norm": power_norm,
        "descriptors": DescriptorConfigs::default(),
        "svm": config,
    });
    ensemble.save(out)?;
    println!(
        "trained {} SVMs ({} bands x {} classes) into {}",
        ensemble.svm_count(),
        ensemble.bands(),
        ensemble.classes.len(),
        out.display()
    );
    Ok(())
}

fn predict(model: &Path, cube: &Path, target: Option<usize>, drop_first: usize, drop_last: usize) -> Result<()> {
    let ensemble = BandEnsemble::load(model)?;
    let provenance = &ensemble.provenance;
    let kind: FeatureKind = provenance["features"]
        .as_str()
        .context("model provenance lacks the feature kind")?
        .parse()?;
    let configs: DescriptorConfigs = serde_json::from_value(provenance["descriptors"].clone()).unwrap_or_default();
    let power_norm = provenance["power_norm"].as_bool().unwrap_or(false);
    let gmm = match provenance["gmm"].as_str() {
        Some(name) => Some(GmmModel::load(model.join(name))?),
        None => None,
    };

    let mut cube = load_cube(cube)?;
    if let Some(target_size) = target {
        let config = PreprocessConfig {
            target_size,
            drop_first,
            drop_last,
            ..PreprocessConfig::default()
        };
        cube = preprocess_cube(&cube, &config)?;
    }
    let descriptor = match kind {
        FeatureKind::Hog => DescriptorKind::Hog,
        FeatureKind::Lbp => DescriptorKind::Lbp,
        FeatureKind::Dsift | FeatureKind::DsiftFv => DescriptorKind::Dsift,
    };
    let file = FeatureFile::from_sets(extract_cube(descriptor, &cube, &configs)?)?;
    let inputs = file.classifier_inputs(gmm.as_ref(), power_norm)?;
    let votes = ensemble.band_votes(&inputs)?;
    let winner = hsi_core::classify::tally_votes(&votes, ensemble.classes.len())?;
    let mut counts = vec![0usize; ensemble.classes.len()];
    votes.iter().for_each(|v| counts[v.class] += 1);
    println!(
        "{}\t{}/{} band votes",
        ensemble.classes[winner],
        counts[winner],
        votes.len()
    );
    Ok(())
}
