use rayon::prelude::*;

use super::pipeline::{encode_sample, extract_sample, prepare_cube, SampleDescriptors};
use super::protocol::{make_splits, Split};
use super::report::ExperimentReport;
use super::{Method, PipelineConfig, ProtocolConfig, Representation};
use crate::classify::{tally_votes, train_band_ensemble};
use crate::colorimetry::SpectralResponse;
use crate::cube::{load_cube, DatasetManifest};
use crate::encoding::{fit_gmm, EmConfig, GmmModel};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A dataset bound to a protocol. Splits are fixed at construction, so every
/// method and representation run from the same `Experiment` sees the same
/// gallery/probe partitions.
#[derive(Debug, Clone)]
pub struct Experiment {
    manifest: DatasetManifest,
    protocol: ProtocolConfig,
    pipeline: PipelineConfig,
    response: SpectralResponse,
    splits: Vec<Split>,
}

impl Experiment {
    pub fn new(manifest: &DatasetManifest, protocol: &ProtocolConfig, pipeline: &PipelineConfig) -> Result<Self> {
        protocol.validate()?;
        let manifest = match protocol.subjects_limit {
            Some(n) => manifest.limit_subjects(n),
            None => manifest.clone(),
        };
        manifest.validate()?;
        if manifest.subjects.len() < 2 {
            return Err(Error::Manifest("need at least two subjects".into()));
        }
        let mut pipeline = *pipeline;
        pipeline.preprocess.drop_first = manifest.band_exclusion.drop_first;
        pipeline.preprocess.drop_last = manifest.band_exclusion.drop_last;
        let splits = make_splits(&manifest, protocol)?;
        Ok(Self {
            manifest,
            protocol: *protocol,
            pipeline,
            response: SpectralResponse::default_response(),
            splits,
        })
    }

    pub fn with_response(mut self, response: SpectralResponse) -> Self {
        self.response = response;
        self
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    fn descriptors(&self, method: Method, representation: Representation) -> Result<Vec<SampleDescriptors>> {
        (0..self.manifest.samples.len())
            .into_par_iter()
            .map(|i| {
                let cube = load_cube(self.manifest.sample_path(i))?;
                let cube = prepare_cube(&cube, &self.pipeline.preprocess, representation, &self.response)?;
                extract_sample(&cube, method, &self.pipeline.descriptors)
            })
            .collect()
    }

    fn fit_dictionary(&self, descriptors: &[SampleDescriptors], gallery: &[usize], rep: usize) -> Result<GmmModel> {
        let mut pool: Vec<&Vec<f64>> = gallery
            .iter()
            .flat_map(|&i| descriptors[i].per_band.iter().flatten())
            .collect();
        let limit = self.pipeline.gmm_sample_limit;
        if limit > 0 && pool.len() > limit {
            let mut rng = SplitMix64::derive(self.protocol.seed, 0x6d6d_0000 + rep as u64);
            let mut idx: Vec<usize> = (0..pool.len()).collect();
            rng.shuffle(&mut idx);
            idx.truncate(limit);
            idx.sort_unstable();
            pool = idx.into_iter().map(|i| pool[i]).collect();
        }
        let data: Vec<Vec<f64>> = pool.into_iter().cloned().collect();
        let config = EmConfig {
            seed: SplitMix64::derive(self.pipeline.em.seed, rep as u64).next_u64(),
            ..self.pipeline.em
        };
        let fit = fit_gmm(&data, &config)?;
        log::info!(
            "repetition {rep}: GMM on {} descriptors, {} EM steps, converged {}",
            data.len(),
            fit.log_likelihoods.len(),
            fit.converged
        );
        Ok(fit.model)
    }

    pub fn run(&self, method: Method, representation: Representation) -> Result<ExperimentReport> {
        log::info!("{method} / {representation}: extracting descriptors");
        let descriptors = self.descriptors(method, representation)?;
        let bands = descriptors.first().map_or(0, |d| d.per_band.len());
        if descriptors.iter().any(|d| d.per_band.len() != bands) {
            return Err(Error::DimensionMismatch {
                expected: bands,
                found: descriptors
                    .iter()
                    .map(|d| d.per_band.len())
                    .find(|&b| b != bands)
                    .unwrap_or(0),
            });
        }
        let label = |i: usize| {
            self.manifest
                .subject_index(&self.manifest.samples[i].subject)
                .expect("validated manifest")
        };

        let mut accuracies = Vec::with_capacity(self.splits.len());
        let mut band_correct = vec![0usize; bands];
        let mut band_total = 0usize;
        for (rep, split) in self.splits.iter().enumerate() {
            let gmm = match method {
                Method::DsiftFv => Some(self.fit_dictionary(&descriptors, &split.gallery, rep)?),
                _ => None,
            };
            let encode = |i: usize| encode_sample(&descriptors[i], method, gmm.as_ref(), self.pipeline.power_norm);

            let gallery: Vec<Vec<Vec<f64>>> = split.gallery.par_iter().map(|&i| encode(i)).collect::<Result<_>>()?;
            let per_band: Vec<Vec<Vec<f64>>> = (0..bands)
                .map(|b| gallery.iter().map(|f| f[b].clone()).collect())
                .collect();
            let labels: Vec<usize> = split.gallery.iter().map(|&i| label(i)).collect();
            let ensemble = train_band_ensemble(&per_band, &labels, self.manifest.subjects.clone(), &self.pipeline.svm)?;

            let outcomes: Vec<(bool, Vec<bool>)> = split
                .probe
                .par_iter()
                .map(|&i| {
                    let truth = label(i);
                    let votes = ensemble.band_votes(&encode(i)?)?;
                    let fused = tally_votes(&votes, ensemble.classes.len())?;
                    Ok((fused == truth, votes.iter().map(|v| v.class == truth).collect()))
                })
                .collect::<Result<_>>()?;
            let correct = outcomes.iter().filter(|(ok, _)| *ok).count();
            for (_, per) in &outcomes {
                for (b, ok) in per.iter().enumerate() {
                    band_correct[b] += usize::from(*ok);
                }
            }
            band_total += outcomes.len();
            let acc = correct as f64 / split.probe.len() as f64;
            log::info!("{method} / {representation}: repetition {rep} accuracy {acc:.4}");
            accuracies.push(acc);
        }

        let per_band_accuracy = band_correct
            .iter()
            .map(|&c| c as f64 / band_total.max(1) as f64)
            .collect();
        Ok(ExperimentReport::new(
            method,
            representation,
            self.manifest.subjects.len(),
            bands,
            self.protocol,
            self.pipeline,
            self.splits.clone(),
            accuracies,
            per_band_accuracy,
        ))
    }
}

/// All-bands run of one method.
pub fn run_experiment(
    manifest: &DatasetManifest,
    method: Method,
    protocol: &ProtocolConfig,
    pipeline: &PipelineConfig,
) -> Result<ExperimentReport> {
    Experiment::new(manifest, protocol, pipeline)?.run(method, Representation::AllBands)
}

/// All-bands and RGB runs of each method over identical splits; reports are
/// ordered all-bands first, then RGB, methods in the given order.
pub fn compare_hsi_vs_rgb(
    manifest: &DatasetManifest,
    methods: &[Method],
    protocol: &ProtocolConfig,
    pipeline: &PipelineConfig,
) -> Result<Vec<ExperimentReport>> {
    let experiment = Experiment::new(manifest, protocol, pipeline)?;
    let mut reports = Vec::with_capacity(2 * methods.len());
    for representation in [Representation::AllBands, Representation::Rgb] {
        for &method in methods {
            reports.push(experiment.run(method, representation)?);
        }
    }
    Ok(reports)
}
