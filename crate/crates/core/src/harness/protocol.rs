use serde::{Deserialize, Serialize};

use super::ProtocolConfig;
use crate::cube::DatasetManifest;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Sample indices (into the manifest's `samples`) for one repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub gallery: Vec<usize>,
    pub probe: Vec<usize>,
}

/// One split per repetition. A single SplitMix64 stream seeded with
/// `protocol.seed` shuffles each subject's samples in turn (repetition-major,
/// then manifest subject order); the first `gallery_per_subject` shuffled
/// samples go to the gallery and the next `probe_per_subject` to the probe.
pub fn make_splits(manifest: &DatasetManifest, protocol: &ProtocolConfig) -> Result<Vec<Split>> {
    protocol.validate()?;
    let per_subject = manifest.samples_by_subject();
    let need = protocol.gallery_per_subject + protocol.probe_per_subject;
    for (s, samples) in per_subject.iter().enumerate() {
        if samples.len() < need {
            return Err(Error::Manifest(format!(
                "subject `{}` has {} samples, protocol needs {need}",
                manifest.subjects[s],
                samples.len()
            )));
        }
    }
    let mut rng = SplitMix64::new(protocol.seed);
    let splits = (0..protocol.repetitions)
        .map(|_| {
            let mut split = Split {
                gallery: Vec::new(),
                probe: Vec::new(),
            };
            for samples in &per_subject {
                let mut order = samples.clone();
                rng.shuffle(&mut order);
                split
                    .gallery
                    .extend_from_slice(&order[..protocol.gallery_per_subject]);
                split.probe.extend_from_slice(&order[protocol.gallery_per_subject..need]);
            }
            split
        })
        .collect();
    Ok(splits)
}
