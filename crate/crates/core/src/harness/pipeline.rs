use super::{Method, Representation};
use crate::colorimetry::{hsi_to_rgb, SpectralResponse};
use crate::cube::HyperspectralCube;
use crate::descriptors::{extract_cube, DescriptorConfigs};
use crate::encoding::{fisher_encode, l2_normalize, power_normalize, GmmModel};
use crate::error::{Error, Result};
use crate::preprocess::{exclude_bands, filter_and_resize, PreprocessConfig};

/// Raw descriptors of one sample: `per_band[b]` is band `b`'s vector list
/// (a single vector for HOG and LBP, one per grid site for dense SIFT).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDescriptors {
    pub per_band: Vec<Vec<Vec<f64>>>,
}

/// Band exclusion, optional RGB synthesis, then median filter and resize.
/// RGB synthesis sees the full-resolution retained bands.
pub fn prepare_cube(
    cube: &HyperspectralCube,
    preprocess: &PreprocessConfig,
    representation: Representation,
    response: &SpectralResponse,
) -> Result<HyperspectralCube> {
    preprocess.validate(cube.bands())?;
    let kept = exclude_bands(cube, preprocess.drop_first, preprocess.drop_last)?;
    let base = match representation {
        Representation::AllBands => kept,
        Representation::Rgb => hsi_to_rgb(&kept, response)?,
    };
    filter_and_resize(&base, preprocess)
}

pub fn extract_sample(cube: &HyperspectralCube, method: Method, configs: &DescriptorConfigs) -> Result<SampleDescriptors> {
    let sets = extract_cube(method.descriptor(), cube, configs)?;
    Ok(SampleDescriptors {
        per_band: sets.into_iter().map(|s| s.vectors).collect(),
    })
}

/// One L2-normalised feature vector per band. Dense SIFT descriptors are
/// Fisher-encoded against `gmm` first (optionally power-normalised).
pub fn encode_sample(
    descriptors: &SampleDescriptors,
    method: Method,
    gmm: Option<&GmmModel>,
    power_norm: bool,
) -> Result<Vec<Vec<f64>>> {
    descriptors
        .per_band
        .iter()
        .map(|band| match method {
            Method::Hog | Method::Lbp => {
                let v = band
                    .first()
                    .ok_or_else(|| Error::InsufficientData("band has no descriptor".into()))?;
                l2_normalize(v)
            }
            Method::DsiftFv => {
                let gmm = gmm.ok_or_else(|| Error::Config("Fisher encoding needs a GMM".into()))?;
                let mut fv = fisher_encode(band, gmm)?.values;
                if power_norm {
                    power_normalize(&mut fv);
                }
                l2_normalize(&fv)
            }
        })
        .collect()
}
