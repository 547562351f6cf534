//! Image degradation transforms and the 1/2/3-transform subset protocol.

mod plan;
mod registry;
mod transforms;

pub use plan::{
    apply_assignment, plan_augmentation, run_plan, Assignment, AugmentPlan, OutputRecord,
    PlanOptions, TransformStep, PLAN_SCHEMA_VERSION,
};
pub use registry::{lookup, registry, Category, ParamRange, TransformSpec, REGISTRY_SCHEMA_VERSION};

use std::collections::BTreeMap;
use std::path::PathBuf;

use image::RgbImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("unknown transform {0:?}")]
    UnknownTransform(String),
    #[error("{transform}: missing parameter {param:?}")]
    MissingParam { transform: String, param: String },
    #[error("{transform}: unknown parameter {param:?}")]
    UnknownParam { transform: String, param: String },
    #[error("{transform}: parameter {param} = {value} out of range")]
    ParamOutOfRange {
        transform: String,
        param: String,
        value: f64,
    },
    #[error("image has zero width or height")]
    EmptyImage,
    #[error("{n} images do not split into three equal subsets (remainder {remainder})")]
    NotDivisibleByThree { n: usize, remainder: usize },
    #[error("duplicate image id {0:?}")]
    DuplicateId(String),
    #[error("malformed plan: {0}")]
    Plan(String),
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Checks `params` against the registry entry for `name`.
pub fn validate_params(name: &str, params: &BTreeMap<String, f64>) -> Result<(), AugmentError> {
    let spec = lookup(name).ok_or_else(|| AugmentError::UnknownTransform(name.to_string()))?;
    for range in &spec.params {
        let value = *params.get(&range.name).ok_or_else(|| AugmentError::MissingParam {
            transform: name.to_string(),
            param: range.name.clone(),
        })?;
        if !range.accepts(value) {
            return Err(AugmentError::ParamOutOfRange {
                transform: name.to_string(),
                param: range.name.clone(),
                value,
            });
        }
    }
    if let Some(extra) = params.keys().find(|k| !spec.params.iter().any(|r| &r.name == *k)) {
        return Err(AugmentError::UnknownParam {
            transform: name.to_string(),
            param: extra.clone(),
        });
    }
    Ok(())
}

/// Applies one transform. The output depends only on the image, the name,
/// the parameters and the seed. All transforms keep the image size.
pub fn apply_transform(
    img: &RgbImage,
    name: &str,
    params: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<RgbImage, AugmentError> {
    if img.width() == 0 || img.height() == 0 {
        return Err(AugmentError::EmptyImage);
    }
    validate_params(name, params)?;
    let f = transforms::lookup_fn(name).ok_or_else(|| AugmentError::UnknownTransform(name.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(f(img, params, &mut rng))
}
