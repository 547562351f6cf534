use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_transform, registry, AugmentError};
use crate::derive_seed;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformStep {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

/// Transforms for one image, applied in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub image_id: String,
    /// 1, 2 or 3: also the number of steps.
    pub subset: u8,
    pub seed: u64,
    pub steps: Vec<TransformStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PlanHeader {
    schema_version: u32,
    seed: u64,
    subset_sizes: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentPlan {
    pub seed: u64,
    pub subset_sizes: [usize; 3],
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlanOptions {
    /// Accept a count not divisible by three; the last subset takes the
    /// extra one or two images.
    pub allow_remainder: bool,
}

/// Partitions `image_ids` into three subsets at random and gives each image
/// 1, 2 or 3 distinct transforms with sampled parameters.
///
/// The plan depends on the id set and `seed` only, not on input order.
pub fn plan_augmentation(
    image_ids: &[String],
    seed: u64,
    opts: PlanOptions,
) -> Result<AugmentPlan, AugmentError> {
    let mut ids: Vec<&String> = image_ids.iter().collect();
    ids.sort();
    if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(AugmentError::DuplicateId(dup[0].clone()));
    }
    let n = ids.len();
    let third = n / 3;
    if !n.is_multiple_of(3) && !opts.allow_remainder {
        return Err(AugmentError::NotDivisibleByThree {
            n,
            remainder: n % 3,
        });
    }
    let subset_sizes = [third, third, n - 2 * third];
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let specs = registry();
    let mut assignments = Vec::with_capacity(n);
    for (pos, id) in ids.into_iter().enumerate() {
        let subset = if pos < third {
            1
        } else if pos < 2 * third {
            2
        } else {
            3
        };
        let a_seed = derive_seed(seed, id);
        let mut rng = ChaCha8Rng::seed_from_u64(a_seed);
        let mut order: Vec<usize> = (0..specs.len()).collect();
        let (chosen, _) = order.partial_shuffle(&mut rng, subset as usize);
        let steps = chosen
            .iter()
            .map(|&i| {
                let spec = &specs[i];
                let params = spec
                    .params
                    .iter()
                    .map(|p| (p.name.clone(), rng.random_range(p.min..=p.max)))
                    .collect();
                TransformStep {
                    name: spec.name.clone(),
                    params,
                }
            })
            .collect();
        assignments.push(Assignment {
            image_id: id.clone(),
            subset,
            seed: a_seed,
            steps,
        });
    }
    Ok(AugmentPlan {
        seed,
        subset_sizes,
        assignments,
    })
}

impl AugmentPlan {
    /// A header line followed by one assignment per line.
    pub fn to_jsonl(&self) -> Result<String, AugmentError> {
        let header = PlanHeader {
            schema_version: PLAN_SCHEMA_VERSION,
            seed: self.seed,
            subset_sizes: self.subset_sizes,
        };
        let mut out = serde_json::to_string(&header)?;
        out.push('\n');
        for a in &self.assignments {
            out.push_str(&serde_json::to_string(a)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, AugmentError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: PlanHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| AugmentError::Plan("empty plan file".into()))?,
        )?;
        if header.schema_version != PLAN_SCHEMA_VERSION {
            return Err(AugmentError::Plan(format!(
                "unsupported schema version {}",
                header.schema_version
            )));
        }
        let assignments = lines
            .map(serde_json::from_str)
            .collect::<Result<Vec<Assignment>, _>>()?;
        let plan = AugmentPlan {
            seed: header.seed,
            subset_sizes: header.subset_sizes,
            assignments,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Structural checks: subset sizes add up, step counts match subsets,
    /// no transform repeats within an image, every step is valid.
    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |m: String| Err(AugmentError::Plan(m));
        if self.subset_sizes.iter().sum::<usize>() != self.assignments.len() {
            return bad("subset sizes do not match assignment count".into());
        }
        let mut ids = BTreeSet::new();
        for (i, a) in self.assignments.iter().enumerate() {
            if !ids.insert(&a.image_id) {
                return Err(AugmentError::DuplicateId(a.image_id.clone()));
            }
            if !(1..=3).contains(&a.subset) || a.steps.len() != a.subset as usize {
                return bad(format!("{}: subset {} with {} steps", a.image_id, a.subset, a.steps.len()));
            }
            let before: usize = self.subset_sizes[..a.subset as usize - 1].iter().sum();
            if i < before || i >= before + self.subset_sizes[a.subset as usize - 1] {
                return bad(format!("{}: listed outside subset {}", a.image_id, a.subset));
            }
            let names: BTreeSet<&str> = a.steps.iter().map(|s| s.name.as_str()).collect();
            if names.len() != a.steps.len() {
                return bad(format!("{}: repeated transform", a.image_id));
            }
            for s in &a.steps {
                super::validate_params(&s.name, &s.params)?;
            }
        }
        Ok(())
    }
}

/// Runs an assignment's steps in order. Step `i` is seeded from the
/// assignment seed and `i`.
pub fn apply_assignment(img: &RgbImage, a: &Assignment) -> Result<RgbImage, AugmentError> {
    let mut current = img.clone();
    for (i, step) in a.steps.iter().enumerate() {
        let seed = derive_seed(a.seed, &format!("step-{i}"));
        current = apply_transform(&current, &step.name, &step.params, seed)?;
    }
    Ok(current)
}

/// One line of the output manifest written by [`run_plan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub image_id: String,
    pub subset: u8,
    pub transforms: Vec<String>,
    pub output: String,
}

/// Reads `<input_dir>/<image_id>.png` for every assignment and writes the
/// degraded image to `<output_dir>/<image_id>.png`, plus `manifest.jsonl`.
/// Originals are not copied: the output set holds augmented images only.
pub fn run_plan(
    plan: &AugmentPlan,
    input_dir: &Path,
    output_dir: &Path,
) -> Result<Vec<OutputRecord>, AugmentError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| AugmentError::Io { path, source }
    };
    fs::create_dir_all(output_dir).map_err(io(output_dir))?;
    let records = plan
        .assignments
        .par_iter()
        .map(|a| {
            let src: PathBuf = input_dir.join(format!("{}.png", a.image_id));
            let img = image::open(&src)
                .map_err(|source| AugmentError::Image {
                    path: src.clone(),
                    source,
                })?
                .to_rgb8();
            let out = apply_assignment(&img, a)?;
            let file = format!("{}.png", a.image_id);
            let dst = output_dir.join(&file);
            out.save(&dst).map_err(|source| AugmentError::Image {
                path: dst.clone(),
                source,
            })?;
            Ok(OutputRecord {
                image_id: a.image_id.clone(),
                subset: a.subset,
                transforms: a.steps.iter().map(|s| s.name.clone()).collect(),
                output: file,
            })
        })
        .collect::<Result<Vec<_>, AugmentError>>()?;
    let mut manifest = String::new();
    for r in &records {
        manifest.push_str(&serde_json::to_string(r)?);
        manifest.push('\n');
    }
    let path = output_dir.join("manifest.jsonl");
    fs::write(&path, manifest).map_err(io(&path))?;
    Ok(records)
}
