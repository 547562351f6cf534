use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    PrePrint,
    Mechanical,
    HumanMarks,
    Aging,
    DigitalNoise,
    Geometric,
    Lighting,
    Blur,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::PrePrint,
        Category::Mechanical,
        Category::HumanMarks,
        Category::Aging,
        Category::DigitalNoise,
        Category::Geometric,
        Category::Lighting,
        Category::Blur,
    ];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("category serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

/// Sampling range of one parameter. `identity`, when present, is the value
/// at which the transform leaves the image unchanged; it may lie outside
/// the sampling range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
}

impl ParamRange {
    /// Whether `v` is a value `apply_transform` accepts.
    pub fn accepts(&self, v: f64) -> bool {
        let lo = self.identity.map_or(self.min, |i| i.min(self.min));
        let hi = self.identity.map_or(self.max, |i| i.max(self.max));
        v.is_finite() && (lo..=hi).contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub name: String,
    pub category: Category,
    pub params: Vec<ParamRange>,
    /// Whether the transform draws random numbers when applied.
    pub seed_consuming: bool,
}

impl TransformSpec {
    /// Parameter values that make the transform an exact identity: the
    /// identity value where declared, the range midpoint otherwise.
    pub fn identity_params(&self) -> Vec<(String, f64)> {
        self.params
            .iter()
            .map(|p| (p.name.clone(), p.identity.unwrap_or((p.min + p.max) / 2.0)))
            .collect()
    }
}

#[derive(Debug, Deserialize)]
struct RegistryFile {
    schema_version: u32,
    transforms: Vec<TransformSpec>,
}

pub const REGISTRY_SCHEMA_VERSION: u32 = 1;

/// The 29 transforms, in registry-file order.
pub fn registry() -> &'static [TransformSpec] {
    static REGISTRY: OnceLock<Vec<TransformSpec>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let file: RegistryFile = serde_json::from_str(include_str!("../../data/transforms.json"))
            .expect("bundled transform registry");
        assert_eq!(file.schema_version, REGISTRY_SCHEMA_VERSION);
        file.transforms
    })
}

pub fn lookup(name: &str) -> Option<&'static TransformSpec> {
    registry().iter().find(|t| t.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn category_counts() {
        let counts: Vec<usize> = Category::ALL
            .iter()
            .map(|c| registry().iter().filter(|t| t.category == *c).count())
            .collect();
        assert_eq!(counts, [5, 5, 2, 3, 4, 2, 5, 3]);
        assert_eq!(registry().len(), 29);
    }

    #[test]
    fn names_unique_and_named_examples_present() {
        let names: BTreeSet<&str> = registry().iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names.len(), 29);
        for (name, cat) in [
            ("watermark", Category::PrePrint),
            ("dirty_drum", Category::Mechanical),
            ("handwritten_markup", Category::HumanMarks),
            ("folding", Category::Aging),
            ("yellowing", Category::Aging),
            ("salt_and_pepper", Category::DigitalNoise),
            ("perspective_distortion", Category::Geometric),
            ("low_light", Category::Lighting),
            ("motion_blur", Category::Blur),
        ] {
            assert_eq!(lookup(name).map(|t| t.category), Some(cat), "{name}");
        }
    }

    #[test]
    fn every_transform_has_one_identity_param() {
        for t in registry() {
            let n = t.params.iter().filter(|p| p.identity.is_some()).count();
            assert_eq!(n, 1, "{}", t.name);
            assert!(t.params.iter().all(|p| p.min <= p.max));
        }
    }

    #[test]
    fn category_display() {
        assert_eq!(Category::HumanMarks.to_string(), "human-marks");
    }
}
