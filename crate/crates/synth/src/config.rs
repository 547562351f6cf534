//! Rendering-configuration sampler.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::SynthError;

pub const FONT_SIZES: [u8; 8] = [8, 10, 12, 14, 16, 18, 20, 22];
pub const MARGIN_CM: (f64, f64) = (1.0, 2.5);
pub const LINE_HEIGHT: (f64, f64) = (1.0, 1.6);
pub const COLUMN_SPACING_CM: (f64, f64) = (0.5, 1.2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PageSize {
    A4,
    A5,
    Letter,
    Legal,
    Tabloid,
    A3,
}

impl PageSize {
    pub const ALL: [PageSize; 6] = [
        PageSize::A4,
        PageSize::A5,
        PageSize::Letter,
        PageSize::Legal,
        PageSize::Tabloid,
        PageSize::A3,
    ];

    /// Name understood by the CSS `@page size` property.
    pub fn css_name(self) -> &'static str {
        match self {
            PageSize::A4 => "A4",
            PageSize::A5 => "A5",
            PageSize::Letter => "letter",
            PageSize::Legal => "legal",
            PageSize::Tabloid => "ledger",
            PageSize::A3 => "A3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Portrait,
    Landscape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Page {
    pub size: PageSize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shade {
    Light,
    Dark,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Color {
    pub hex: String,
    pub shade: Shade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Right,
    Left,
    Center,
}

impl Alignment {
    pub const ALL: [Alignment; 3] = [Alignment::Right, Alignment::Left, Alignment::Center];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rtl,
    Ltr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoration {
    Highlight,
    ColoredParagraph,
}

/// One point of the document configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub font: String,
    pub page: Page,
    pub background: Color,
    pub text_color: Color,
    pub alignment: Alignment,
    pub columns: u8,
    pub font_size_pt: u8,
    pub margin_cm: f64,
    pub line_height: f64,
    pub column_spacing_cm: f64,
    pub direction: Direction,
    pub decorations: BTreeSet<Decoration>,
}

impl fmt::Display for RenderConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}pt {:?} {:?} {}col {:?}",
            self.font, self.font_size_pt, self.page.size, self.alignment, self.columns, self.direction
        )
    }
}

#[derive(Debug, Deserialize)]
struct FontFile {
    schema_version: u32,
    fonts: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ShadeSet {
    pub light: Vec<String>,
    pub dark: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Palettes {
    pub schema_version: u32,
    pub background: ShadeSet,
    pub text: ShadeSet,
}

/// Logical font names shipped with the crate.
pub fn fonts() -> &'static [String] {
    static FONTS: OnceLock<Vec<String>> = OnceLock::new();
    FONTS.get_or_init(|| {
        let file: FontFile =
            serde_json::from_str(include_str!("../data/fonts.json")).expect("bundled font list");
        assert_eq!(file.schema_version, 1);
        file.fonts
    })
}

/// Background and text palettes shipped with the crate.
pub fn palettes() -> &'static Palettes {
    static PALETTES: OnceLock<Palettes> = OnceLock::new();
    PALETTES.get_or_init(|| {
        let p: Palettes =
            serde_json::from_str(include_str!("../data/palettes.json")).expect("bundled palettes");
        assert_eq!(p.schema_version, 1);
        p
    })
}

/// Probabilities the sampler draws from. Defaults follow the configuration
/// table; landscape and decoration rates are not given there and are
/// adjustable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Weights for right, left, center.
    pub alignment_weights: [f64; 3],
    /// Weights for 1, 2, 3 columns.
    pub column_weights: [f64; 3],
    pub light_background_p: f64,
    pub rtl_p: f64,
    pub landscape_p: f64,
    pub highlight_p: f64,
    pub colored_paragraph_p: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            alignment_weights: [0.65, 0.05, 0.30],
            column_weights: [0.75, 0.20, 0.05],
            light_background_p: 0.75,
            rtl_p: 0.95,
            landscape_p: 0.15,
            highlight_p: 0.1,
            colored_paragraph_p: 0.1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let probs = [
            ("light_background_p", self.light_background_p),
            ("rtl_p", self.rtl_p),
            ("landscape_p", self.landscape_p),
            ("highlight_p", self.highlight_p),
            ("colored_paragraph_p", self.colored_paragraph_p),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::Config(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, w) in [("alignment_weights", self.alignment_weights), ("column_weights", self.column_weights)] {
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(SynthError::Config(format!("{name} must be non-negative with a positive sum")));
            }
        }
        Ok(())
    }
}

/// Draws every field independently; the text color is drawn from the
/// shade opposite the background so text stays legible.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: SamplerConfig,
    alignment: WeightedIndex<f64>,
    columns: WeightedIndex<f64>,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig) -> Result<Self, SynthError> {
        cfg.validate()?;
        let alignment = WeightedIndex::new(cfg.alignment_weights)
            .map_err(|e| SynthError::Config(e.to_string()))?;
        let columns =
            WeightedIndex::new(cfg.column_weights).map_err(|e| SynthError::Config(e.to_string()))?;
        Ok(Self {
            cfg,
            alignment,
            columns,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn sample(&self, seed: u64) -> RenderConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> RenderConfig {
        let pick = |rng: &mut R, items: &[String]| items[rng.random_range(0..items.len())].clone();
        let pal = palettes();

        let font = pick(rng, fonts());
        let size = PageSize::ALL[rng.random_range(0..PageSize::ALL.len())];
        let orientation = if rng.random_bool(self.cfg.landscape_p) {
            Orientation::Landscape
        } else {
            Orientation::Portrait
        };
        let light_bg = rng.random_bool(self.cfg.light_background_p);
        let (background, text_color) = if light_bg {
            (
                Color { hex: pick(rng, &pal.background.light), shade: Shade::Light },
                Color { hex: pick(rng, &pal.text.dark), shade: Shade::Dark },
            )
        } else {
            (
                Color { hex: pick(rng, &pal.background.dark), shade: Shade::Dark },
                Color { hex: pick(rng, &pal.text.light), shade: Shade::Light },
            )
        };
        let alignment = Alignment::ALL[self.alignment.sample(rng)];
        let columns = 1 + self.columns.sample(rng) as u8;
        let font_size_pt = FONT_SIZES[rng.random_range(0..FONT_SIZES.len())];
        let uniform = |rng: &mut R, (lo, hi): (f64, f64)| {
            Uniform::new_inclusive(lo, hi).expect("static range").sample(rng)
        };
        let margin_cm = uniform(rng, MARGIN_CM);
        let line_height = uniform(rng, LINE_HEIGHT);
        let column_spacing_cm = uniform(rng, COLUMN_SPACING_CM);
        let direction = if rng.random_bool(self.cfg.rtl_p) {
            Direction::Rtl
        } else {
            Direction::Ltr
        };
        let mut decorations = BTreeSet::new();
        if rng.random_bool(self.cfg.highlight_p) {
            decorations.insert(Decoration::Highlight);
        }
        if rng.random_bool(self.cfg.colored_paragraph_p) {
            decorations.insert(Decoration::ColoredParagraph);
        }
        RenderConfig {
            font,
            page: Page { size, orientation },
            background,
            text_color,
            alignment,
            columns,
            font_size_pt,
            margin_cm,
            line_height,
            column_spacing_cm,
            direction,
            decorations,
        }
    }
}

impl Default for Sampler {
    fn default() -> Self {
        Self::new(SamplerConfig::default()).expect("default sampler config is valid")
    }
}

/// Samples with the default distribution.
pub fn sample_render_config(seed: u64) -> RenderConfig {
    static DEFAULT: OnceLock<Sampler> = OnceLock::new();
    DEFAULT.get_or_init(Sampler::default).sample(seed)
}

impl RenderConfig {
    /// Checks every field against its domain and the palette data.
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        let pal = palettes();
        if !fonts().contains(&self.font) {
            return bad(format!("unknown font {:?}", self.font));
        }
        let in_set = |c: &Color, set: &ShadeSet| match c.shade {
            Shade::Light => set.light.contains(&c.hex),
            Shade::Dark => set.dark.contains(&c.hex),
        };
        if !in_set(&self.background, &pal.background) || !in_set(&self.text_color, &pal.text) {
            return bad("color not in palette".into());
        }
        if self.background.shade == self.text_color.shade {
            return bad("text and background share a shade".into());
        }
        if !(1..=3).contains(&self.columns) {
            return bad(format!("{} columns", self.columns));
        }
        if !FONT_SIZES.contains(&self.font_size_pt) {
            return bad(format!("font size {}", self.font_size_pt));
        }
        for (name, v, (lo, hi)) in [
            ("margin_cm", self.margin_cm, MARGIN_CM),
            ("line_height", self.line_height, LINE_HEIGHT),
            ("column_spacing_cm", self.column_spacing_cm, COLUMN_SPACING_CM),
        ] {
            if !(lo..=hi).contains(&v) {
                return bad(format!("{name} = {v} outside [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}
