//! Markdown-to-HTML render jobs: the hand-off format for an external page
//! renderer.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ardoc_core::inline::{inline_to_html, parse_inline, Inline};
use ardoc_core::{Block, Document};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{palettes, Alignment, Decoration, Direction, Orientation, RenderConfig, Sampler, Shade};
use crate::{derive_seed, SynthError};

pub const JOB_SCHEMA_VERSION: u32 = 1;

/// Share of paragraphs that receive a decoration when it is enabled.
const DECORATED_SHARE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderJob {
    pub job_id: String,
    pub seed: u64,
    pub config: RenderConfig,
    pub html: String,
}

fn escape(text: &str) -> String {
    inline_to_html(&[Inline::Text(text.to_string())])
}

fn style_block(cfg: &RenderConfig) -> String {
    let orientation = match cfg.page.orientation {
        Orientation::Portrait => "portrait",
        Orientation::Landscape => "landscape",
    };
    let align = match cfg.alignment {
        Alignment::Right => "right",
        Alignment::Left => "left",
        Alignment::Center => "center",
    };
    let dir = match cfg.direction {
        Direction::Rtl => "rtl",
        Direction::Ltr => "ltr",
    };
    let mut css = String::new();
    let _ = writeln!(
        css,
        "@page {{ size: {} {orientation}; margin: {:.2}cm; }}",
        cfg.page.size.css_name(),
        cfg.margin_cm
    );
    let _ = writeln!(
        css,
        "body {{ font-family: \"{}\"; font-size: {}pt; line-height: {:.3}; text-align: {align}; \
         direction: {dir}; color: {}; background-color: {}; column-count: {}; column-gap: {:.2}cm; }}",
        cfg.font,
        cfg.font_size_pt,
        cfg.line_height,
        cfg.text_color.hex,
        cfg.background.hex,
        cfg.columns,
        cfg.column_spacing_cm
    );
    css.push_str("table { border-collapse: collapse; }\n");
    css.push_str("td, th { border: 1px solid currentColor; padding: 0.2em 0.4em; }\n");
    css.push_str(".highlight { background-color: #FFF176; color: #000000; }\n");
    css.push_str(".page-number { text-align: center; }\n");
    css.push_str(".watermark { opacity: 0.3; }\n");
    css
}

fn paragraph_html(text: &str) -> String {
    text.split('\n')
        .map(|line| inline_to_html(&parse_inline(line)))
        .collect::<Vec<_>>()
        .join("<br/>")
}

/// Converts `doc` to a standalone HTML page styled by `cfg`.
///
/// Bold, italics, headers, rules and tables are kept. The configuration is
/// embedded as JSON in a `<script id="render-config">` element; `seed` picks
/// which paragraphs receive enabled decorations.
pub fn emit_render_job(doc: &Document, cfg: &RenderConfig, seed: u64) -> RenderJob {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accent_pool = match cfg.text_color.shade {
        Shade::Light => &palettes().text.light,
        Shade::Dark => &palettes().text.dark,
    };
    let dir = match cfg.direction {
        Direction::Rtl => "rtl",
        Direction::Ltr => "ltr",
    };
    let config_json = serde_json::to_string(cfg)
        .expect("config serializes")
        .replace("</", "<\\/");

    let mut html = String::new();
    let _ = write!(
        html,
        "<!DOCTYPE html>\n<html lang=\"ar\" dir=\"{dir}\">\n<head>\n<meta charset=\"utf-8\">\n\
         <script type=\"application/json\" id=\"render-config\">{config_json}</script>\n\
         <style>\n{}</style>\n</head>\n<body dir=\"{dir}\">\n",
        style_block(cfg)
    );
    for block in &doc.blocks {
        match block {
            Block::Paragraph(text) => {
                let mut attrs = String::new();
                if cfg.decorations.contains(&Decoration::Highlight) && rng.random_bool(DECORATED_SHARE) {
                    attrs.push_str(" class=\"highlight\"");
                } else if cfg.decorations.contains(&Decoration::ColoredParagraph)
                    && rng.random_bool(DECORATED_SHARE)
                {
                    let color = &accent_pool[rng.random_range(0..accent_pool.len())];
                    let _ = write!(attrs, " style=\"color: {color}\"");
                }
                let _ = writeln!(html, "<p{attrs}>{}</p>", paragraph_html(text));
            }
            Block::Header { level, text } => {
                let n = level.get();
                let _ = writeln!(html, "<h{n}>{}</h{n}>", inline_to_html(&parse_inline(text)));
            }
            Block::HorizontalRule => html.push_str("<hr/>\n"),
            Block::Table(table) => {
                html.push_str(&table.tree().to_html());
                html.push('\n');
            }
            Block::SpecialTag { name, content } => {
                let class = name.replace('_', "-");
                if name == "img" {
                    let _ = writeln!(html, "<figure class=\"img\" data-description=\"{}\"></figure>", escape(content.trim()).replace('"', "&quot;"));
                } else {
                    let _ = writeln!(html, "<div class=\"{class}\">{}</div>", escape(content.trim()));
                }
            }
        }
    }
    html.push_str("</body>\n</html>\n");

    let mut hasher = Sha256::new();
    hasher.update(html.as_bytes());
    hasher.update(seed.to_le_bytes());
    let digest = hasher.finalize();
    RenderJob {
        job_id: format!("job-{}", hex::encode(&digest[..8])),
        seed,
        config: cfg.clone(),
        html,
    }
}

/// Sidecar written next to each job's HTML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobFile {
    pub schema_version: u32,
    pub job_id: String,
    pub source_id: String,
    pub seed: u64,
    pub config: RenderConfig,
}

/// One line of the batch manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub source_id: String,
    pub job_id: String,
    pub seed: u64,
}

/// Samples a configuration for every source and writes `<job_id>.html`,
/// `<job_id>.json` and `manifest.jsonl` into `out_dir`.
///
/// Each document's seed is derived from `base_seed` and its id, so output
/// does not depend on input order.
pub fn write_batch(
    sources: &[(String, Document)],
    out_dir: &Path,
    base_seed: u64,
    sampler: &Sampler,
) -> Result<Vec<BatchRecord>, SynthError> {
    let mut seen = BTreeSet::new();
    for (id, _) in sources {
        if !seen.insert(id.as_str()) {
            return Err(SynthError::DuplicateId(id.clone()));
        }
    }
    let jobs: Vec<(String, RenderJob)> = sources
        .par_iter()
        .map(|(id, doc)| {
            let seed = derive_seed(base_seed, id);
            let cfg = sampler.sample(seed);
            (id.clone(), emit_render_job(doc, &cfg, seed))
        })
        .collect();
    let mut job_ids = BTreeSet::new();
    for (_, job) in &jobs {
        if !job_ids.insert(job.job_id.as_str()) {
            return Err(SynthError::DuplicateId(job.job_id.clone()));
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| SynthError::io(out_dir, e))?;
    let mut manifest = String::new();
    let mut records = Vec::with_capacity(jobs.len());
    for (source_id, job) in jobs {
        let html_path = out_dir.join(format!("{}.html", job.job_id));
        fs::write(&html_path, &job.html).map_err(|e| SynthError::io(&html_path, e))?;
        let sidecar = JobFile {
            schema_version: JOB_SCHEMA_VERSION,
            job_id: job.job_id.clone(),
            source_id: source_id.clone(),
            seed: job.seed,
            config: job.config,
        };
        let json_path = out_dir.join(format!("{}.json", job.job_id));
        let body = serde_json::to_string_pretty(&sidecar)?;
        fs::write(&json_path, body).map_err(|e| SynthError::io(&json_path, e))?;
        let record = BatchRecord {
            source_id,
            job_id: job.job_id,
            seed: job.seed,
        };
        manifest.push_str(&serde_json::to_string(&record)?);
        manifest.push('\n');
        records.push(record);
    }
    let manifest_path = out_dir.join("manifest.jsonl");
    fs::write(&manifest_path, manifest).map_err(|e| SynthError::io(&manifest_path, e))?;
    Ok(records)
}
