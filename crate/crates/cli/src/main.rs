use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use ardoc_cli::lint::{lint_ground_truth, LintConfig};
use ardoc_cli::run::{run_evaluation, RunOptions};
use ardoc_cli::{load_manifest, WORKERS_ENV};
use ardoc_core::eval::{normalize_text, Aggregation, EvalOptions, TedsScope};
use ardoc_core::filters::{rejection_reasons, train_lm_with_unit, CharNgramLm, FilterConfig, LmUnit};
use ardoc_core::metrics::CharUnit;
use ardoc_core::normalize::{standardize, NormalizeConfig, UnicodeForm};
use ardoc_core::parse_markdown;
use ardoc_core::teds::{CostModel, TextCost};
use ardoc_synth::augment::{self, plan_augmentation, run_plan, AugmentPlan, PlanOptions};
use ardoc_synth::{derive_seed, write_batch, Sampler, SamplerConfig};

#[derive(Parser)]
#[command(name = "ardoc", version, about = "Arabic document OCR evaluation and data pipeline tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against a manifest.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Check ground-truth files for common transcription problems.
    Lint(LintArgs),
    /// Split a JSONL corpus into kept and rejected documents.
    Filter(FilterArgs),
    /// Character n-gram language model.
    Lm {
        #[command(subcommand)]
        command: LmCommand,
    },
    /// Print sampled rendering configurations as JSONL.
    SampleConfigs(SampleArgs),
    /// Convert a JSONL corpus into HTML render jobs.
    RenderJobs(RenderArgs),
    /// Image augmentation plans.
    Augment {
        #[command(subcommand)]
        command: AugmentCommand,
    },
    /// Standardize one document and print the result.
    Normalize(NormalizeArgs),
    /// Print the transform registry as JSON.
    Registry,
}

#[derive(Subcommand)]
enum EvalCommand {
    Run(EvalRunArgs),
}

#[derive(Subcommand)]
enum LmCommand {
    Train(LmTrainArgs),
}

#[derive(Subcommand)]
enum AugmentCommand {
    Plan(AugmentPlanArgs),
    Run(AugmentRunArgs),
}

#[derive(Args, Clone)]
struct NormalizeFlags {
    /// Remove Arabic diacritics (combining marks) before scoring.
    #[arg(long)]
    normalize_strip_diacritics: bool,
    #[arg(long, value_enum, default_value = "nfc")]
    normalize_unicode: UnicodeArg,
    /// Model tag removed with its content; repeatable. Replaces the defaults.
    #[arg(long = "normalize-remove-tag", value_name = "TAG")]
    normalize_remove_tags: Vec<String>,
    /// Keep page_number and watermark elements.
    #[arg(long, conflicts_with = "normalize_remove_tags")]
    normalize_keep_tags: bool,
    #[arg(long, default_value = "---")]
    normalize_hr_form: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnicodeArg {
    Nfc,
    Nfkc,
}

impl NormalizeFlags {
    fn config(&self) -> Result<NormalizeConfig> {
        let mut cfg = NormalizeConfig {
            unicode_form: match self.normalize_unicode {
                UnicodeArg::Nfc => UnicodeForm::Nfc,
                UnicodeArg::Nfkc => UnicodeForm::Nfkc,
            },
            strip_diacritics: self.normalize_strip_diacritics,
            hr_normal_form: self.normalize_hr_form.clone(),
            ..NormalizeConfig::default()
        };
        if self.normalize_keep_tags {
            cfg.model_tags_to_remove.clear();
        } else if !self.normalize_remove_tags.is_empty() {
            cfg.model_tags_to_remove = self.normalize_remove_tags.iter().cloned().collect();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Doc,
    Tables,
}

#[derive(Clone, Copy, ValueEnum)]
enum TedsCostArg {
    Normalized,
    Strict,
}

#[derive(Clone, Copy, ValueEnum)]
enum CerUnitArg {
    Codepoint,
    Grapheme,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    Corpus,
    SentenceMean,
}

#[derive(Args)]
struct EvalRunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory holding `<id>.md`, `<id>.txt` or `<id>` per entry.
    #[arg(long)]
    pred: PathBuf,
    /// JSON report path.
    #[arg(long)]
    out: PathBuf,
    /// Also write a Markdown table here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write per-entry records as JSONL here.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, default_value = "model")]
    model: String,
    #[command(flatten)]
    normalize: NormalizeFlags,
    #[arg(long, value_enum, default_value = "doc")]
    teds_scope: ScopeArg,
    #[arg(long, value_enum, default_value = "normalized")]
    teds_cost: TedsCostArg,
    #[arg(long, value_enum, default_value = "codepoint")]
    cer_unit: CerUnitArg,
    #[arg(long, value_enum, default_value = "corpus")]
    aggregation: AggregationArg,
    /// Decimal places kept in reported TEDS.
    #[arg(long, default_value_t = 0, conflicts_with = "teds_full_precision")]
    teds_decimals: u32,
    #[arg(long)]
    teds_full_precision: bool,
    /// Error on a missing prediction instead of scoring it as empty.
    #[arg(long)]
    strict: bool,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

#[derive(Args)]
struct LintArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Write findings as JSONL here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    latin_run_words: usize,
    /// Exit with status 1 when there are findings.
    #[arg(long)]
    fail_on_findings: bool,
}

#[derive(Args)]
struct CorpusArgs {
    /// JSONL corpus, one object per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "text")]
    text_field: String,
    #[arg(long, default_value = "id")]
    id_field: String,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Trained model file from `lm train`.
    #[arg(long)]
    lm: PathBuf,
    /// Perplexity above which a document is rejected.
    #[arg(long)]
    max_ppl: f64,
    #[arg(long, default_value_t = 0.25)]
    sparsity: f64,
    /// Receives kept.jsonl and rejected.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LmTrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = 5)]
    order: usize,
    #[arg(long, default_value_t = 0.1)]
    k: f64,
    /// Model whitespace-separated words instead of characters.
    #[arg(long)]
    word: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file overriding sampler probabilities.
    #[arg(long)]
    sampler_config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sampler_config: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentPlanArgs {
    /// Directory of `<id>.png` images.
    #[arg(long, required_unless_present = "ids")]
    images: Option<PathBuf>,
    /// Text file with one image id per line.
    #[arg(long)]
    ids: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    allow_remainder: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AugmentRunArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

#[derive(Args)]
struct NormalizeArgs {
    /// Input file; stdin when absent.
    input: Option<PathBuf>,
    #[command(flatten)]
    normalize: NormalizeFlags,
    /// Run the full scoring pipeline: also normalize characters and convert
    /// pipe tables to HTML.
    #[arg(long)]
    full: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => write(p, body),
        None => {
            io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

/// Corpus records with their id and text pulled out.
fn read_corpus(args: &CorpusArgs) -> Result<Vec<(String, String, Value)>> {
    let text = read(&args.corpus)?;
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let value: Value = serde_json::from_str(line)
            .with_context(|| format!("{} line {}", args.corpus.display(), n + 1))?;
        let body = value
            .get(&args.text_field)
            .and_then(Value::as_str)
            .with_context(|| format!("line {}: no string field {:?}", n + 1, args.text_field))?
            .to_string();
        let id = match value.get(&args.id_field) {
            Some(Value::String(s)) => s.clone(),
            Some(v @ Value::Number(_)) => v.to_string(),
            _ => format!("{}", n + 1),
        };
        if !ids.insert(id.clone()) {
            bail!("duplicate id {id:?} in {}", args.corpus.display());
        }
        out.push((id, body, value));
    }
    Ok(out)
}

fn sampler(path: Option<&Path>) -> Result<Sampler> {
    let cfg = match path {
        Some(p) => serde_json::from_str::<SamplerConfig>(&read(p)?)?,
        None => SamplerConfig::default(),
    };
    Ok(Sampler::new(cfg)?)
}

fn eval_run(args: EvalRunArgs) -> Result<()> {
    let manifest = load_manifest(&args.manifest)?;
    for flag in &manifest.flags {
        eprintln!("warning: entry {} is missing {:?}", flag.id, flag.missing);
    }
    let eval = EvalOptions {
        normalize: args.normalize.config()?,
        teds_scope: match args.teds_scope {
            ScopeArg::Doc => TedsScope::Document,
            ScopeArg::Tables => TedsScope::Tables,
        },
        teds_cost: CostModel {
            text: match args.teds_cost {
                TedsCostArg::Normalized => TextCost::Normalized,
                TedsCostArg::Strict => TextCost::Strict,
            },
        },
        char_unit: match args.cer_unit {
            CerUnitArg::Codepoint => CharUnit::Codepoint,
            CerUnitArg::Grapheme => CharUnit::Grapheme,
        },
        teds_decimals: (!args.teds_full_precision).then_some(args.teds_decimals),
        aggregation: match args.aggregation {
            AggregationArg::Corpus => Aggregation::Corpus,
            AggregationArg::SentenceMean => Aggregation::SentenceMean,
        },
    };
    let opts = RunOptions {
        eval,
        model_name: args.model,
        strict: args.strict,
        workers: args.workers,
    };
    let report = run_evaluation(&manifest, &args.pred, &opts)?;
    write(&args.out, &report.to_json())?;
    if let Some(path) = &args.report {
        write(path, &report.to_markdown())?;
    }
    if let Some(path) = &args.records {
        write(path, &report.records_jsonl())?;
    }
    for s in &report.skipped {
        eprintln!("skipped {}: {}", s.id, s.reason);
    }
    let warned = report.per_entry.iter().filter(|e| !e.warnings.is_empty()).count();
    if warned > 0 {
        eprintln!("{warned} entries carry warnings; see {}", args.out.display());
    }
    match &report.corpus {
        Some(_) => print!("{}", report.to_markdown()),
        None => bail!(
            "no corpus row: {}",
            report.corpus_error.as_deref().unwrap_or("unknown error")
        ),
    }
    Ok(())
}

fn lint(args: LintArgs) -> Result<bool> {
    let manifest = load_manifest(&args.manifest)?;
    let cfg = LintConfig {
        latin_run_words: args.latin_run_words,
        ..LintConfig::default()
    };
    let findings = lint_ground_truth(&manifest, &cfg);
    let mut body = String::new();
    for f in &findings {
        body.push_str(&serde_json::to_string(f)?);
        body.push('\n');
    }
    emit(args.out.as_deref(), &body)?;
    eprintln!("{} findings in {} entries", findings.len(), manifest.entries.len());
    Ok(findings.is_empty() || !args.fail_on_findings)
}

fn filter(args: FilterArgs) -> Result<()> {
    let lm = CharNgramLm::from_json(&read(&args.lm)?)?;
    let cfg = FilterConfig {
        ppl_threshold: args.max_ppl,
        sparsity_threshold: args.sparsity,
    };
    cfg.validate()?;
    let (mut kept, mut rejected) = (String::new(), String::new());
    let (mut n_kept, mut n_rejected) = (0, 0);
    for (_, text, value) in read_corpus(&args.corpus)? {
        let (reasons, _) = rejection_reasons(&parse_markdown(&text), &lm, &cfg);
        if reasons.is_empty() {
            kept.push_str(&serde_json::to_string(&value)?);
            kept.push('\n');
            n_kept += 1;
        } else {
            let mut value = value;
            if let Value::Object(map) = &mut value {
                map.insert("reasons".into(), serde_json::to_value(&reasons)?);
            }
            rejected.push_str(&serde_json::to_string(&value)?);
            rejected.push('\n');
            n_rejected += 1;
        }
    }
    write(&args.out_dir.join("kept.jsonl"), &kept)?;
    write(&args.out_dir.join("rejected.jsonl"), &rejected)?;
    eprintln!("kept {n_kept}, rejected {n_rejected}");
    Ok(())
}

fn lm_train(args: LmTrainArgs) -> Result<()> {
    let texts: Vec<String> = read_corpus(&args.corpus)?
        .into_iter()
        .map(|(_, t, _)| parse_markdown(&t).plain_text())
        .collect();
    let unit = if args.word { LmUnit::Word } else { LmUnit::Char };
    let lm = train_lm_with_unit(&texts, args.order, args.k, unit)?;
    write(&args.out, &lm.to_json())
}

fn sample_configs(args: SampleArgs) -> Result<()> {
    let sampler = sampler(args.sampler_config.as_deref())?;
    let mut body = String::new();
    for i in 0..args.count {
        let seed = derive_seed(args.seed, &i.to_string());
        let cfg = sampler.sample(seed);
        body.push_str(&serde_json::to_string(&serde_json::json!({ "seed": seed, "config": cfg }))?);
        body.push('\n');
    }
    emit(args.out.as_deref(), &body)
}

fn render_jobs(args: RenderArgs) -> Result<()> {
    let sampler = sampler(args.sampler_config.as_deref())?;
    let sources: Vec<_> = read_corpus(&args.corpus)?
        .into_iter()
        .map(|(id, text, _)| (id, parse_markdown(&text)))
        .collect();
    let records = write_batch(&sources, &args.out_dir, args.seed, &sampler)?;
    eprintln!("wrote {} jobs to {}", records.len(), args.out_dir.display());
    Ok(())
}

fn image_ids(args: &AugmentPlanArgs) -> Result<Vec<String>> {
    if let Some(path) = &args.ids {
        return Ok(read(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect());
    }
    let dir = args.images.as_ref().expect("clap requires --images or --ids");
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

fn augment_plan(args: AugmentPlanArgs) -> Result<()> {
    let ids = image_ids(&args)?;
    let plan = plan_augmentation(
        &ids,
        args.seed,
        PlanOptions {
            allow_remainder: args.allow_remainder,
        },
    )?;
    write(&args.out, &plan.to_jsonl()?)?;
    eprintln!("planned {} images as {:?}", ids.len(), plan.subset_sizes);
    Ok(())
}

fn augment_run(args: AugmentRunArgs) -> Result<()> {
    let plan = AugmentPlan::from_jsonl(&read(&args.plan)?)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        builder = builder.num_threads(n.max(1));
    }
    let records = builder
        .build()?
        .install(|| run_plan(&plan, &args.images, &args.out_dir))?;
    eprintln!("wrote {} augmented images to {}", records.len(), args.out_dir.display());
    Ok(())
}

fn normalize(args: NormalizeArgs) -> Result<()> {
    let text = match &args.input {
        Some(p) => read(p)?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let cfg = args.normalize.config()?;
    let out = if args.full {
        normalize_text(&text, &cfg).text
    } else {
        standardize(&text, &cfg)
    };
    println!("{out}");
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval {
            command: EvalCommand::Run(args),
        } => eval_run(args),
        Command::Lint(args) => {
            if !lint(args)? {
                std::process::exit(1);
            }
            Ok(())
        }
        Command::Filter(args) => filter(args),
        Command::Lm {
            command: LmCommand::Train(args),
        } => lm_train(args),
        Command::SampleConfigs(args) => sample_configs(args),
        Command::RenderJobs(args) => render_jobs(args),
        Command::Augment { command } => match command {
            AugmentCommand::Plan(args) => augment_plan(args),
            AugmentCommand::Run(args) => augment_run(args),
        },
        Command::Normalize(args) => normalize(args),
        Command::Registry => {
            println!("{}", serde_json::to_string_pretty(augment::registry())?);
            Ok(())
        }
    }
}
