//! Command-line front end. Every flag can also come from a JSON config file
//! (`--config`); flags win over the file, and `COMPCOLOR_SEED` only supplies
//! the seed when neither sets one.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::benchmark::{
    build_pairs, derive_variants, filter_color_set, generate_manifest, shipped_objects,
    BenchmarkManifest, ColorMeasurement, ManifestOptions, VariantMode, FILTER_THRESHOLD,
};
use crate::color::{
    delta_e_76, final_color_set, named_color_lookup, rgb_f64_to_lab, srgb_to_lab, CmcRatio,
    NameStyle, SrgbColor,
};
use crate::edit::{run_edit_schedule, EditDriver, EditSchedule, ToyConfig, ToyDriver, TOY_TARGETS};
use crate::eval::io::{read_scores_jsonl, read_summary_csv, write_scores_jsonl, write_summary_csv};
use crate::eval::{
    aggregate, evaluate_manifest, ClusterSpace, Criterion, EvalSources, ScoreConfig, SummaryRow,
};
use crate::report::{
    compute_improvements, format_improvement_table, format_summary_table, ImprovementStyle,
};

pub const SEED_ENV: &str = "COMPCOLOR_SEED";

macro_rules! options {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident: $ty:ty,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $($(#[$fmeta])* #[arg(long)] pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Field-wise `self` over `fallback`.
            pub fn or(self, fallback: Self) -> Self {
                Self { $($field: self.$field.or(fallback.$field),)* }
            }
        }
    };
}

options!(GenBenchmarkOptions {
    /// Color names: JSON array or one name per line (default: shipped 35-color set).
    colors: PathBuf,
    /// Object nouns: JSON array or one per line (default: shipped 19 objects).
    objects: PathBuf,
    /// Per-model color measurements (JSON); filters the color set first.
    measurements: PathBuf,
    /// Mean ΔE_CMC a color must stay under for every model.
    filter_threshold: f64,
    /// Close and distant partners per main color.
    per_type: usize,
    /// Prompts per color pair.
    per_pair: usize,
    /// pair | single | triple
    mode: String,
    /// concatenated | hyphenated
    name_style: String,
    out: PathBuf,
});

options!(EvaluateOptions {
    manifest: PathBuf,
    /// Directory of `{entry id}.png` images.
    images: PathBuf,
    /// Directory of mask PNGs, optionally with a masks.json index.
    masks: PathBuf,
    /// Label for the generator that produced the images.
    method: String,
    tau: f64,
    k: usize,
    min_fraction: f64,
    cmc_l: f64,
    cmc_c: f64,
    /// rgb | lab
    space: String,
    /// strict | leakage
    criterion: String,
    /// Per-object scores (JSON lines).
    out: PathBuf,
    summary: PathBuf,
});

options!(ReportOptions {
    /// Summary CSVs, comma-separated.
    summaries: String,
    /// Score files (JSON lines), comma-separated; aggregated before reporting.
    scores: String,
    /// strict | leakage, for score files.
    criterion: String,
    out: PathBuf,
});

options!(ImprovementsOptions {
    base: PathBuf,
    edited: PathBuf,
    /// percent | delta
    style: String,
    /// Improvement rows as JSON.
    json: PathBuf,
    out: PathBuf,
});

options!(EditSimOptions {
    /// Schedule JSON; missing fields take the defaults.
    schedule: PathBuf,
    /// Two target color names, comma-separated.
    targets: String,
    out_dir: PathBuf,
    /// Upscaling factor of the written PNGs.
    scale: u32,
});

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub gen_benchmark: GenBenchmarkOptions,
    pub evaluate: EvaluateOptions,
    pub report: ReportOptions,
    pub improvements: ImprovementsOptions,
    pub edit_sim: EditSimOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("config {} is not a valid run config", path.display()))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "compcolor",
    version,
    about = "Multi-object color fidelity benchmark and editing toolkit"
)]
pub struct Cli {
    /// JSON run config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed (default: $COMPCOLOR_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a prompt manifest from color pairs and objects.
    GenBenchmark(GenBenchmarkOptions),
    /// Score generated images against a manifest.
    Evaluate(EvaluateOptions),
    /// Render summary tables.
    Report(ReportOptions),
    /// Compare an edited summary with a base summary.
    Improvements(ImprovementsOptions),
    /// Run the editing schedule on the toy driver.
    EditSim(EditSimOptions),
}

fn parse_enum<T: DeserializeOwned>(flag: &str, value: &str) -> anyhow::Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_lowercase()))
        .map_err(|_| anyhow::anyhow!("invalid value {value:?} for --{flag}"))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

fn required(v: Option<PathBuf>, flag: &str) -> anyhow::Result<PathBuf> {
    v.ok_or_else(|| anyhow::anyhow!("--{flag} is required (flag or config file)"))
}

/// Reads a JSON array of strings, or one entry per line (`#` starts a comment).
pub fn read_name_list(path: &Path) -> anyhow::Result<Vec<String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let items: Vec<String> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text)
            .with_context(|| format!("{} is not a JSON array of strings", path.display()))?
    } else {
        text.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect()
    };
    if items.is_empty() {
        bail!("{} lists no entries", path.display());
    }
    Ok(items)
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(0),
    }
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = resolve_seed(cli.seed, file.seed)?;
    match cli.command {
        Command::GenBenchmark(o) => gen_benchmark(o.or(file.gen_benchmark), seed),
        Command::Evaluate(o) => evaluate(o.or(file.evaluate), seed),
        Command::Report(o) => report(o.or(file.report)),
        Command::Improvements(o) => improvements(o.or(file.improvements)),
        Command::EditSim(o) => edit_sim(o.or(file.edit_sim), seed),
    }
}

fn gen_benchmark(o: GenBenchmarkOptions, seed: u64) -> anyhow::Result<()> {
    let out = required(o.out, "out")?;
    let mut colors: Vec<String> = match &o.colors {
        Some(p) => read_name_list(p)?,
        None => final_color_set().iter().map(|c| c.name.clone()).collect(),
    };
    if let Some(p) = &o.measurements {
        let text =
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let m: Vec<ColorMeasurement> = serde_json::from_str(&text)
            .with_context(|| format!("{} is not a measurement list", p.display()))?;
        let keep = filter_color_set(&m, o.filter_threshold.unwrap_or(FILTER_THRESHOLD))?;
        colors.retain(|c| keep.iter().any(|k| k.eq_ignore_ascii_case(c)));
        if colors.is_empty() {
            bail!("no colors survive the measurement filter");
        }
    }
    let objects = match &o.objects {
        Some(p) => read_name_list(p)?,
        None => shipped_objects(),
    };
    let options = ManifestOptions {
        prompts_per_pair: o
            .per_pair
            .unwrap_or(ManifestOptions::default().prompts_per_pair),
        name_style: match &o.name_style {
            Some(s) => parse_enum::<NameStyle>("name-style", s)?,
            None => NameStyle::default(),
        },
    };
    let pairs = build_pairs(&colors, o.per_type.unwrap_or(3))?;
    for w in &pairs.warnings {
        eprintln!("warning: {w}");
    }
    let manifest = generate_manifest(&pairs.pairs, &objects, options, seed)?;
    let manifest = match o.mode.as_deref().unwrap_or("pair") {
        "pair" => manifest,
        "single" => derive_variants(&manifest, VariantMode::Single, seed)?,
        "triple" => derive_variants(&manifest, VariantMode::Triple, seed)?,
        other => bail!("invalid value {other:?} for --mode (pair, single, triple)"),
    };
    manifest.write(&out)?;
    println!(
        "wrote {} prompts to {}",
        manifest.entries.len(),
        out.display()
    );
    Ok(())
}

fn evaluate(o: EvaluateOptions, seed: u64) -> anyhow::Result<()> {
    let manifest = BenchmarkManifest::load(&required(o.manifest, "manifest")?)?;
    let images = required(o.images, "images")?;
    let sources = EvalSources {
        masks_dir: o.masks.unwrap_or_else(|| images.clone()),
        images_dir: images,
        method: o.method.unwrap_or_else(|| "model".to_string()),
    };
    let defaults = ScoreConfig::default();
    let cfg = ScoreConfig {
        k: o.k.unwrap_or(defaults.k),
        min_fraction: o.min_fraction.unwrap_or(defaults.min_fraction),
        tau: o.tau.unwrap_or(defaults.tau),
        cmc: CmcRatio {
            lightness: o.cmc_l.unwrap_or(defaults.cmc.lightness),
            chroma: o.cmc_c.unwrap_or(defaults.cmc.chroma),
        },
        space: match &o.space {
            Some(s) => parse_enum::<ClusterSpace>("space", s)?,
            None => defaults.space,
        },
        seed,
    };
    let criterion = match &o.criterion {
        Some(s) => parse_enum::<Criterion>("criterion", s)?,
        None => Criterion::Strict,
    };
    let result = evaluate_manifest(&manifest, &sources, &cfg)?;
    let scores_path = o.out.unwrap_or_else(|| PathBuf::from("scores.jsonl"));
    let summary_path = o.summary.unwrap_or_else(|| PathBuf::from("summary.csv"));
    write_scores_jsonl(&result.scores, &scores_path)?;
    let rows = aggregate(&result.scores, criterion);
    write_summary_csv(&rows, &summary_path)?;
    for s in result.scores.iter().filter(|s| !s.valid) {
        eprintln!(
            "rejected {} object {}: {}",
            s.image_id,
            s.object_index,
            s.rejection_reason.as_deref().unwrap_or("unknown")
        );
    }
    if !rows.is_empty() {
        print!("{}", format_summary_table(&rows)?);
    }
    Ok(())
}

fn report(o: ReportOptions) -> anyhow::Result<()> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for p in o.summaries.as_deref().map(split_list).unwrap_or_default() {
        rows.extend(read_summary_csv(Path::new(&p))?);
    }
    let criterion = match &o.criterion {
        Some(s) => parse_enum::<Criterion>("criterion", s)?,
        None => Criterion::Strict,
    };
    let mut scores = Vec::new();
    for p in o.scores.as_deref().map(split_list).unwrap_or_default() {
        scores.extend(read_scores_jsonl(Path::new(&p))?);
    }
    if !scores.is_empty() {
        rows.extend(aggregate(&scores, criterion));
    }
    if rows.is_empty() {
        bail!("nothing to report: pass --summaries or --scores");
    }
    let table = format_summary_table(&rows)?;
    match o.out {
        Some(p) => write_text(&p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn improvements(o: ImprovementsOptions) -> anyhow::Result<()> {
    let base = read_summary_csv(&required(o.base, "base")?)?;
    let edited = read_summary_csv(&required(o.edited, "edited")?)?;
    let rows = compute_improvements(&base, &edited)?;
    let style = match &o.style {
        Some(s) => parse_enum::<ImprovementStyle>("style", s)?,
        None => ImprovementStyle::default(),
    };
    if let Some(p) = &o.json {
        write_text(p, &format!("{}\n", serde_json::to_string_pretty(&rows)?))?;
    }
    let table = format_improvement_table(&rows, style)?;
    match o.out {
        Some(p) => write_text(&p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn edit_sim(o: EditSimOptions, seed: u64) -> anyhow::Result<()> {
    let out_dir = o.out_dir.unwrap_or_else(|| PathBuf::from("edit-sim"));
    let schedule = match &o.schedule {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            EditSchedule::from_json(&text).with_context(|| format!("schedule {}", p.display()))?
        }
        None => EditSchedule::default(),
    };
    let names = match &o.targets {
        Some(t) => split_list(t),
        None => TOY_TARGETS.iter().map(|s| s.to_string()).collect(),
    };
    let targets: Vec<SrgbColor> = names
        .iter()
        .map(|n| named_color_lookup(n).map(|c| c.rgb))
        .collect::<crate::Result<_>>()?;
    let driver = ToyDriver::new(ToyConfig {
        seed,
        ..ToyConfig::default()
    })?;
    if targets.len() != driver.num_objects() {
        bail!(
            "--targets needs {} colors, got {}",
            driver.num_objects(),
            targets.len()
        );
    }
    let masks = driver.masks("toy");
    let outcome = run_edit_schedule(
        &driver,
        &schedule,
        &driver.pseudo_ground_truth(),
        &targets,
        &masks,
    )?;

    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    outcome.trace.save_csv(&out_dir.join("trace.csv"))?;
    let scale = o.scale.unwrap_or(8).max(1);
    let before = driver.forward(&driver.initial_latent(), 1)?.image;
    let after = driver.forward(&outcome.latent, schedule.total_steps)?.image;
    for (name, img) in [("before.png", &before), ("after.png", &after)] {
        let path = out_dir.join(name);
        img.to_rgb8(scale)
            .save(&path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    write_text(&out_dir.join("schedule.json"), &schedule.to_json()?)?;

    println!(
        "L_attention {:.4} -> {:.4}",
        outcome.initial.attention, outcome.final_state.attention
    );
    for ((name, target), mean) in names
        .iter()
        .zip(&targets)
        .zip(&outcome.final_state.mean_rgb)
    {
        let lab = rgb_f64_to_lab(mean.map(|v| v * 255.0));
        println!(
            "{name}: mean color ΔE_ab {:.3} from target",
            delta_e_76(lab, srgb_to_lab(*target))
        );
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}
