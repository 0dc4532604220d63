//! Command-line surface and config-file merging.
//!
//! Every subcommand accepts `--config FILE` with `key=value` lines keyed by
//! long flag names; explicitly passed flags win over config values, which
//! win over built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use phonotype::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "phonotype",
    version,
    about = "Typology-grounded phonology: inventory databases, contrast consistency, stream decoding, inventory induction"
)]
pub struct Cli {
    /// Suppress informational log lines on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Emit log lines as JSON objects.
    #[arg(long, global = true)]
    pub json_logs: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a PHOIBLE-style CSV into a validated snapshot.
    Import(ImportArgs),
    /// Evaluate a contrast's predictability on held-out languages.
    ContrastEval(ContrastEvalArgs),
    /// Generate a synthetic posterior stream with known ground truth.
    GenStream(GenStreamArgs),
    /// Decode a posterior stream against one inventory.
    Decode(DecodeArgs),
    /// Compare candidate inventories by penalized fit over streams.
    ScoreInventory(ScoreInventoryArgs),
    /// Induce an inventory from streams and a closest-language pool.
    Induce(InduceArgs),
    /// Rank languages closest to a prior or seed language.
    NearestLangs(NearestLangsArgs),
}

/// Database input options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct DbArgs {
    /// Inventory database: PHOIBLE-style CSV or an imported snapshot.
    #[arg(long)]
    pub db: Option<PathBuf>,
    /// Column-map config (key=value lines) for non-default CSV layouts.
    #[arg(long)]
    pub column_map: Option<PathBuf>,
    /// CSV field delimiter (default comma).
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Contour token policy: first | unspecified.
    #[arg(long)]
    pub contour_policy: Option<String>,
    /// Glyph vector conflict handling: error | per-inventory.
    #[arg(long)]
    pub conflict_mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    /// Snapshot output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the canonical CSV re-serialization here.
    #[arg(long)]
    pub canonical_csv: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ContrastEvalArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    /// Declarative contrast/realization/hyper config (JSON).
    #[arg(long)]
    pub contrast_config: Option<PathBuf>,
    /// Comma-separated languages for leave-one-language-out folds.
    #[arg(long)]
    pub languages: Option<String>,
    /// Train languages for a single held-out split (with --test-languages).
    #[arg(long)]
    pub train_languages: Option<String>,
    #[arg(long)]
    pub test_languages: Option<String>,
    /// symbolic | synthetic (overrides the config file).
    #[arg(long)]
    pub mode: Option<String>,
    /// Root seed, overriding the config's realization seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Report output path (stdout always receives the report).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenStreamArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    /// Inventory to sample from: id (`1675`) or label (`GM 1675`).
    #[arg(long)]
    pub inventory_id: Option<String>,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Posterior noise sigma.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stream TSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ground-truth alignment path (default `<out>.truth.json`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub mean_run_length: Option<f64>,
    #[arg(long)]
    pub mu_plus: Option<f64>,
    #[arg(long)]
    pub mu_minus: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    /// Posterior stream TSV.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    #[arg(long)]
    pub inventory_id: Option<String>,
    #[arg(long)]
    pub switch_penalty: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub min_duration: Option<usize>,
    #[arg(long)]
    pub clamp_epsilon: Option<f64>,
    /// Alignment JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreInventoryArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    /// Comma-separated stream TSV paths.
    #[arg(long)]
    pub streams: Option<String>,
    /// Comma-separated inventory ids or labels to compare.
    #[arg(long)]
    pub inventory_ids: Option<String>,
    /// Per-segment size penalty.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub switch_penalty: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub min_duration: Option<usize>,
    #[arg(long)]
    pub clamp_epsilon: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InduceArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    #[arg(long)]
    pub streams: Option<String>,
    /// Language prior JSON file ({"Language": weight, ...}).
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Seed language whose inventories anchor the similarity ranking.
    #[arg(long)]
    pub seed_language: Option<String>,
    /// jaccard | feature-match.
    #[arg(long)]
    pub metric: Option<String>,
    /// Number of closest languages feeding the candidate pool.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub epsilon_gain: Option<f64>,
    #[arg(long)]
    pub min_attestation: Option<usize>,
    #[arg(long)]
    pub containment_threshold: Option<f64>,
    #[arg(long)]
    pub switch_penalty: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NearestLangsArgs {
    #[command(flatten)]
    pub db_args: DbArgs,
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(long)]
    pub seed_language: Option<String>,
    /// jaccard | feature-match.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parse a `key=value` config file.
pub fn read_config(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}:{}: expected key=value",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn fill<T>(slot: &mut Option<T>, cfg: &BTreeMap<String, String>, key: &str) -> Result<()>
where
    T: FromStr,
    T::Err: Display,
{
    if slot.is_none() {
        if let Some(raw) = cfg.get(key) {
            let parsed = raw
                .parse::<T>()
                .map_err(|e| Error::Config(format!("config key `{key}`: {e}")))?;
            *slot = Some(parsed);
        }
    }
    Ok(())
}

impl DbArgs {
    fn fill_from(&mut self, cfg: &BTreeMap<String, String>) -> Result<()> {
        fill(&mut self.db, cfg, "db")?;
        fill(&mut self.column_map, cfg, "column-map")?;
        fill(&mut self.delimiter, cfg, "delimiter")?;
        fill(&mut self.contour_policy, cfg, "contour-policy")?;
        fill(&mut self.conflict_mode, cfg, "conflict-mode")?;
        Ok(())
    }
}

impl Command {
    /// Merge `--config` file values into unset options.
    pub fn apply_config(&mut self) -> Result<()> {
        let config_path = match self {
            Command::Import(a) => a.config.clone(),
            Command::ContrastEval(a) => a.config.clone(),
            Command::GenStream(a) => a.config.clone(),
            Command::Decode(a) => a.config.clone(),
            Command::ScoreInventory(a) => a.config.clone(),
            Command::Induce(a) => a.config.clone(),
            Command::NearestLangs(a) => a.config.clone(),
        };
        let Some(path) = config_path else {
            return Ok(());
        };
        let cfg = read_config(&path)?;
        match self {
            Command::Import(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.out, &cfg, "out")?;
                fill(&mut a.canonical_csv, &cfg, "canonical-csv")?;
            }
            Command::ContrastEval(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.contrast_config, &cfg, "contrast-config")?;
                fill(&mut a.languages, &cfg, "languages")?;
                fill(&mut a.train_languages, &cfg, "train-languages")?;
                fill(&mut a.test_languages, &cfg, "test-languages")?;
                fill(&mut a.mode, &cfg, "mode")?;
                fill(&mut a.seed, &cfg, "seed")?;
                fill(&mut a.repeats, &cfg, "repeats")?;
                fill(&mut a.out, &cfg, "out")?;
            }
            Command::GenStream(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.inventory_id, &cfg, "inventory-id")?;
                fill(&mut a.frames, &cfg, "frames")?;
                fill(&mut a.noise, &cfg, "noise")?;
                fill(&mut a.seed, &cfg, "seed")?;
                fill(&mut a.out, &cfg, "out")?;
                fill(&mut a.truth, &cfg, "truth")?;
                fill(&mut a.mean_run_length, &cfg, "mean-run-length")?;
                fill(&mut a.mu_plus, &cfg, "mu-plus")?;
                fill(&mut a.mu_minus, &cfg, "mu-minus")?;
            }
            Command::Decode(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.stream, &cfg, "stream")?;
                fill(&mut a.inventory_id, &cfg, "inventory-id")?;
                fill(&mut a.switch_penalty, &cfg, "switch-penalty")?;
                fill(&mut a.top_k, &cfg, "top-k")?;
                fill(&mut a.min_duration, &cfg, "min-duration")?;
                fill(&mut a.clamp_epsilon, &cfg, "clamp-epsilon")?;
                fill(&mut a.out, &cfg, "out")?;
            }
            Command::ScoreInventory(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.streams, &cfg, "streams")?;
                fill(&mut a.inventory_ids, &cfg, "inventory-ids")?;
                fill(&mut a.lambda, &cfg, "lambda")?;
                fill(&mut a.switch_penalty, &cfg, "switch-penalty")?;
                fill(&mut a.top_k, &cfg, "top-k")?;
                fill(&mut a.min_duration, &cfg, "min-duration")?;
                fill(&mut a.clamp_epsilon, &cfg, "clamp-epsilon")?;
                fill(&mut a.out, &cfg, "out")?;
            }
            Command::Induce(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.streams, &cfg, "streams")?;
                fill(&mut a.prior, &cfg, "prior")?;
                fill(&mut a.seed_language, &cfg, "seed-language")?;
                fill(&mut a.metric, &cfg, "metric")?;
                fill(&mut a.k, &cfg, "k")?;
                fill(&mut a.lambda, &cfg, "lambda")?;
                fill(&mut a.max_size, &cfg, "max-size")?;
                fill(&mut a.epsilon_gain, &cfg, "epsilon-gain")?;
                fill(&mut a.min_attestation, &cfg, "min-attestation")?;
                fill(&mut a.containment_threshold, &cfg, "containment-threshold")?;
                fill(&mut a.switch_penalty, &cfg, "switch-penalty")?;
                fill(&mut a.out, &cfg, "out")?;
            }
            Command::NearestLangs(a) => {
                a.db_args.fill_from(&cfg)?;
                fill(&mut a.prior, &cfg, "prior")?;
                fill(&mut a.seed_language, &cfg, "seed-language")?;
                fill(&mut a.metric, &cfg, "metric")?;
                fill(&mut a.k, &cfg, "k")?;
                fill(&mut a.out, &cfg, "out")?;
            }
        }
        Ok(())
    }
}

/// A required option missing after flag/config merging.
pub fn require<T>(slot: Option<T>, flag: &str) -> Result<T> {
    slot.ok_or_else(|| Error::Config(format!("missing required option --{flag}")))
}

/// Split a comma-separated list, dropping empty entries.
pub fn split_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
