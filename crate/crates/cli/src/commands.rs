//! Subcommand execution: each command resolves its options, runs the
//! library, prints one JSON document on stdout, and writes its outputs and
//! manifest atomically.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use phonotype::contrast::{
    evaluate_heldout, leave_one_language_out, ConsistencyReport, ContrastSpec, Hyper, Mode,
    RealizationParams,
};
use phonotype::error::{Error, Result};
use phonotype::induction::{
    admissibility_filter, build_candidate_pool, induce_inventory, nearest_languages,
    score_inventory, AdmissibilityMode, AdmissibilityReport, Anchor, InductionParams,
    InventoryScore, LanguagePrior, SelectionStep, SimilarityMetric, DEFAULT_LAMBDA,
};
use phonotype::stream::{
    constrained_decode, generate_stream, Alignment, DecodeParams, FeatureStream, StreamGenParams,
};
use phonotype::typology::{
    parse_phoible, ColumnMap, ConflictMode, ContourPolicy, Inventory, ParseOptions, ParseSummary,
    TypologyDatabase,
};

use crate::args::{require, split_list, ContrastEvalArgs, DbArgs, DecodeArgs, GenStreamArgs,
    ImportArgs, InduceArgs, NearestLangsArgs, ScoreInventoryArgs};
use crate::manifest::{write_atomic, RunManifest};
use crate::Logger;

/// Resolve an input path against `PHONOTYPE_DATA_DIR` when it does not
/// exist as given.
pub fn resolve_input(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    if let Ok(base) = std::env::var("PHONOTYPE_DATA_DIR") {
        let candidate = PathBuf::from(base).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn parse_options(db_args: &DbArgs) -> Result<ParseOptions> {
    let column_map = match &db_args.column_map {
        Some(path) => {
            let text = fs::read_to_string(resolve_input(path))?;
            ColumnMap::from_key_value(&text)?
        }
        None => ColumnMap::default(),
    };
    let contour_policy = match db_args.contour_policy.as_deref() {
        None | Some("first") => ContourPolicy::FirstComponent,
        Some("unspecified") => ContourPolicy::Unspecified,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown contour policy `{other}` (expected first|unspecified)"
            )))
        }
    };
    let conflict_mode = match db_args.conflict_mode.as_deref() {
        None | Some("error") => ConflictMode::Error,
        Some("per-inventory") => ConflictMode::PerInventory,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown conflict mode `{other}` (expected error|per-inventory)"
            )))
        }
    };
    Ok(ParseOptions {
        delimiter: db_args.delimiter.map(|c| c as u8),
        column_map,
        contour_policy,
        conflict_mode,
    })
}

/// Load a database from a snapshot (JSON) or a delimited text file.
pub fn load_database(db_args: &DbArgs, manifest: &mut RunManifest) -> Result<TypologyDatabase> {
    let path = resolve_input(require(db_args.db.clone(), "db")?.as_path());
    manifest.input(&path)?;
    manifest.option("db", path.display());
    let text = fs::read_to_string(&path)?;
    if text.trim_start().starts_with('{') {
        TypologyDatabase::from_snapshot_json(&text)
    } else {
        parse_phoible(text.as_bytes(), &parse_options(db_args)?)
    }
}

fn load_streams(
    raw: &str,
    manifest: &mut RunManifest,
) -> Result<(Vec<PathBuf>, Vec<FeatureStream<f64>>)> {
    let mut paths = Vec::new();
    let mut streams = Vec::new();
    for entry in split_list(raw) {
        let path = resolve_input(Path::new(&entry));
        manifest.input(&path)?;
        let file = fs::File::open(&path)?;
        streams.push(FeatureStream::read_tsv(BufReader::new(file), 0.01)?);
        paths.push(path);
    }
    if streams.is_empty() {
        return Err(Error::Config("no stream files given".into()));
    }
    Ok((paths, streams))
}

fn metric_name(metric: SimilarityMetric) -> &'static str {
    match metric {
        SimilarityMetric::Jaccard => "jaccard",
        SimilarityMetric::FeatureMatch => "feature-match",
    }
}

fn metric_from(raw: Option<&str>) -> Result<SimilarityMetric> {
    match raw {
        None | Some("jaccard") => Ok(SimilarityMetric::Jaccard),
        Some("feature-match") => Ok(SimilarityMetric::FeatureMatch),
        Some(other) => Err(Error::Config(format!(
            "unknown metric `{other}` (expected jaccard|feature-match)"
        ))),
    }
}

fn load_prior(path: &Path, manifest: &mut RunManifest) -> Result<LanguagePrior> {
    let path = resolve_input(path);
    manifest.input(&path)?;
    let text = fs::read_to_string(&path)?;
    let weights: BTreeMap<String, f64> = serde_json::from_str(&text)?;
    LanguagePrior::new(weights)
}

fn emit(
    payload: &impl Serialize,
    out: Option<&Path>,
    manifest: &RunManifest,
) -> Result<serde_json::Value> {
    let value = serde_json::to_value(payload)?;
    let pretty = serde_json::to_string_pretty(&value)?;
    if let Some(out) = out {
        write_atomic(out, pretty.as_bytes())?;
        manifest.write_next_to(out)?;
    }
    println!("{pretty}");
    Ok(value)
}

// ---------------------------------------------------------------- import --

#[derive(Serialize)]
struct ImportOutput {
    summary: ParseSummary,
    snapshot: String,
    canonical_csv: Option<String>,
}

pub fn run_import(args: &ImportArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("import");
    let db = load_database(&args.db_args, &mut manifest)?;
    let out = require(args.out.clone(), "out")?;
    manifest.option("out", out.display());

    write_atomic(&out, db.to_snapshot_json().as_bytes())?;
    let canonical_path = match &args.canonical_csv {
        Some(path) => {
            write_atomic(path, db.to_canonical_csv().as_bytes())?;
            manifest.option("canonical-csv", path.display());
            Some(path.display().to_string())
        }
        None => None,
    };
    manifest.write_next_to(&out)?;
    log.info(&format!(
        "imported {} inventories / {} languages / {} segments",
        db.summary().inventories,
        db.summary().languages,
        db.summary().segments
    ));
    emit(
        &ImportOutput {
            summary: db.summary().clone(),
            snapshot: out.display().to_string(),
            canonical_csv: canonical_path,
        },
        None,
        &manifest,
    )?;
    Ok(())
}

// ---------------------------------------------------------- contrast-eval --

#[derive(Debug, Deserialize)]
struct ContrastConfig {
    contrast: ContrastSpec,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    realization: Option<RealizationParams<f64>>,
    #[serde(default)]
    hyper: Option<Hyper<f64>>,
    #[serde(default)]
    repeats: Option<usize>,
}

#[derive(Serialize)]
struct Fold {
    held_out: Vec<String>,
    train: Vec<String>,
    report: ConsistencyReport,
}

#[derive(Serialize)]
struct ContrastEvalOutput {
    contrast: ContrastSpec,
    mode: Mode,
    repeats: usize,
    folds: Vec<Fold>,
}

pub fn run_contrast_eval(args: &ContrastEvalArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("contrast-eval");
    let db = load_database(&args.db_args, &mut manifest)?;

    let config_path = resolve_input(&require(args.contrast_config.clone(), "contrast-config")?);
    manifest.input(&config_path)?;
    manifest.option("contrast-config", config_path.display());
    let config: ContrastConfig = serde_json::from_str(&fs::read_to_string(&config_path)?)?;
    config.contrast.validate(&db)?;

    let mode = match args.mode.as_deref() {
        Some("symbolic") => Mode::Symbolic,
        Some("synthetic") => Mode::Synthetic,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown mode `{other}` (expected symbolic|synthetic)"
            )))
        }
        None => config.mode.unwrap_or(Mode::Symbolic),
    };
    let mut realization = config.realization;
    if let Some(seed) = args.seed {
        if let Some(r) = realization.as_mut() {
            r.seed = seed;
        }
    }
    if let Some(r) = &realization {
        manifest.seed(r.seed);
    }
    let hyper = config.hyper.unwrap_or_default();
    let repeats = args.repeats.or(config.repeats).unwrap_or(1);
    manifest
        .option("mode", format!("{mode:?}").to_lowercase())
        .option("repeats", repeats);

    let folds = match (&args.train_languages, &args.test_languages) {
        (Some(train), Some(test)) => {
            let train = split_list(train);
            let test = split_list(test);
            manifest
                .option("train-languages", train.join(","))
                .option("test-languages", test.join(","));
            let report = evaluate_heldout(
                &db,
                &config.contrast,
                &train,
                &test,
                mode,
                realization.as_ref(),
                &hyper,
                repeats,
            )?;
            vec![Fold {
                held_out: test,
                train,
                report,
            }]
        }
        (None, None) => {
            let languages = split_list(&require(args.languages.clone(), "languages")?);
            manifest.option("languages", languages.join(","));
            let reports = leave_one_language_out(
                &db,
                &config.contrast,
                &languages,
                mode,
                realization.as_ref(),
                &hyper,
                repeats,
            )?;
            reports
                .into_iter()
                .enumerate()
                .map(|(i, report)| Fold {
                    held_out: vec![languages[i].clone()],
                    train: languages
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, l)| l.clone())
                        .collect(),
                    report,
                })
                .collect()
        }
        _ => {
            return Err(Error::Config(
                "--train-languages and --test-languages must be given together".into(),
            ))
        }
    };

    let macro_mean =
        folds.iter().map(|f| f.report.macro_accuracy).sum::<f64>() / folds.len() as f64;
    log.info(&format!(
        "{} fold(s), mean held-out accuracy {macro_mean:.4}",
        folds.len()
    ));
    emit(
        &ContrastEvalOutput {
            contrast: config.contrast,
            mode,
            repeats,
            folds,
        },
        args.out.as_deref(),
        &manifest,
    )?;
    Ok(())
}

// -------------------------------------------------------------- gen-stream --

#[derive(Serialize)]
struct GenStreamOutput {
    stream: String,
    truth: String,
    n_frames: usize,
    n_runs: usize,
    inventory: String,
}

pub fn run_gen_stream(args: &GenStreamArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("gen-stream");
    let db = load_database(&args.db_args, &mut manifest)?;
    let inventory_id = require(args.inventory_id.clone(), "inventory-id")?;
    let inventory = db.inventory(&inventory_id)?;
    let out = require(args.out.clone(), "out")?;
    let truth_path = args.truth.clone().unwrap_or_else(|| {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".truth.json");
        out.with_file_name(name)
    });
    let params = StreamGenParams {
        n_frames: require(args.frames, "frames")?,
        mean_run_length: args.mean_run_length.unwrap_or(8.0),
        mu_plus: args.mu_plus.unwrap_or(0.9),
        mu_minus: args.mu_minus.unwrap_or(0.1),
        noise_sigma: args.noise.unwrap_or(0.1),
        seed: require(args.seed, "seed")?,
        frame_period: 0.01,
    };
    manifest
        .option("inventory-id", &inventory_id)
        .option("frames", params.n_frames)
        .option("noise", params.noise_sigma)
        .option("mean-run-length", params.mean_run_length)
        .option("mu-plus", params.mu_plus)
        .option("mu-minus", params.mu_minus)
        .option("out", out.display())
        .option("truth", truth_path.display())
        .seed(params.seed);

    let (stream, truth) = generate_stream(&db, inventory, &params)?;
    let mut tsv = Vec::new();
    stream.write_tsv(&mut tsv)?;
    write_atomic(&out, &tsv)?;
    write_atomic(&truth_path, serde_json::to_string_pretty(&truth)?.as_bytes())?;
    manifest.write_next_to(&out)?;
    log.info(&format!(
        "generated {} frames over {} runs from {}",
        stream.len(),
        truth.runs.len(),
        inventory.label()
    ));
    emit(
        &GenStreamOutput {
            stream: out.display().to_string(),
            truth: truth_path.display().to_string(),
            n_frames: stream.len(),
            n_runs: truth.runs.len(),
            inventory: inventory.label(),
        },
        None,
        &manifest,
    )?;
    Ok(())
}

// ------------------------------------------------------------------ decode --

fn decode_params(
    switch_penalty: Option<f64>,
    top_k: Option<usize>,
    min_duration: Option<usize>,
    clamp_epsilon: Option<f64>,
) -> DecodeParams<f64> {
    DecodeParams {
        switch_penalty: switch_penalty.unwrap_or(0.0),
        top_k: top_k.unwrap_or(usize::MAX),
        min_duration: min_duration.unwrap_or(1),
        clamp_epsilon: clamp_epsilon.unwrap_or(1e-6),
    }
}

pub fn run_decode(args: &DecodeArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("decode");
    let db = load_database(&args.db_args, &mut manifest)?;
    let stream_path = resolve_input(&require(args.stream.clone(), "stream")?);
    manifest.input(&stream_path)?;
    let stream =
        FeatureStream::<f64>::read_tsv(BufReader::new(fs::File::open(&stream_path)?), 0.01)?;
    let inventory_id = require(args.inventory_id.clone(), "inventory-id")?;
    let inventory = db.inventory(&inventory_id)?;
    let params = decode_params(
        args.switch_penalty,
        args.top_k,
        args.min_duration,
        args.clamp_epsilon,
    );
    manifest
        .option("stream", stream_path.display())
        .option("inventory-id", &inventory_id)
        .option("switch-penalty", params.switch_penalty)
        .option("min-duration", params.min_duration)
        .option("clamp-epsilon", params.clamp_epsilon);
    if params.top_k != usize::MAX {
        manifest.option("top-k", params.top_k);
    }

    let alignment: Alignment<f64> = constrained_decode(&stream, &db, inventory, &params)?;
    log.info(&format!(
        "decoded {} frames into {} runs, total log score {:.4}",
        stream.len(),
        alignment.runs.len(),
        alignment.total_log_score
    ));
    emit(&alignment, args.out.as_deref(), &manifest)?;
    Ok(())
}

// --------------------------------------------------------- score-inventory --

#[derive(Serialize)]
struct CandidateScore {
    id: String,
    label: String,
    size: usize,
    score: InventoryScore<f64>,
}

#[derive(Serialize)]
struct ScoreInventoryOutput {
    lambda: f64,
    n_streams: usize,
    /// Sorted by penalized score, best first.
    candidates: Vec<CandidateScore>,
    best: String,
}

pub fn run_score_inventory(args: &ScoreInventoryArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("score-inventory");
    let db = load_database(&args.db_args, &mut manifest)?;
    let (stream_paths, streams) =
        load_streams(&require(args.streams.clone(), "streams")?, &mut manifest)?;
    let ids = split_list(&require(args.inventory_ids.clone(), "inventory-ids")?);
    if ids.is_empty() {
        return Err(Error::Config("no inventory ids given".into()));
    }
    let params = InductionParams {
        lambda: args.lambda.unwrap_or(DEFAULT_LAMBDA),
        max_size: usize::MAX - 1,
        epsilon_gain: 0.0,
        decode: decode_params(
            args.switch_penalty,
            args.top_k,
            args.min_duration,
            args.clamp_epsilon,
        ),
    };
    manifest
        .option("streams", stream_paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","))
        .option("inventory-ids", ids.join(","))
        .option("lambda", params.lambda);

    let mut candidates = Vec::new();
    for id in &ids {
        let inventory = db.inventory(id)?;
        let score = score_inventory(&db, &streams, inventory, &params)?;
        candidates.push(CandidateScore {
            id: inventory.id.to_string(),
            label: inventory.label(),
            size: inventory.len(),
            score,
        });
    }
    candidates.sort_by(|a, b| {
        b.score
            .penalized
            .partial_cmp(&a.score.penalized)
            .expect("finite scores")
            .then(a.id.cmp(&b.id))
    });
    let best = candidates[0].label.clone();
    log.info(&format!("best penalized fit: {best}"));
    emit(
        &ScoreInventoryOutput {
            lambda: params.lambda,
            n_streams: streams.len(),
            candidates,
            best,
        },
        args.out.as_deref(),
        &manifest,
    )?;
    Ok(())
}

// ------------------------------------------------------------------ induce --

#[derive(Serialize)]
struct InduceOutput {
    anchor: String,
    metric: String,
    k: usize,
    lambda: f64,
    max_size: usize,
    epsilon_gain: f64,
    ranked_languages: Vec<RankedLanguage>,
    pool: BTreeMap<String, f64>,
    trace: Vec<SelectionStep<f64>>,
    inventory: Vec<String>,
    score: InventoryScore<f64>,
    admissibility: AdmissibilityReport,
}

#[derive(Serialize)]
struct RankedLanguage {
    language: String,
    score: f64,
}

fn anchor_ranking(
    db: &TypologyDatabase,
    prior: &Option<PathBuf>,
    seed_language: &Option<String>,
    metric: SimilarityMetric,
    k: usize,
    manifest: &mut RunManifest,
) -> Result<(String, Vec<(String, f64)>)> {
    match (prior, seed_language) {
        (Some(path), None) => {
            let prior = load_prior(path, manifest)?;
            manifest.option("prior", path.display());
            let ranked = nearest_languages(db, Anchor::Prior(&prior), metric, k)?;
            Ok((format!("prior:{}", path.display()), ranked))
        }
        (None, Some(language)) => {
            manifest.option("seed-language", language);
            let seed: Inventory = db.language_union_inventory(language)?;
            let ranked = nearest_languages(db, Anchor::Seed(&seed), metric, k)?;
            Ok((format!("seed-language:{language}"), ranked))
        }
        _ => Err(Error::Config(
            "exactly one of --prior or --seed-language is required".into(),
        )),
    }
}

pub fn run_induce(args: &InduceArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("induce");
    let db = load_database(&args.db_args, &mut manifest)?;
    let (stream_paths, streams) =
        load_streams(&require(args.streams.clone(), "streams")?, &mut manifest)?;
    let metric = metric_from(args.metric.as_deref())?;
    let k = args.k.unwrap_or(5);
    let (anchor, ranked) =
        anchor_ranking(&db, &args.prior, &args.seed_language, metric, k, &mut manifest)?;
    let pool = build_candidate_pool(&db, &ranked)?;
    let params = InductionParams {
        lambda: args.lambda.unwrap_or(DEFAULT_LAMBDA),
        max_size: args.max_size.unwrap_or(24),
        epsilon_gain: args.epsilon_gain.unwrap_or(0.0),
        decode: decode_params(args.switch_penalty, None, None, None),
    };
    manifest
        .option("streams", stream_paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","))
        .option("metric", metric_name(metric).to_string())
        .option("k", k)
        .option("lambda", params.lambda)
        .option("max-size", params.max_size)
        .option("epsilon-gain", params.epsilon_gain);

    let (inventory, trace) = induce_inventory(&db, &streams, &pool, &params)?;
    let score = score_inventory(&db, &streams, &inventory, &params)?;
    let min_attestation = args.min_attestation.unwrap_or(1);
    let threshold = args.containment_threshold.unwrap_or(0.8);
    let (_, admissibility) = admissibility_filter(
        &inventory.glyphs,
        &db,
        min_attestation,
        AdmissibilityMode::CoOccurrence { threshold },
    )?;
    log.info(&format!(
        "induced {} segments, penalized score {:.4}, admissible: {}",
        inventory.len(),
        score.penalized,
        admissibility.admissible
    ));
    emit(
        &InduceOutput {
            anchor,
            metric: metric_name(metric).to_string(),
            k,
            lambda: params.lambda,
            max_size: params.max_size,
            epsilon_gain: params.epsilon_gain,
            ranked_languages: ranked
                .into_iter()
                .map(|(language, score)| RankedLanguage { language, score })
                .collect(),
            pool: pool.entries,
            trace,
            inventory: inventory.glyphs.into_iter().collect(),
            score,
            admissibility,
        },
        args.out.as_deref(),
        &manifest,
    )?;
    Ok(())
}

// ------------------------------------------------------------ nearest-langs --

#[derive(Serialize)]
struct NearestLangsOutput {
    anchor: String,
    metric: String,
    k: usize,
    ranking: Vec<RankedLanguage>,
}

pub fn run_nearest_langs(args: &NearestLangsArgs, log: &Logger) -> Result<()> {
    let mut manifest = RunManifest::new("nearest-langs");
    let db = load_database(&args.db_args, &mut manifest)?;
    let metric = metric_from(args.metric.as_deref())?;
    let k = args.k.unwrap_or(5);
    manifest
        .option("metric", metric_name(metric).to_string())
        .option("k", k);
    let (anchor, ranked) =
        anchor_ranking(&db, &args.prior, &args.seed_language, metric, k, &mut manifest)?;
    log.info(&format!("{} language(s) ranked", ranked.len()));
    emit(
        &NearestLangsOutput {
            anchor,
            metric: metric_name(metric).to_string(),
            k,
            ranking: ranked
                .into_iter()
                .map(|(language, score)| RankedLanguage { language, score })
                .collect(),
        },
        args.out.as_deref(),
        &manifest,
    )?;
    Ok(())
}
