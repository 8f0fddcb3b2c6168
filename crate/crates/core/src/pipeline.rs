//! The four carving phases as resumable steps over one output directory.
//!
//! ```text
//! <out>/manifest.json, <out>/<tag>/{full,input,real}/<id>.bin   prepare
//! <out>/model.cgbm, <out>/model.json                              train
//! <out>/predictions/index.json, <out>/predictions/<tag>/<id>.bin  predict
//! <out>/analysis/...                                              analyze
//! <out>/match/...                                                 match
//! <out>/report.txt                                                report
//! <out>/run.log                                                   every step
//! ```
//!
//! Everything except `run.log` is a pure function of the config and seed.

use std::collections::{HashMap, HashSet};
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, PredictorSpec, RunConfig};
use crate::digest::sha256_hex;
use crate::fragmenter::{
    self, build_pool, load_corpus, load_dataset, read_manifest, DatasetManifest, FragmentError,
    FragmentRecord, SourceFormat,
};
use crate::matcher::{self, MatchError, PoolRanking};
use crate::metrics::{self, heatmap_csv, heatmap_pgm, MetricError, DEFAULT_WINDOW};
use crate::predictor::{self, ByteModel, ExternalPredictor, PredictError, SamplingPolicy};
use crate::report::{self, ReportSections};
use crate::rng::{stream_seed, SeededRng};
use crate::stats::{self, Metric, MetricSummary, StatsError};

pub const MODEL_FILE: &str = "model.cgbm";
pub const MODEL_INFO_FILE: &str = "model.json";
pub const PREDICTIONS_DIR: &str = "predictions";
pub const PREDICTION_INDEX: &str = "index.json";
pub const ANALYSIS_DIR: &str = "analysis";
pub const MATCH_DIR: &str = "match";
pub const REPORT_FILE: &str = "report.txt";
pub const LOG_FILE: &str = "run.log";

/// Predicted continuations keyed by (ratio tag, source id).
pub type PredictionMap = HashMap<(String, String), Vec<u8>>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Missing(String),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// Result of a step that may fail per record without aborting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub processed: usize,
    /// `"<tag>/<id>: <message>"` per failed record, in output order.
    pub errors: Vec<String>,
}

impl Outcome {
    pub fn is_partial(&self) -> bool {
        !self.errors.is_empty()
    }
}

/// 0 success, 1 some records failed, 2 configuration or I/O failure.
pub fn exit_code(result: &Result<Outcome, PipelineError>) -> i32 {
    match result {
        Ok(o) if o.is_partial() => 1,
        Ok(_) => 0,
        Err(_) => 2,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

fn reset_dir(dir: &Path) -> Result<(), PipelineError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Appends a timestamped line to `<out>/run.log`. Failures are ignored.
pub fn log(cfg: &RunConfig, message: &str) {
    let _ = fs::create_dir_all(&cfg.output_dir);
    let t = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    if let Ok(mut f) = OpenOptions::new()
        .create(true)
        .append(true)
        .open(cfg.output_dir.join(LOG_FILE))
    {
        let _ = writeln!(f, "[{}.{:03}] {message}", t.as_secs(), t.subsec_millis());
    }
}

fn worker_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
}

fn workers(jobs: usize) -> usize {
    if jobs == 0 {
        thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        jobs
    }
}

pub fn cmd_prepare(cfg: &RunConfig) -> Result<DatasetManifest, PipelineError> {
    log(cfg, "prepare: start");
    let manifest = worker_pool(cfg.jobs).install(|| {
        fragmenter::build_dataset(
            &cfg.corpus_dir,
            &cfg.output_dir,
            &cfg.ratios,
            cfg.per_ratio_count,
            cfg.seed,
            cfg.profile,
        )
    })?;
    log(cfg, &format!("prepare: {} records", manifest.record_count()));
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_id: String,
    pub order: usize,
    pub smoothing: f64,
    pub training_images: Vec<String>,
}

/// Trains the order-k model on corpus images that no ratio set selected.
pub fn cmd_train(cfg: &RunConfig) -> Result<ByteModel, PipelineError> {
    log(cfg, "train: start");
    let (order, smoothing) = match cfg.predictor {
        PredictorSpec::Builtin { order, smoothing, .. } => (order, smoothing),
        PredictorSpec::External { .. } => (predictor::DEFAULT_ORDER, predictor::DEFAULT_SMOOTHING),
    };
    let manifest = read_manifest(&cfg.output_dir)?;
    let used = manifest.source_ids();
    let corpus = worker_pool(cfg.jobs).install(|| load_corpus(&cfg.corpus_dir, manifest.profile))?;
    let mut held_out: Vec<_> = corpus
        .iter()
        .filter(|c| !used.contains(c.source_id.as_str()))
        .collect();
    if cfg.train.max_images > 0 {
        held_out.truncate(cfg.train.max_images);
    }
    if held_out.is_empty() {
        return Err(PipelineError::Missing(format!(
            "no held-out images to train on: the corpus has {} images and the dataset uses {}",
            corpus.len(),
            used.len()
        )));
    }
    let bytes: Vec<&[u8]> = held_out.iter().map(|c| c.bytes.as_slice()).collect();
    let model = predictor::train(&bytes, order, smoothing)?;
    write(&cfg.output_dir.join(MODEL_FILE), predictor::save_model(&model))?;
    let info = ModelInfo {
        model_id: predictor::model_id(&model),
        order,
        smoothing,
        training_images: held_out.iter().map(|c| c.source_id.clone()).collect(),
    };
    write(
        &cfg.output_dir.join(MODEL_INFO_FILE),
        serde_json::to_string_pretty(&info)? + "\n",
    )?;
    log(
        cfg,
        &format!("train: {} on {} images", info.model_id, held_out.len()),
    );
    Ok(model)
}

pub fn load_trained_model(out: &Path) -> Result<ByteModel, PipelineError> {
    let path = out.join(MODEL_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    Ok(predictor::load_model(&bytes)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub source_id: String,
    pub length: usize,
    pub sha256: Option<String>,
    pub policy: Option<SamplingPolicy>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub tag: String,
    pub entries: Vec<PredictionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionIndex {
    pub predictor_id: String,
    pub sets: Vec<PredictionSet>,
}

/// Decoding policy for one record. Sampling seeds derive from the root seed,
/// the configured policy seed and the record identity.
pub fn record_policy(root: u64, policy: &SamplingPolicy, tag: &str, id: &str) -> SamplingPolicy {
    if policy.is_greedy() {
        return *policy;
    }
    SamplingPolicy {
        mode: policy.mode,
        seed: stream_seed(root, &format!("decode/{}/{tag}/{id}", policy.seed)),
    }
}

type Prediction = Result<Vec<u8>, String>;

fn predict_external(
    records: &[(usize, &FragmentRecord)],
    command: &[String],
    timeout: std::time::Duration,
    jobs: usize,
) -> Vec<Prediction> {
    let n = workers(jobs).min(records.len()).max(1);
    let chunk = records.len().div_ceil(n).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = records
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut conn: Option<ExternalPredictor> = None;
                    part.iter()
                        .map(|(_, rec)| {
                            if conn.as_ref().is_none_or(|c| !c.is_open()) {
                                conn = Some(
                                    ExternalPredictor::spawn(command, timeout).map_err(|e| e.to_string())?,
                                );
                            }
                            let p = conn.as_mut().expect("connected");
                            p.predict(rec.input_fragment(), rec.continuation_len())
                                .map_err(|e| e.to_string())
                        })
                        .collect::<Vec<Prediction>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("predictor worker"))
            .collect()
    })
}

/// Predicts every record's continuation. Failed records are listed in the
/// index with their error and do not stop the run.
pub fn cmd_predict(cfg: &RunConfig) -> Result<Outcome, PipelineError> {
    log(cfg, "predict: start");
    let (manifest, sets) = load_dataset(&cfg.output_dir)?;
    let flat: Vec<(usize, &FragmentRecord)> = sets
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().map(move |r| (i, r)))
        .collect();

    let (predictor_id, policies, results): (String, Vec<Option<SamplingPolicy>>, Vec<Prediction>) = match &cfg
        .predictor
    {
        PredictorSpec::Builtin { policy, .. } => {
            let model = load_trained_model(&cfg.output_dir)?;
            let policies: Vec<SamplingPolicy> = flat
                .iter()
                .map(|(i, r)| record_policy(cfg.seed, policy, &manifest.ratio_sets[*i].tag, r.source_id()))
                .collect();
            let results = worker_pool(cfg.jobs).install(|| {
                flat.par_iter()
                    .zip(&policies)
                    .map(|((_, r), p)| {
                        predictor::predict(&model, r.input_fragment(), r.continuation_len(), p)
                            .map_err(|e| e.to_string())
                    })
                    .collect()
            });
            (
                predictor::model_id(&model),
                policies.into_iter().map(Some).collect(),
                results,
            )
        }
        PredictorSpec::External {
            command, decoding, ..
        } => {
            let results = predict_external(&flat, command, cfg.predictor.timeout(), cfg.jobs);
            (
                format!("external:{}", command.join(" ")),
                vec![*decoding; flat.len()],
                results,
            )
        }
    };

    let dir = cfg.output_dir.join(PREDICTIONS_DIR);
    reset_dir(&dir)?;
    let mut index = PredictionIndex {
        predictor_id,
        sets: manifest
            .ratio_sets
            .iter()
            .map(|s| PredictionSet {
                tag: s.tag.clone(),
                entries: Vec::new(),
            })
            .collect(),
    };
    let mut outcome = Outcome::default();
    for (((set, rec), policy), result) in flat.iter().zip(policies).zip(results) {
        let tag = &manifest.ratio_sets[*set].tag;
        let (sha256, error) = match result {
            Ok(bytes) => {
                write(&dir.join(tag).join(format!("{}.bin", rec.source_id())), &bytes)?;
                outcome.processed += 1;
                (Some(sha256_hex(&bytes)), None)
            }
            Err(e) => {
                outcome.errors.push(format!("{tag}/{}: {e}", rec.source_id()));
                (None, Some(e))
            }
        };
        index.sets[*set].entries.push(PredictionEntry {
            source_id: rec.source_id().to_string(),
            length: rec.continuation_len(),
            sha256,
            policy,
            error,
        });
    }
    write(
        &dir.join(PREDICTION_INDEX),
        serde_json::to_string_pretty(&index)? + "\n",
    )?;
    log(
        cfg,
        &format!(
            "predict: {} ok, {} failed",
            outcome.processed,
            outcome.errors.len()
        ),
    );
    Ok(outcome)
}

/// Successful predictions keyed by `(tag, source_id)`, digests verified.
pub fn load_predictions(out: &Path) -> Result<(PredictionIndex, PredictionMap), PipelineError> {
    let dir = out.join(PREDICTIONS_DIR);
    let path = dir.join(PREDICTION_INDEX);
    let index: PredictionIndex = serde_json::from_str(&fs::read_to_string(&path).map_err(io_err(&path))?)?;
    let mut map = HashMap::new();
    for set in &index.sets {
        for e in &set.entries {
            let Some(expected) = &e.sha256 else { continue };
            let p = dir.join(&set.tag).join(format!("{}.bin", e.source_id));
            let bytes = fs::read(&p).map_err(io_err(&p))?;
            if &sha256_hex(&bytes) != expected {
                return Err(FragmentError::DigestMismatch {
                    file: p,
                    expected: expected.clone(),
                    actual: sha256_hex(&bytes),
                }
                .into());
            }
            map.insert((set.tag.clone(), e.source_id.clone()), bytes);
        }
    }
    Ok((index, map))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub tag: String,
    pub source_id: String,
    pub chi_square: f64,
    pub cosine: f64,
    pub jsd: f64,
    pub ssim: f64,
}

impl MetricRow {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::ChiSquare => self.chi_square,
            Metric::Cosine => self.cosine,
            Metric::Jsd => self.jsd,
            Metric::Ssim => self.ssim,
        }
    }
}

pub fn score_record(tag: &str, rec: &FragmentRecord, predicted: &[u8]) -> Result<MetricRow, MetricError> {
    let b = metrics::byte_scores(predicted, rec.real_fragment())?;
    let s = metrics::fragment_ssim(rec, predicted, DEFAULT_WINDOW)?;
    Ok(MetricRow {
        tag: tag.to_string(),
        source_id: rec.source_id().to_string(),
        chi_square: b.chi_square,
        cosine: b.cosine,
        jsd: b.jsd,
        ssim: s.global,
    })
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Record id (optionally `<tag>/<id>`) to emit an SSIM heatmap for.
    pub heatmap: Option<String>,
    /// Record id (optionally `<tag>/<id>`) to emit reconstruction panels for.
    pub reconstruct: Option<String>,
}

fn find_record<'a>(
    manifest: &DatasetManifest,
    sets: &'a [Vec<FragmentRecord>],
    key: &str,
) -> Result<(String, &'a FragmentRecord), PipelineError> {
    let (tag, id) = match key.split_once('/') {
        Some((t, i)) => (Some(t), i),
        None => (None, key),
    };
    for (s, recs) in manifest.ratio_sets.iter().zip(sets) {
        if tag.is_some_and(|t| t != s.tag) {
            continue;
        }
        if let Some(r) = recs.iter().find(|r| r.source_id() == id) {
            return Ok((s.tag.clone(), r));
        }
    }
    Err(PipelineError::Missing(format!("no record {key}")))
}

/// Scores every prediction against its real fragment and writes per-record
/// metrics, per-set summaries and distribution files.
pub fn cmd_analyze(cfg: &RunConfig, opts: &AnalyzeOptions) -> Result<Outcome, PipelineError> {
    log(cfg, "analyze: start");
    let (manifest, sets) = load_dataset(&cfg.output_dir)?;
    let (index, predictions) = load_predictions(&cfg.output_dir)?;
    let dir = cfg.output_dir.join(ANALYSIS_DIR);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let mut outcome = Outcome::default();
    for set in &index.sets {
        for e in &set.entries {
            if let Some(err) = &e.error {
                outcome
                    .errors
                    .push(format!("{}/{}: prediction failed: {err}", set.tag, e.source_id));
            }
        }
    }

    let mut rows: Vec<MetricRow> = Vec::new();
    for (s, recs) in manifest.ratio_sets.iter().zip(&sets) {
        let scored: Vec<Result<MetricRow, String>> = worker_pool(cfg.jobs).install(|| {
            recs.par_iter()
                .filter_map(|r| {
                    let p = predictions.get(&(s.tag.clone(), r.source_id().to_string()))?;
                    Some(score_record(&s.tag, r, p).map_err(|e| format!("{}/{}: {e}", s.tag, r.source_id())))
                })
                .collect()
        });
        for r in scored {
            match r {
                Ok(row) => rows.push(row),
                Err(e) => outcome.errors.push(e),
            }
        }
    }
    outcome.processed = rows.len();

    let mut csv = String::from("set,source_id,chi_square,cosine,jsd,ssim\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.tag, r.source_id, r.chi_square, r.cosine, r.jsd, r.ssim
        ));
    }
    write(&dir.join("metrics.csv"), csv)?;

    let tags: Vec<String> = manifest.ratio_sets.iter().map(|s| s.tag.clone()).collect();
    let dist = dir.join("dist");
    reset_dir(&dist)?;
    let mut summaries: Vec<MetricSummary> = Vec::new();
    for m in Metric::ALL {
        for tag in &tags {
            let values: Vec<f64> = rows.iter().filter(|r| &r.tag == tag).map(|r| r.get(m)).collect();
            match stats::summarize(&values, m, tag) {
                Ok(s) => {
                    stats::export_distribution(&values, m, tag, &dist)?;
                    summaries.push(s);
                }
                Err(e) => outcome.errors.push(format!("{tag}: {m} summary: {e}")),
            }
        }
    }
    write(&dir.join("summary.csv"), stats::summary_csv(&summaries))?;
    let mut table = String::new();
    for (i, s) in manifest.ratio_sets.iter().enumerate() {
        table.push_str(&format!("P{} = {} (input ratio {})\n", i + 1, s.tag, s.ratio));
    }
    table.push('\n');
    table.push_str(&stats::summary_table(&summaries, &tags));
    write(&dir.join("summary.txt"), table)?;

    if let Some(key) = &opts.heatmap {
        let (tag, rec) = find_record(&manifest, &sets, key)?;
        let p = predictions
            .get(&(tag.clone(), rec.source_id().to_string()))
            .ok_or_else(|| PipelineError::Missing(format!("no prediction for {tag}/{}", rec.source_id())))?;
        let res = metrics::fragment_ssim(rec, p, DEFAULT_WINDOW)?;
        let stem = format!("heatmap_{tag}_{}", rec.source_id());
        write(&dir.join(format!("{stem}.pgm")), heatmap_pgm(&res.local_map))?;
        write(&dir.join(format!("{stem}.csv")), heatmap_csv(&res.local_map))?;
    }
    if let Some(key) = &opts.reconstruct {
        let (tag, rec) = find_record(&manifest, &sets, key)?;
        let p = predictions
            .get(&(tag.clone(), rec.source_id().to_string()))
            .ok_or_else(|| PipelineError::Missing(format!("no prediction for {tag}/{}", rec.source_id())))?;
        let out = dir.join(format!("reconstruct_{tag}_{}", rec.source_id()));
        for (name, bytes) in report::reconstruction_panels(rec, p)? {
            write(&out.join(format!("{name}.bmp")), bytes)?;
        }
    }
    log(
        cfg,
        &format!(
            "analyze: {} scored, {} issues",
            outcome.processed,
            outcome.errors.len()
        ),
    );
    Ok(outcome)
}

#[derive(Debug, Clone, Default)]
pub struct MatchOptions {
    /// Records per ratio set; defaults to the configured sample size.
    pub sample: Option<usize>,
    /// Substitute each real fragment for its prediction.
    pub perfect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledRecord {
    pub tag: String,
    pub source_id: String,
    pub true_index: usize,
    pub true_rank: usize,
}

/// Picks up to `n` records per set with the "sample" stream.
pub fn sample_records(
    seed: u64,
    manifest: &DatasetManifest,
    eligible: &dyn Fn(&str, &str) -> bool,
    n: usize,
) -> Vec<(usize, Vec<String>)> {
    let mut rng = SeededRng::stream(seed, "sample");
    manifest
        .ratio_sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut ids: Vec<String> = s
                .records
                .iter()
                .map(|r| r.source_id.clone())
                .filter(|id| eligible(&s.tag, id))
                .collect();
            rng.shuffle(&mut ids);
            ids.truncate(n);
            ids.sort();
            (i, ids)
        })
        .collect()
}

/// Ranks a seeded sample of predictions against mixed-format pools.
pub fn cmd_match(cfg: &RunConfig, opts: &MatchOptions) -> Result<Outcome, PipelineError> {
    log(
        cfg,
        &format!(
            "match: start{}",
            if opts.perfect { " (perfect predictor)" } else { "" }
        ),
    );
    let (manifest, sets) = load_dataset(&cfg.output_dir)?;
    let decoys = cfg.load_decoys()?;
    if decoys.is_empty() {
        return Err(PipelineError::Missing("no decoy sources configured".into()));
    }
    let predictions = if opts.perfect {
        HashMap::new()
    } else {
        load_predictions(&cfg.output_dir)?.1
    };
    let n = opts.sample.unwrap_or(cfg.matching.per_ratio_sample);
    let eligible =
        |tag: &str, id: &str| opts.perfect || predictions.contains_key(&(tag.to_string(), id.to_string()));
    let chosen = sample_records(cfg.seed, &manifest, &eligible, n);

    let mut jobs: Vec<(String, &FragmentRecord)> = Vec::new();
    for (i, ids) in &chosen {
        let tag = &manifest.ratio_sets[*i].tag;
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        jobs.extend(
            sets[*i]
                .iter()
                .filter(|r| wanted.contains(r.source_id()))
                .map(|r| (tag.clone(), r)),
        );
    }

    let results: Vec<Result<(PoolRanking, String), String>> = worker_pool(cfg.jobs).install(|| {
        jobs.par_iter()
            .map(|(tag, rec)| {
                let predicted: &[u8] = if opts.perfect {
                    rec.real_fragment()
                } else {
                    &predictions[&(tag.clone(), rec.source_id().to_string())]
                };
                let seed = stream_seed(cfg.seed, &format!("pool/{tag}/{}", rec.source_id()));
                let pool = build_pool(
                    rec.real_fragment(),
                    SourceFormat::Bmp,
                    &decoys,
                    cfg.pool.size,
                    cfg.pool.mix.as_ref(),
                    seed,
                )
                .map_err(|e| format!("{tag}/{}: {e}", rec.source_id()))?;
                let id = format!("{tag}/{}", rec.source_id());
                let ranking = matcher::rank_pool(&id, predicted, &pool, &cfg.weights)
                    .map_err(|e| format!("{id}: {e}"))?;
                let csv = matcher::ranking_csv(&ranking, &pool);
                Ok((ranking, csv))
            })
            .collect()
    });

    let dir = cfg.output_dir.join(MATCH_DIR);
    reset_dir(&dir)?;
    let mut outcome = Outcome::default();
    let mut rankings = Vec::new();
    let mut sampled = Vec::new();
    for ((tag, rec), r) in jobs.iter().zip(results) {
        match r {
            Ok((ranking, csv)) => {
                write(
                    &dir.join("rankings")
                        .join(tag)
                        .join(format!("{}.csv", rec.source_id())),
                    csv,
                )?;
                sampled.push(SampledRecord {
                    tag: tag.clone(),
                    source_id: rec.source_id().to_string(),
                    true_index: ranking.true_index,
                    true_rank: ranking.true_rank,
                });
                rankings.push(ranking);
            }
            Err(e) => outcome.errors.push(e),
        }
    }
    outcome.processed = rankings.len();
    write(
        &dir.join("sample.json"),
        serde_json::to_string_pretty(&sampled)? + "\n",
    )?;
    if !rankings.is_empty() {
        let t = matcher::tally(&rankings, cfg.matching.top_k)?;
        write(&dir.join("tally.csv"), matcher::tally_csv(&t))?;
        write(&dir.join("tally.txt"), matcher::tally_text(&t))?;
        log(
            cfg,
            &format!(
                "match: rank1 {} / top{} {} / missed {} of {}",
                t.rank1_count, t.top_k, t.top5_not1_count, t.missed_count, t.total
            ),
        );
    }
    Ok(outcome)
}

fn read_optional(path: &Path) -> Option<String> {
    fs::read_to_string(path).ok()
}

/// Collects whatever earlier steps produced into `<out>/report.txt`.
pub fn cmd_report(cfg: &RunConfig) -> Result<Outcome, PipelineError> {
    let out = &cfg.output_dir;
    let dataset = read_manifest(out).ok().map(|m| {
        let mut s = format!("seed {}, {} records\n", m.seed, m.record_count());
        for set in &m.ratio_sets {
            s.push_str(&format!(
                "{:<12} ratio {:<5} {} records\n",
                set.tag,
                set.ratio.to_string(),
                set.records.len()
            ));
        }
        s
    });
    let predictor = read_optional(&out.join(PREDICTIONS_DIR).join(PREDICTION_INDEX))
        .and_then(|t| serde_json::from_str::<PredictionIndex>(&t).ok())
        .map(|idx| {
            let total: usize = idx.sets.iter().map(|s| s.entries.len()).sum();
            let failed: usize = idx
                .sets
                .iter()
                .flat_map(|s| &s.entries)
                .filter(|e| e.error.is_some())
                .count();
            format!("{}\n{} predictions, {} failed\n", idx.predictor_id, total, failed)
        });
    let sections = ReportSections {
        dataset,
        predictor,
        summary: read_optional(&out.join(ANALYSIS_DIR).join("summary.txt")),
        tally: read_optional(&out.join(MATCH_DIR).join("tally.txt")),
    };
    write(&out.join(REPORT_FILE), report::render_report(&sections))?;
    log(cfg, "report: written");
    Ok(Outcome::default())
}
