//! Run configuration: one TOML file plus command-line overrides.
//!
//! ```toml
//! seed = 42
//! corpus_dir = "corpus"
//! output_dir = "out"
//! ratios = ["2/5", "3/5", "4/5"]
//! per_ratio_count = 750
//! jobs = 0                      # 0 uses every core
//!
//! [profile]
//! width = 32
//! height = 32
//!
//! [predictor]
//! kind = "builtin"              # or "external"
//! order = 3
//! smoothing = 0.1
//! policy = { mode = "greedy" }
//! # command = ["python3", "bridge.py", "--greedy"]
//! # timeout_ms = 60000
//!
//! [pool]
//! size = 100
//! decoy_dir = "decoys"          # format taken from each file extension
//! decoys = [{ format = "wav", path = "extra/tone.wav" }]
//! mix = { wav = 1.0, jpeg = 1.0 }
//!
//! [weights]
//! alpha = 0.01
//! beta = 10.0
//! gamma = 10.0
//!
//! [matching]
//! per_ratio_sample = 10
//! top_k = 5
//!
//! [train]
//! max_images = 0                # 0 trains on every held-out image
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragmenter::{DecoySource, FormatMix, ImageProfile, Ratio, SourceFormat, DEFAULT_POOL_SIZE};
use crate::matcher::{MatchWeights, DEFAULT_TOP_K};
use crate::predictor::{SamplingPolicy, DEFAULT_ORDER, DEFAULT_SMOOTHING, DEFAULT_TIMEOUT, MAX_ORDER};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config syntax: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredictorSpec {
    Builtin {
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default = "default_smoothing")]
        smoothing: f64,
        #[serde(default)]
        policy: SamplingPolicy,
    },
    External {
        command: Vec<String>,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        /// Recorded alongside predictions; the command line carries it to the predictor.
        #[serde(default)]
        decoding: Option<SamplingPolicy>,
    },
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_smoothing() -> f64 {
    DEFAULT_SMOOTHING
}

fn default_timeout_ms() -> u64 {
    DEFAULT_TIMEOUT.as_millis() as u64
}

impl Default for PredictorSpec {
    fn default() -> Self {
        PredictorSpec::Builtin {
            order: DEFAULT_ORDER,
            smoothing: DEFAULT_SMOOTHING,
            policy: SamplingPolicy::greedy(),
        }
    }
}

impl PredictorSpec {
    pub fn timeout(&self) -> Duration {
        match self {
            PredictorSpec::External { timeout_ms, .. } => Duration::from_millis(*timeout_ms),
            PredictorSpec::Builtin { .. } => DEFAULT_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoySpec {
    pub format: SourceFormat,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoolSpec {
    pub size: usize,
    pub decoy_dir: Option<PathBuf>,
    pub decoys: Vec<DecoySpec>,
    pub mix: Option<FormatMix>,
}

impl Default for PoolSpec {
    fn default() -> Self {
        PoolSpec {
            size: DEFAULT_POOL_SIZE,
            decoy_dir: None,
            decoys: Vec::new(),
            mix: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSpec {
    pub per_ratio_sample: usize,
    pub top_k: usize,
}

impl Default for MatchingSpec {
    fn default() -> Self {
        MatchingSpec {
            per_ratio_sample: 10,
            top_k: DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSpec {
    pub max_images: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub ratios: Vec<Ratio>,
    pub per_ratio_count: usize,
    pub jobs: usize,
    pub profile: ImageProfile,
    pub predictor: PredictorSpec,
    pub pool: PoolSpec,
    pub weights: MatchWeights,
    pub matching: MatchingSpec,
    pub train: TrainSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            corpus_dir: PathBuf::from("corpus"),
            output_dir: PathBuf::from("out"),
            ratios: Ratio::standard_set(),
            per_ratio_count: 750,
            jobs: 0,
            profile: ImageProfile::default(),
            predictor: PredictorSpec::default(),
            pool: PoolSpec::default(),
            weights: MatchWeights::default(),
            matching: MatchingSpec::default(),
            train: TrainSpec::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses TOML, resolving relative paths against `base`. Does not validate.
    pub fn from_toml(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.corpus_dir);
        fix(&mut cfg.output_dir);
        if let Some(d) = cfg.pool.decoy_dir.as_mut() {
            fix(d);
        }
        for d in &mut cfg.pool.decoys {
            fix(&mut d.path);
        }
        Ok(cfg)
    }

    /// Reads `path` (or starts from defaults), applies overrides, validates.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                let base = p.parent().unwrap_or(Path::new(""));
                RunConfig::from_toml(&text, base)?
            }
            None => RunConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(d) = &o.corpus_dir {
            self.corpus_dir = d.clone();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.corpus_dir.is_dir() {
            return invalid(format!(
                "corpus_dir {} is not a directory",
                self.corpus_dir.display()
            ));
        }
        if self.ratios.is_empty() {
            return invalid("no ratios");
        }
        for (i, a) in self.ratios.iter().enumerate() {
            for b in &self.ratios[..i] {
                if a.num() as u64 * b.den() as u64 == b.num() as u64 * a.den() as u64 {
                    return invalid(format!("ratios {b} and {a} are equal"));
                }
            }
        }
        if self.per_ratio_count == 0 {
            return invalid("per_ratio_count must be positive");
        }
        if self.profile.width == 0 || self.profile.height == 0 {
            return invalid("empty image profile");
        }
        match &self.predictor {
            PredictorSpec::Builtin {
                order,
                smoothing,
                policy,
            } => {
                if *order > MAX_ORDER {
                    return invalid(format!("order {order} exceeds {MAX_ORDER}"));
                }
                if !(*smoothing > 0.0 && smoothing.is_finite()) {
                    return invalid(format!("smoothing {smoothing}"));
                }
                policy
                    .validate()
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
            PredictorSpec::External {
                command, timeout_ms, ..
            } => {
                if command.is_empty() {
                    return invalid("external predictor command is empty");
                }
                if *timeout_ms == 0 {
                    return invalid("timeout_ms must be positive");
                }
            }
        }
        if self.pool.size < 2 {
            return invalid(format!("pool size {} is below 2", self.pool.size));
        }
        if let Some(d) = &self.pool.decoy_dir {
            if !d.is_dir() {
                return invalid(format!("decoy_dir {} is not a directory", d.display()));
            }
        }
        if let Some(d) = self.pool.decoys.iter().find(|d| !d.path.is_file()) {
            return invalid(format!("decoy {} does not exist", d.path.display()));
        }
        if let Some(mix) = &self.pool.mix {
            if mix.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return invalid("mix weights must be finite and non-negative");
            }
        }
        self.weights
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.matching.per_ratio_sample == 0 || self.matching.top_k == 0 {
            return invalid("matching sample and top_k must be positive");
        }
        Ok(())
    }

    /// Every configured decoy file, directory entries first (sorted by name).
    pub fn decoy_files(&self) -> Result<Vec<(SourceFormat, PathBuf)>, ConfigError> {
        let mut out = Vec::new();
        if let Some(dir) = &self.pool.decoy_dir {
            let rd = fs::read_dir(dir).map_err(|source| ConfigError::Read {
                path: dir.clone(),
                source,
            })?;
            let mut paths: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            for p in paths {
                let fmt = p
                    .extension()
                    .and_then(|e| e.to_str())
                    .and_then(|e| e.parse().ok());
                if let Some(fmt) = fmt {
                    out.push((fmt, p));
                }
            }
        }
        out.extend(self.pool.decoys.iter().map(|d| (d.format, d.path.clone())));
        Ok(out)
    }

    pub fn load_decoys(&self) -> Result<Vec<DecoySource>, ConfigError> {
        self.decoy_files()?
            .into_iter()
            .map(|(f, p)| DecoySource::load(f, &p).map_err(|e| ConfigError::Invalid(e.to_string())))
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
