use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PredictError;
use crate::rng::SeededRng;

/// Longest supported context; contexts are packed into a `u64` key.
pub const MAX_ORDER: usize = 8;
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// Successor counts observed after one context, sorted by byte value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Successors {
    pub(crate) total: u64,
    pub(crate) counts: Vec<(u8, u32)>,
}

impl Successors {
    fn add(&mut self, byte: u8) {
        self.total += 1;
        match self.counts.binary_search_by_key(&byte, |&(b, _)| b) {
            Ok(i) => self.counts[i].1 += 1,
            Err(i) => self.counts.insert(i, (byte, 1)),
        }
    }

    pub(crate) fn count(&self, byte: u8) -> u32 {
        self.counts
            .binary_search_by_key(&byte, |&(b, _)| b)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }
}

/// Packs up to eight context bytes into a key; the level table fixes the length.
pub(crate) fn context_key(ctx: &[u8]) -> u64 {
    ctx.iter().fold(0u64, |k, &b| (k << 8) | b as u64)
}

/// Count-based order-k byte model with additive smoothing and longest-match
/// backoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ByteModel {
    pub(crate) order: usize,
    pub(crate) smoothing: f64,
    pub(crate) training_digest: [u8; 32],
    /// `levels[j]` holds contexts of exactly `j` bytes.
    pub(crate) levels: Vec<HashMap<u64, Successors>>,
}

/// Counts every (context, next byte) pair for context lengths `0..=order`,
/// including the short contexts at the start of each item.
pub fn train<T: AsRef<[u8]>>(corpus: &[T], order: usize, smoothing: f64) -> Result<ByteModel, PredictError> {
    if order > MAX_ORDER {
        return Err(PredictError::InvalidOrder(order));
    }
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(PredictError::InvalidSmoothing(smoothing));
    }
    if corpus.iter().all(|item| item.as_ref().is_empty()) {
        return Err(PredictError::EmptyCorpus);
    }
    let mut levels: Vec<HashMap<u64, Successors>> = vec![HashMap::new(); order + 1];
    let mut digest = Sha256::new();
    for item in corpus {
        let bytes = item.as_ref();
        digest.update((bytes.len() as u64).to_le_bytes());
        digest.update(bytes);
        for (i, &next) in bytes.iter().enumerate() {
            for (j, level) in levels.iter_mut().enumerate().take(order.min(i) + 1) {
                level.entry(context_key(&bytes[i - j..i])).or_default().add(next);
            }
        }
    }
    Ok(ByteModel {
        order,
        smoothing,
        training_digest: digest.finalize().into(),
        levels,
    })
}

impl ByteModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn training_digest(&self) -> &[u8; 32] {
        &self.training_digest
    }

    /// Number of distinct contexts stored at each length.
    pub fn context_counts(&self) -> Vec<usize> {
        self.levels.iter().map(HashMap::len).collect()
    }

    /// Raw successor count of `next` after exactly `context`.
    pub fn count(&self, context: &[u8], next: u8) -> u32 {
        self.levels
            .get(context.len())
            .and_then(|l| l.get(&context_key(context)))
            .map_or(0, |s| s.count(next))
    }

    /// The longest suffix of `history` (up to the model order) seen in training.
    fn lookup(&self, history: &[u8]) -> Option<(usize, &Successors)> {
        let max = self.order.min(history.len());
        (0..=max).rev().find_map(|j| {
            self.levels[j]
                .get(&context_key(&history[history.len() - j..]))
                .filter(|s| s.total > 0)
                .map(|s| (j, s))
        })
    }

    /// Length of the context the model backs off to for `history`.
    pub fn context_len_used(&self, history: &[u8]) -> usize {
        self.lookup(history).map_or(0, |(j, _)| j)
    }

    /// Smoothed next-byte distribution after `history`:
    /// `(count + a) / (total + 256 a)` at the longest seen context.
    pub fn distribution(&self, history: &[u8]) -> [f64; 256] {
        let a = self.smoothing;
        let mut p = [0.0; 256];
        match self.lookup(history) {
            Some((_, s)) => {
                let denom = s.total as f64 + 256.0 * a;
                p.fill(a / denom);
                for &(b, c) in &s.counts {
                    p[b as usize] = (c as f64 + a) / denom;
                }
            }
            None => p.fill(1.0 / 256.0),
        }
        p
    }

    fn greedy_next(&self, history: &[u8]) -> u8 {
        match self.lookup(history) {
            // first maximum wins, so ties go to the smaller byte value
            Some((_, s)) => {
                s.counts
                    .iter()
                    .fold(
                        (0u8, 0u32),
                        |best, &(b, c)| if c > best.1 { (b, c) } else { best },
                    )
                    .0
            }
            None => 0,
        }
    }
}

/// Decoding rule for [`predict`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DecodeMode {
    Greedy,
    Temperature { temperature: f64 },
    TopK { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    #[serde(flatten)]
    pub mode: DecodeMode,
    /// Ignored by greedy decoding.
    #[serde(default)]
    pub seed: u64,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        SamplingPolicy::greedy()
    }
}

impl SamplingPolicy {
    pub fn greedy() -> SamplingPolicy {
        SamplingPolicy {
            mode: DecodeMode::Greedy,
            seed: 0,
        }
    }

    pub fn temperature(temperature: f64, seed: u64) -> SamplingPolicy {
        SamplingPolicy {
            mode: DecodeMode::Temperature { temperature },
            seed,
        }
    }

    pub fn top_k(k: usize, seed: u64) -> SamplingPolicy {
        SamplingPolicy {
            mode: DecodeMode::TopK { k },
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), PredictError> {
        match self.mode {
            DecodeMode::Temperature { temperature } if !(temperature > 0.0 && temperature.is_finite()) => {
                Err(PredictError::InvalidPolicy(format!("temperature {temperature}")))
            }
            DecodeMode::TopK { k } if k == 0 || k > 256 => {
                Err(PredictError::InvalidPolicy(format!("top-k with k = {k}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_greedy(&self) -> bool {
        matches!(self.mode, DecodeMode::Greedy)
    }
}

fn sample_weighted(rng: &mut SeededRng, weights: &[(u8, f64)]) -> u8 {
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    let mut u = rng.unit_f64() * total;
    for &(b, w) in weights {
        if u < w {
            return b;
        }
        u -= w;
    }
    weights.last().expect("non-empty support").0
}

/// Generates exactly `length` bytes after `prefix`, each conditioned on the
/// last `order` bytes of everything seen so far.
pub fn predict(
    model: &ByteModel,
    prefix: &[u8],
    length: usize,
    policy: &SamplingPolicy,
) -> Result<Vec<u8>, PredictError> {
    if length == 0 {
        return Err(PredictError::ZeroLength);
    }
    policy.validate()?;
    let k = model.order;
    let mut history: Vec<u8> = prefix[prefix.len().saturating_sub(k)..].to_vec();
    let mut rng = SeededRng::from_seed(policy.seed);
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let next = match policy.mode {
            DecodeMode::Greedy => model.greedy_next(&history),
            DecodeMode::Temperature { temperature } => {
                let p = model.distribution(&history);
                let logs: Vec<f64> = p.iter().map(|v| v.ln() / temperature).collect();
                let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let weights: Vec<(u8, f64)> = logs
                    .iter()
                    .enumerate()
                    .map(|(b, l)| (b as u8, (l - top).exp()))
                    .collect();
                sample_weighted(&mut rng, &weights)
            }
            DecodeMode::TopK { k: top_k } => {
                let p = model.distribution(&history);
                let mut ranked: Vec<(u8, f64)> = p.iter().enumerate().map(|(b, &v)| (b as u8, v)).collect();
                // stable sort keeps ascending byte order among equal probabilities
                ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
                ranked.truncate(top_k);
                sample_weighted(&mut rng, &ranked)
            }
        };
        out.push(next);
        if k > 0 {
            if history.len() == k {
                history.remove(0);
            }
            history.push(next);
        }
    }
    Ok(out)
}
