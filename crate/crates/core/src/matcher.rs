//! Weighted scoring and ranking of candidate pools.
//!
//! A candidate's score is `alpha * chi + beta * jsd - gamma * cos`, computed
//! from the byte histograms of the predicted fragment and the candidate.
//! Lower is better.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragmenter::FragmentPool;
use crate::metrics::{self, MetricError};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("pool entry {pool_index} has {actual} bytes, prediction has {expected}")]
    LengthMismatch {
        pool_index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite weight")]
    InvalidWeights,
    #[error("nothing to tally")]
    Empty,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MatchWeights {
    fn default() -> Self {
        MatchWeights {
            alpha: 0.01,
            beta: 10.0,
            gamma: 10.0,
        }
    }
}

impl MatchWeights {
    pub fn validate(&self) -> Result<(), MatchError> {
        if [self.alpha, self.beta, self.gamma].iter().all(|w| w.is_finite()) {
            Ok(())
        } else {
            Err(MatchError::InvalidWeights)
        }
    }

    pub fn scaled(&self, k: f64) -> MatchWeights {
        MatchWeights {
            alpha: self.alpha * k,
            beta: self.beta * k,
            gamma: self.gamma * k,
        }
    }
}

pub fn score(chi: f64, jsd: f64, cos: f64, w: &MatchWeights) -> f64 {
    w.alpha * chi + w.beta * jsd - w.gamma * cos
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub pool_index: usize,
    pub score: f64,
    pub chi_square: f64,
    pub jsd: f64,
    pub cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRanking {
    pub prediction_id: String,
    /// Ascending by score, ties broken by pool index.
    pub entries: Vec<RankedCandidate>,
    /// 1-based rank of the true continuation.
    pub true_rank: usize,
    pub true_index: usize,
}

impl PoolRanking {
    pub fn top(&self, k: usize) -> &[RankedCandidate] {
        &self.entries[..k.min(self.entries.len())]
    }
}

pub fn rank_pool(
    prediction_id: &str,
    predicted: &[u8],
    pool: &FragmentPool,
    w: &MatchWeights,
) -> Result<PoolRanking, MatchError> {
    w.validate()?;
    if let Some(e) = pool.entries.iter().find(|e| e.bytes.len() != predicted.len()) {
        return Err(MatchError::LengthMismatch {
            pool_index: e.pool_index,
            expected: predicted.len(),
            actual: e.bytes.len(),
        });
    }
    let mut entries = pool
        .entries
        .par_iter()
        .map(|e| {
            let s = metrics::byte_scores(predicted, &e.bytes)?;
            Ok(RankedCandidate {
                pool_index: e.pool_index,
                score: score(s.chi_square, s.jsd, s.cosine, w),
                chi_square: s.chi_square,
                jsd: s.jsd,
                cosine: s.cosine,
            })
        })
        .collect::<Result<Vec<_>, MetricError>>()?;
    entries.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.pool_index.cmp(&b.pool_index)));
    let true_rank = entries
        .iter()
        .position(|c| c.pool_index == pool.true_index)
        .expect("true entry is part of the pool")
        + 1;
    Ok(PoolRanking {
        prediction_id: prediction_id.to_string(),
        entries,
        true_rank,
        true_index: pool.true_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub rank1_count: usize,
    pub top5_not1_count: usize,
    pub missed_count: usize,
    pub total: usize,
    pub top_k: usize,
}

pub fn tally(rankings: &[PoolRanking], top_k: usize) -> Result<MatchReport, MatchError> {
    if rankings.is_empty() {
        return Err(MatchError::Empty);
    }
    let mut r = MatchReport {
        rank1_count: 0,
        top5_not1_count: 0,
        missed_count: 0,
        total: rankings.len(),
        top_k,
    };
    for rank in rankings.iter().map(|x| x.true_rank) {
        match rank {
            1 => r.rank1_count += 1,
            n if n <= top_k => r.top5_not1_count += 1,
            _ => r.missed_count += 1,
        }
    }
    Ok(r)
}

/// `pool_index,format,chi,jsd,cos,S,rank,is_true` for every candidate.
pub fn ranking_csv(ranking: &PoolRanking, pool: &FragmentPool) -> String {
    let mut s = String::from("pool_index,format,chi,jsd,cos,S,rank,is_true\n");
    for (i, c) in ranking.entries.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            c.pool_index,
            pool.entries[c.pool_index].format,
            c.chi_square,
            c.jsd,
            c.cosine,
            c.score,
            i + 1,
            c.pool_index == ranking.true_index
        );
    }
    s
}

pub fn tally_csv(report: &MatchReport) -> String {
    format!(
        "category,count\nrank_1,{}\ntop_{}_not_1,{}\nmissed,{}\ntotal,{}\n",
        report.rank1_count, report.top_k, report.top5_not1_count, report.missed_count, report.total
    )
}

pub fn tally_text(report: &MatchReport) -> String {
    format!(
        "Correct match ranked 1st            {:>4}\n\
         Correct match in top {} (not 1st)    {:>4}\n\
         Correct match not in top {}          {:>4}\n\
         Total predictions                   {:>4}\n",
        report.rank1_count,
        report.top_k,
        report.top5_not1_count,
        report.top_k,
        report.missed_count,
        report.total
    )
}
