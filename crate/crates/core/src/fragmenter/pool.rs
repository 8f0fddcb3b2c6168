use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FragmentError;
use crate::rng::SeededRng;

pub const DEFAULT_POOL_SIZE: usize = 100;
const MAX_REDRAWS: usize = 32;

/// Container format a pool entry was cut from. Decoy bytes are never parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Bmp,
    Wav,
    Jpeg,
    Png,
    Mp4,
}

impl SourceFormat {
    pub const ALL: [SourceFormat; 5] = [
        SourceFormat::Bmp,
        SourceFormat::Wav,
        SourceFormat::Jpeg,
        SourceFormat::Png,
        SourceFormat::Mp4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SourceFormat::Bmp => "bmp",
            SourceFormat::Wav => "wav",
            SourceFormat::Jpeg => "jpeg",
            SourceFormat::Png => "png",
            SourceFormat::Mp4 => "mp4",
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bmp" => Ok(SourceFormat::Bmp),
            "wav" => Ok(SourceFormat::Wav),
            "jpeg" | "jpg" => Ok(SourceFormat::Jpeg),
            "png" => Ok(SourceFormat::Png),
            "mp4" => Ok(SourceFormat::Mp4),
            other => Err(format!("unknown format tag {other:?}")),
        }
    }
}

/// A decoy file loaded into memory.
#[derive(Debug, Clone)]
pub struct DecoySource {
    pub format: SourceFormat,
    pub label: String,
    pub bytes: Vec<u8>,
}

impl DecoySource {
    pub fn load(format: SourceFormat, path: &Path) -> Result<DecoySource, FragmentError> {
        let bytes = fs::read(path).map_err(FragmentError::io(path))?;
        let label = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(DecoySource { format, label, bytes })
    }
}

/// Relative draw weights per decoy format.
pub type FormatMix = BTreeMap<SourceFormat, f64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub pool_index: usize,
    pub format: SourceFormat,
    /// Decoy file label and offset; `None` for the true continuation.
    pub origin: Option<(String, usize)>,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentPool {
    pub target_length: usize,
    pub entries: Vec<PoolEntry>,
    pub true_index: usize,
}

impl FragmentPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Uniform weights over the provided formats, leaving out BMP decoys.
fn default_mix(sources: &[DecoySource]) -> FormatMix {
    sources
        .iter()
        .filter(|s| s.format != SourceFormat::Bmp)
        .map(|s| (s.format, 1.0))
        .collect()
}

fn pick_format(rng: &mut SeededRng, mix: &[(SourceFormat, f64)], total: f64) -> SourceFormat {
    let mut u = rng.unit_f64() * total;
    for &(f, w) in mix {
        if u < w {
            return f;
        }
        u -= w;
    }
    mix.last().expect("non-empty mix").0
}

/// Builds a pool of `pool_size` equal-length fragments: the true continuation
/// at a seeded position and decoys cut at seeded offsets from `sources`.
pub fn build_pool(
    true_fragment: &[u8],
    true_format: SourceFormat,
    sources: &[DecoySource],
    pool_size: usize,
    mix: Option<&FormatMix>,
    seed: u64,
) -> Result<FragmentPool, FragmentError> {
    if pool_size < 2 {
        return Err(FragmentError::PoolTooSmall(pool_size));
    }
    let target = true_fragment.len();
    if let Some(s) = sources.iter().find(|s| s.bytes.len() < target) {
        return Err(FragmentError::SourceTooSmall {
            label: s.label.clone(),
            len: s.bytes.len(),
            needed: target,
        });
    }
    let mix = mix.cloned().unwrap_or_else(|| default_mix(sources));
    let weighted: Vec<(SourceFormat, f64)> = mix
        .into_iter()
        .filter(|&(f, w)| w > 0.0 && w.is_finite() && sources.iter().any(|s| s.format == f))
        .collect();
    if weighted.is_empty() {
        return Err(FragmentError::InsufficientSources);
    }
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();

    let mut rng = SeededRng::from_seed(seed);
    let true_index = rng.below_usize(pool_size);
    let mut entries = Vec::with_capacity(pool_size);
    for pool_index in 0..pool_size {
        if pool_index == true_index {
            entries.push(PoolEntry {
                pool_index,
                format: true_format,
                origin: None,
                bytes: true_fragment.to_vec(),
            });
            continue;
        }
        let mut attempts = 0;
        let entry = loop {
            if attempts == MAX_REDRAWS {
                return Err(FragmentError::DuplicateTrueFragment(MAX_REDRAWS));
            }
            attempts += 1;
            let format = pick_format(&mut rng, &weighted, total);
            let candidates: Vec<&DecoySource> = sources.iter().filter(|s| s.format == format).collect();
            let src = candidates[rng.below_usize(candidates.len())];
            let offset = rng.below_usize(src.bytes.len() - target + 1);
            let bytes = &src.bytes[offset..offset + target];
            if bytes != true_fragment {
                break PoolEntry {
                    pool_index,
                    format,
                    origin: Some((src.label.clone(), offset)),
                    bytes: bytes.to_vec(),
                };
            }
        };
        entries.push(entry);
    }
    Ok(FragmentPool {
        target_length: target,
        entries,
        true_index,
    })
}
