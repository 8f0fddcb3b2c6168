use std::path::PathBuf;

use thiserror::Error;

use crate::bmp::BmpError;

#[derive(Debug, Error)]
pub enum FragmentError {
    #[error("slice of {len} bytes at ratio {ratio} leaves an empty side (cut {cut})")]
    DegenerateSlice { len: usize, ratio: String, cut: usize },
    #[error("invalid ratio {0:?}: expected n/d with 0 < n < d")]
    InvalidRatio(String),
    #[error("corpus has {available} usable images, {needed} required")]
    InsufficientCorpus { needed: usize, available: usize },
    #[error("decoy source {label} has {len} bytes, fragments need {needed}")]
    SourceTooSmall {
        label: String,
        len: usize,
        needed: usize,
    },
    #[error("no decoy sources usable for the configured format mix")]
    InsufficientSources,
    #[error("pool needs at least 2 entries, got {0}")]
    PoolTooSmall(usize),
    #[error("decoy draws kept colliding with the true fragment after {0} attempts")]
    DuplicateTrueFragment(usize),
    #[error("{file} digest mismatch: manifest {expected}, file {actual}")]
    DigestMismatch {
        file: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("bmp: {0}")]
    Bmp(#[from] BmpError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl FragmentError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> FragmentError {
        let path = path.into();
        move |source| FragmentError::Io { path, source }
    }
}
