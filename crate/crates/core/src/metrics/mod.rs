//! Fragment similarity: byte-histogram cosine, chi-square and Jensen-Shannon
//! divergence, plus windowed SSIM on reconstructed images.

mod distance;
mod error;
mod histogram;
mod ssim;

pub use distance::{chi_square, cosine_similarity, jsd, jsd_counts, CHI_SQUARE_EMPTY_EXPECTED};
pub use error::MetricError;
pub use histogram::{byte_histogram, ByteHistogram, ProbDistribution};
pub use ssim::{
    fragment_ssim, heatmap_csv, heatmap_pgm, predicted_region_mask, ssim, stabilizers, LocalMap, SsimResult,
    DEFAULT_WINDOW,
};

/// The three byte-level scores of a predicted fragment against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ByteScores {
    pub chi_square: f64,
    pub jsd: f64,
    pub cosine: f64,
}

/// Scores `predicted` against `reference`; chi-square treats `predicted` as
/// the observed counts.
pub fn byte_scores(predicted: &[u8], reference: &[u8]) -> Result<ByteScores, MetricError> {
    let hp = byte_histogram(predicted)?;
    let hr = byte_histogram(reference)?;
    Ok(ByteScores {
        chi_square: chi_square(&hp, &hr),
        jsd: jsd_counts(&hp, &hr),
        cosine: cosine_similarity(&hp, &hr)?,
    })
}
