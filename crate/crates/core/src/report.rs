//! Image panels for a single reconstruction and the plain-text run report.

use crate::bmp::{self, BmpError};
use crate::fragmenter::FragmentRecord;
use crate::metrics::MetricError;

/// Panel names in display order.
pub const PANELS: [&str; 5] = ["input", "predicted", "real", "reconstructed", "original"];

/// Five full-size BMP files built on the original header:
/// the input fragment alone, the predicted continuation alone, the real
/// continuation alone, input followed by prediction, and the original.
/// Pixel bytes outside each panel's span are zero.
pub fn reconstruction_panels(
    record: &FragmentRecord,
    predicted: &[u8],
) -> Result<Vec<(&'static str, Vec<u8>)>, MetricError> {
    if predicted.len() != record.real_fragment().len() {
        return Err(MetricError::LengthMismatch {
            expected: record.real_fragment().len(),
            actual: predicted.len(),
        });
    }
    let full = record.full_bytes();
    let offset = bmp::parse_bmp(full)?.pixel_data_offset();
    let cut = record.cut().max(offset);
    let blank = |keep: std::ops::Range<usize>, fill: Option<&[u8]>| -> Result<Vec<u8>, BmpError> {
        let mut out = full.to_vec();
        for (i, b) in out.iter_mut().enumerate().skip(offset) {
            if !keep.contains(&i) {
                *b = 0;
            }
        }
        if let Some(bytes) = fill {
            let start = full.len() - bytes.len();
            out[start..].copy_from_slice(bytes);
        }
        bmp::parse_bmp(&out)?;
        Ok(out)
    };
    let reconstructed = [record.input_fragment(), predicted].concat();
    bmp::parse_bmp(&reconstructed).map_err(MetricError::ReconstructionUnparseable)?;
    Ok(vec![
        ("input", blank(offset..cut, None)?),
        ("predicted", blank(0..0, Some(predicted))?),
        ("real", blank(cut..full.len(), None)?),
        ("reconstructed", reconstructed),
        ("original", full.to_vec()),
    ])
}

#[derive(Debug, Clone, Default)]
pub struct ReportSections {
    pub dataset: Option<String>,
    pub predictor: Option<String>,
    pub summary: Option<String>,
    pub tally: Option<String>,
}

pub fn render_report(s: &ReportSections) -> String {
    let mut out = String::from("gencarve run report\n===================\n");
    for (title, body) in [
        ("Dataset", &s.dataset),
        ("Predictor", &s.predictor),
        ("Similarity summary", &s.summary),
        ("Pool matching", &s.tally),
    ] {
        out.push('\n');
        out.push_str(title);
        out.push('\n');
        out.push_str(&"-".repeat(title.len()));
        out.push('\n');
        match body {
            Some(text) => {
                out.push_str(text.trim_end());
                out.push('\n');
            }
            None => out.push_str("(not run)\n"),
        }
    }
    out
}
