//! Windowed SSIM on 8-bit gray images.
//!
//! Every valid `w x w` placement gets its own SSIM value from uniform window
//! statistics (population variance and covariance). Window sums come from
//! summed-area tables, so each placement is O(1) and its moments are exact
//! integers until the final division.

use std::fmt::Write as _;

use super::MetricError;
use crate::bmp::{self, GrayImage};
use crate::fragmenter::FragmentRecord;

pub const DEFAULT_WINDOW: usize = 7;
const DYNAMIC_RANGE: f64 = 255.0;

/// Stabilizers `(k1 L)^2` and `(k2 L)^2` with `k1 = 0.01`, `k2 = 0.03`, `L = 255`.
pub fn stabilizers() -> (f64, f64) {
    ((0.01 * DYNAMIC_RANGE).powi(2), (0.03 * DYNAMIC_RANGE).powi(2))
}

/// Per-placement SSIM values; cell `(i, j)` is the window whose top-left
/// pixel is `(i, j)` and whose center is `(i + w/2, j + w/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl LocalMap {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsimResult {
    /// Mean of the local values whose window centers fall in the mask.
    pub global: f64,
    pub local_map: LocalMap,
    pub window: usize,
    pub constants: (f64, f64),
    /// Row-major over image pixels; `None` means the whole image.
    pub region_mask: Option<Vec<bool>>,
    /// Number of placements averaged into `global`.
    pub windows_used: usize,
}

/// Inclusive prefix sums with a zero border: `table[(r+1)(w+1) + c+1]`.
struct Integral {
    stride: usize,
    sums: Vec<i64>,
}

impl Integral {
    fn new(width: usize, height: usize, value: impl Fn(usize, usize) -> i64) -> Integral {
        let stride = width + 1;
        let mut sums = vec![0i64; stride * (height + 1)];
        for r in 0..height {
            let mut row_sum = 0;
            for c in 0..width {
                row_sum += value(r, c);
                sums[(r + 1) * stride + c + 1] = sums[r * stride + c + 1] + row_sum;
            }
        }
        Integral { stride, sums }
    }

    fn window(&self, top: usize, left: usize, size: usize) -> i64 {
        let s = self.stride;
        let (b, r) = (top + size, left + size);
        self.sums[b * s + r] - self.sums[top * s + r] - self.sums[b * s + left] + self.sums[top * s + left]
    }
}

pub fn ssim(
    x: &GrayImage,
    y: &GrayImage,
    window: usize,
    mask: Option<&[bool]>,
) -> Result<SsimResult, MetricError> {
    let (w, h) = (x.width(), x.height());
    if (y.width(), y.height()) != (w, h) {
        return Err(MetricError::DimensionMismatch {
            left: (w, h),
            right: (y.width(), y.height()),
        });
    }
    if window == 0 || window.is_multiple_of(2) || window > w.min(h) {
        return Err(MetricError::WindowTooLarge {
            window,
            width: w,
            height: h,
        });
    }
    if let Some(m) = mask {
        if m.len() != w * h {
            return Err(MetricError::DimensionMismatch {
                left: (w, h),
                right: (m.len(), 1),
            });
        }
    }

    let px = |img: &GrayImage, r: usize, c: usize| img.get(r, c) as i64;
    let sx = Integral::new(w, h, |r, c| px(x, r, c));
    let sy = Integral::new(w, h, |r, c| px(y, r, c));
    let sxx = Integral::new(w, h, |r, c| px(x, r, c) * px(x, r, c));
    let syy = Integral::new(w, h, |r, c| px(y, r, c) * px(y, r, c));
    let sxy = Integral::new(w, h, |r, c| px(x, r, c) * px(y, r, c));

    let (c1, c2) = stabilizers();
    let n = (window * window) as i128;
    let n2 = (n * n) as f64;
    let rows = h - window + 1;
    let cols = w - window + 1;
    let half = window / 2;
    let mut values = Vec::with_capacity(rows * cols);
    let (mut acc, mut used) = (0.0, 0usize);
    for i in 0..rows {
        for j in 0..cols {
            let a = sx.window(i, j, window) as i128;
            let b = sy.window(i, j, window) as i128;
            let aa = sxx.window(i, j, window) as i128;
            let bb = syy.window(i, j, window) as i128;
            let ab = sxy.window(i, j, window) as i128;
            // n^2 * (mean, variance, covariance) as exact integers
            let mean_prod = (a * b) as f64 / n2;
            let mean_sq = (a * a + b * b) as f64 / n2;
            let var_sum = (n * (aa + bb) - a * a - b * b) as f64 / n2;
            let cov = (n * ab - a * b) as f64 / n2;
            let v = ((2.0 * mean_prod + c1) * (2.0 * cov + c2)) / ((mean_sq + c1) * (var_sum + c2));
            values.push(v);
            if mask.is_none_or(|m| m[(i + half) * w + j + half]) {
                acc += v;
                used += 1;
            }
        }
    }
    if used == 0 {
        return Err(MetricError::EmptyMask);
    }
    Ok(SsimResult {
        global: acc / used as f64,
        local_map: LocalMap { rows, cols, values },
        window,
        constants: (c1, c2),
        region_mask: mask.map(<[bool]>::to_vec),
        windows_used: used,
    })
}

/// Pixels holding at least one byte at or after file offset `cut`.
pub fn predicted_region_mask(img: &bmp::BmpImage, cut: usize) -> Vec<bool> {
    let mut mask = vec![false; img.width() * img.height()];
    for off in cut..img.file_size() {
        if let Ok(Some(p)) = bmp::byte_offset_to_pixel(img, off) {
            mask[p.row * img.width() + p.col] = true;
        }
    }
    mask
}

/// SSIM between the original image and `input ++ predicted`, averaged over
/// windows centered in the predicted region.
pub fn fragment_ssim(
    record: &FragmentRecord,
    predicted: &[u8],
    window: usize,
) -> Result<SsimResult, MetricError> {
    if predicted.len() != record.real_fragment().len() {
        return Err(MetricError::LengthMismatch {
            expected: record.real_fragment().len(),
            actual: predicted.len(),
        });
    }
    let original = bmp::parse_bmp(record.full_bytes())?;
    let rebuilt_bytes = [record.input_fragment(), predicted].concat();
    let rebuilt = bmp::parse_bmp(&rebuilt_bytes).map_err(MetricError::ReconstructionUnparseable)?;
    let mask = predicted_region_mask(&original, record.cut());
    ssim(
        &bmp::to_grayscale(&original),
        &bmp::to_grayscale(&rebuilt),
        window,
        Some(&mask),
    )
}

/// Binary PGM (P5) of the local map, mapping `[-1, 1]` linearly onto `[0, 255]`.
pub fn heatmap_pgm(map: &LocalMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", map.cols, map.rows).into_bytes();
    out.extend(
        map.values
            .iter()
            .map(|v| ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8),
    );
    out
}

/// One CSV line per map row, full precision.
pub fn heatmap_csv(map: &LocalMap) -> String {
    let mut s = String::new();
    for row in map.values.chunks(map.cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}
