use super::{ByteHistogram, MetricError, ProbDistribution};

/// Stand-in expected count for bins the real fragment never uses.
pub const CHI_SQUARE_EMPTY_EXPECTED: f64 = 0.5;

/// `A.B / (|A| |B|)` over raw counts; in `[0, 1]` since counts are non-negative.
pub fn cosine_similarity(a: &ByteHistogram, b: &ByteHistogram) -> Result<f64, MetricError> {
    let (mut dot, mut na, mut nb) = (0u128, 0u128, 0u128);
    for (&x, &y) in a.bins().iter().zip(b.bins()) {
        let (x, y) = (x as u128, y as u128);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0 || nb == 0 {
        return Err(MetricError::ZeroVector);
    }
    Ok(dot as f64 / ((na as f64).sqrt() * (nb as f64).sqrt()))
}

/// Pearson chi-square of observed (predicted fragment) against expected
/// (real fragment) raw counts. Bins with no expected count use 0.5 when the
/// observed count is non-zero and contribute nothing otherwise. Not symmetric.
pub fn chi_square(observed: &ByteHistogram, expected: &ByteHistogram) -> f64 {
    observed
        .bins()
        .iter()
        .zip(expected.bins())
        .map(|(&o, &e)| match (o, e) {
            (0, 0) => 0.0,
            (o, 0) => {
                let d = o as f64 - CHI_SQUARE_EMPTY_EXPECTED;
                d * d / CHI_SQUARE_EMPTY_EXPECTED
            }
            (o, e) => {
                let d = o as f64 - e as f64;
                d * d / e as f64
            }
        })
        .sum()
}

/// Jensen-Shannon divergence in bits: the mean KL divergence of `p` and `q`
/// from their midpoint. Lies in `[0, 1]`.
pub fn jsd(p: &ProbDistribution, q: &ProbDistribution) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.masses().iter().zip(q.masses()) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            total += a * (a / m).log2();
        }
        if b > 0.0 {
            total += b * (b / m).log2();
        }
    }
    (0.5 * total).clamp(0.0, 1.0)
}

/// [`jsd`] of two normalized histograms, accumulated over raw counts so that
/// disjoint supports give exactly 1 and equal distributions exactly 0.
pub fn jsd_counts(a: &ByteHistogram, b: &ByteHistogram) -> f64 {
    let (ta, tb) = (a.total() as f64, b.total() as f64);
    let (mut sa, mut sb) = (0.0, 0.0);
    for (&ca, &cb) in a.bins().iter().zip(b.bins()) {
        if ca == 0 && cb == 0 {
            continue;
        }
        let (p, q) = (ca as f64 / ta, cb as f64 / tb);
        let m = 0.5 * (p + q);
        if ca > 0 {
            sa += ca as f64 * (p / m).log2();
        }
        if cb > 0 {
            sb += cb as f64 * (q / m).log2();
        }
    }
    (0.5 * (sa / ta + sb / tb)).clamp(0.0, 1.0)
}
