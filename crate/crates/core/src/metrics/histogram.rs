use super::MetricError;

/// Occurrence counts of each byte value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteHistogram {
    bins: [u64; 256],
    total: u64,
}

impl ByteHistogram {
    pub fn from_bins(bins: [u64; 256]) -> Result<ByteHistogram, MetricError> {
        let total = bins.iter().sum();
        if total == 0 {
            return Err(MetricError::EmptyInput);
        }
        Ok(ByteHistogram { bins, total })
    }

    pub fn bins(&self) -> &[u64; 256] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn normalized(&self) -> ProbDistribution {
        let t = self.total as f64;
        ProbDistribution {
            p: self.bins.map(|c| c as f64 / t),
        }
    }
}

pub fn byte_histogram(bytes: &[u8]) -> Result<ByteHistogram, MetricError> {
    if bytes.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut bins = [0u64; 256];
    for &b in bytes {
        bins[b as usize] += 1;
    }
    Ok(ByteHistogram {
        bins,
        total: bytes.len() as u64,
    })
}

/// Probability mass over the 256 byte values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDistribution {
    p: [f64; 256],
}

impl ProbDistribution {
    /// Accepts non-negative finite masses summing to 1 within 1e-9.
    pub fn new(p: [f64; 256]) -> Result<ProbDistribution, MetricError> {
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(MetricError::InvalidDistribution(
                "negative or non-finite mass".into(),
            ));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricError::InvalidDistribution(format!("masses sum to {sum}")));
        }
        Ok(ProbDistribution { p })
    }

    /// Builds from a prefix of masses; remaining values get zero.
    pub fn from_slice(masses: &[f64]) -> Result<ProbDistribution, MetricError> {
        if masses.len() > 256 {
            return Err(MetricError::InvalidDistribution(format!(
                "{} masses",
                masses.len()
            )));
        }
        let mut p = [0.0; 256];
        p[..masses.len()].copy_from_slice(masses);
        ProbDistribution::new(p)
    }

    pub fn masses(&self) -> &[f64; 256] {
        &self.p
    }
}
