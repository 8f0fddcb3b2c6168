//! Per-prediction-set summaries and box-plot data.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normal quantile used for the 95% margin.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample {index} is not finite ({value})")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ChiSquare,
    Cosine,
    Jsd,
    Ssim,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::ChiSquare, Metric::Cosine, Metric::Jsd, Metric::Ssim];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::ChiSquare => "chi_square",
            Metric::Cosine => "cosine",
            Metric::Jsd => "jsd",
            Metric::Ssim => "ssim",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Metric::ChiSquare => "Chi-square",
            Metric::Cosine => "Cosine",
            Metric::Jsd => "JSD",
            Metric::Ssim => "SSIM",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub set_id: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// `1.96 * std_dev / sqrt(n)`.
    pub ci95_margin: f64,
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(StatsError::NonFiniteValue {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile (type 7) of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64], metric: Metric, set_id: &str) -> Result<MetricSummary, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: values.len(),
        });
    }
    check_finite(values)?;
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std_dev = (ss / (n - 1) as f64).sqrt();
    let s = sorted(values);
    Ok(MetricSummary {
        metric,
        set_id: set_id.to_string(),
        n,
        mean,
        median: quantile_sorted(&s, 0.5),
        min: s[0],
        max: s[n - 1],
        std_dev,
        ci95_margin: Z_95 * std_dev / (n as f64).sqrt(),
    })
}

/// Box-plot figures: quartiles, whiskers at the most extreme samples within
/// 1.5 IQR of the box, and everything beyond them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

pub fn box_summary(values: &[f64]) -> Result<BoxSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    check_finite(values)?;
    let s = sorted(values);
    let q1 = quantile_sorted(&s, 0.25);
    let q3 = quantile_sorted(&s, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = |v: &&f64| **v >= lo_fence && **v <= hi_fence;
    Ok(BoxSummary {
        q1,
        median: quantile_sorted(&s, 0.5),
        q3,
        lower_whisker: *s.iter().find(inside).expect("quartiles lie inside the fences"),
        upper_whisker: *s
            .iter()
            .rev()
            .find(inside)
            .expect("quartiles lie inside the fences"),
        outliers: s.iter().copied().filter(|v| !inside(&v)).collect(),
    })
}

/// `set_id,metric,value` rows in input order.
pub fn distribution_csv(values: &[f64], metric: Metric, set_id: &str) -> String {
    let mut s = String::from("set_id,metric,value\n");
    for v in values {
        let _ = writeln!(s, "{set_id},{metric},{v}");
    }
    s
}

pub fn box_summary_csv(b: &BoxSummary) -> String {
    let outliers: Vec<String> = b.outliers.iter().map(f64::to_string).collect();
    format!(
        "q1,median,q3,lower_whisker,upper_whisker,outliers\n{},{},{},{},{},{}\n",
        b.q1,
        b.median,
        b.q3,
        b.lower_whisker,
        b.upper_whisker,
        outliers.join(";")
    )
}

/// Writes `<stem>.csv` with the raw values and `<stem>.quartiles.csv` next to it.
pub fn export_distribution(
    values: &[f64],
    metric: Metric,
    set_id: &str,
    dir: &Path,
) -> Result<BoxSummary, StatsError> {
    let b = box_summary(values)?;
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| StatsError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let stem = format!("{metric}_{set_id}");
    let values_path = dir.join(format!("{stem}.csv"));
    fs::write(&values_path, distribution_csv(values, metric, set_id)).map_err(io(&values_path))?;
    let box_path = dir.join(format!("{stem}.quartiles.csv"));
    fs::write(&box_path, box_summary_csv(&b)).map_err(io(&box_path))?;
    Ok(b)
}

pub fn summary_csv(rows: &[MetricSummary]) -> String {
    let mut s = String::from("metric,set_id,n,mean,median,min,max,std_dev,ci95_margin\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.metric, r.set_id, r.n, r.mean, r.median, r.min, r.max, r.std_dev, r.ci95_margin
        );
    }
    s
}

/// Plain-text table: one row per metric, mean / std / CI columns per set,
/// followed by a median / min / max block.
pub fn summary_table(rows: &[MetricSummary], sets: &[String]) -> String {
    let cell = |m: Metric, set: &str, f: fn(&MetricSummary) -> f64| {
        rows.iter()
            .find(|r| r.metric == m && r.set_id == set)
            .map_or_else(|| "-".to_string(), |r| format!("{:.4}", f(r)))
    };
    let block = |title: [&str; 3], fields: [fn(&MetricSummary) -> f64; 3]| {
        let mut header = vec!["Metric".to_string()];
        for t in title {
            header.extend(sets.iter().map(|s| format!("{t} {s}")));
        }
        let mut lines = vec![header];
        for m in Metric::ALL {
            let mut line = vec![m.label().to_string()];
            for f in fields {
                line.extend(sets.iter().map(|s| cell(m, s, f)));
            }
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let padded: Vec<String> = l
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (v, w))| {
                    if i == 0 {
                        format!("{v:<w$}")
                    } else {
                        format!("{v:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        }
        out
    };
    let mut out = block(
        ["Mean", "Std", "CI±"],
        [|r| r.mean, |r| r.std_dev, |r| r.ci95_margin],
    );
    out.push('\n');
    out.push_str(&block(
        ["Median", "Min", "Max"],
        [|r| r.median, |r| r.min, |r| r.max],
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_to_four() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0], Metric::Cosine, "P1").unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert!((s.std_dev - 1.2909944487358056).abs() < 1e-15);
        assert!((s.ci95_margin - 1.2651745597610895).abs() < 1e-15);
        assert_eq!(s.ci95_margin, 1.96 * s.std_dev / 2.0);
    }

    #[test]
    fn constant() {
        let s = summarize(&[5.0, 5.0, 5.0], Metric::Jsd, "P2").unwrap();
        assert_eq!((s.std_dev, s.ci95_margin), (0.0, 0.0));
        assert_eq!((s.min, s.max, s.mean, s.median), (5.0, 5.0, 5.0, 5.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            summarize(&[1.0], Metric::Ssim, "x"),
            Err(StatsError::TooFewSamples { .. })
        ));
        assert!(matches!(
            summarize(&[1.0, f64::NAN], Metric::Ssim, "x"),
            Err(StatsError::NonFiniteValue { index: 1, .. })
        ));
        assert!(box_summary(&[]).is_err());
    }

    #[test]
    fn quartiles_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let b = box_summary(&v).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (25.75, 50.5, 75.25));
        assert!(b.outliers.is_empty());
        assert_eq!((b.lower_whisker, b.upper_whisker), (1.0, 100.0));
    }

    #[test]
    fn single_value_box() {
        let b = box_summary(&[3.5]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (3.5, 3.5, 3.5));
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn outliers_and_whiskers() {
        let b = box_summary(&[1.0, 2.0, 3.0, 4.0, 5.0, 100.0]).unwrap();
        // q1 2.25, q3 4.75, upper fence 8.5
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.upper_whisker, 5.0);
        assert_eq!(b.lower_whisker, 1.0);
    }

    #[test]
    fn exports() {
        let dir = tempfile::tempdir().unwrap();
        export_distribution(&[0.5, 0.25], Metric::Cosine, "P3", dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("cosine_P3.csv")).unwrap();
        assert_eq!(csv, "set_id,metric,value\nP3,cosine,0.5\nP3,cosine,0.25\n");
        let q = fs::read_to_string(dir.path().join("cosine_P3.quartiles.csv")).unwrap();
        assert!(q.starts_with("q1,median,q3,lower_whisker,upper_whisker,outliers\n"));
    }

    #[test]
    fn table_layout() {
        let sets: Vec<String> = ["P1", "P2", "P3"].map(String::from).to_vec();
        let rows: Vec<MetricSummary> = Metric::ALL
            .iter()
            .flat_map(|&m| sets.iter().map(move |s| summarize(&[1.0, 3.0], m, s).unwrap()))
            .collect();
        let t = summary_table(&rows, &sets);
        let first = t.lines().next().unwrap();
        assert_eq!(first.split_whitespace().filter(|w| w.starts_with('P')).count(), 9);
        assert!(t.lines().nth(1).unwrap().starts_with("Chi-square"));
    }

    proptest::proptest! {
        #[test]
        fn shift_and_scale(
            v in proptest::collection::vec(-1e3f64..1e3, 2..60),
            c in -100f64..100.0,
            k in 0.01f64..50.0,
        ) {
            let base = summarize(&v, Metric::ChiSquare, "s").unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let sh = summarize(&shifted, Metric::ChiSquare, "s").unwrap();
            let tol = 1e-9 * (1.0 + base.mean.abs() + c.abs() + base.std_dev);
            proptest::prop_assert!((sh.mean - (base.mean + c)).abs() < tol);
            proptest::prop_assert!((sh.median - (base.median + c)).abs() < tol);
            proptest::prop_assert!((sh.min - (base.min + c)).abs() < tol);
            proptest::prop_assert!((sh.std_dev - base.std_dev).abs() < tol);

            let scaled: Vec<f64> = v.iter().map(|x| -k * x).collect();
            let sc = summarize(&scaled, Metric::ChiSquare, "s").unwrap();
            let tol = 1e-9 * k * (1.0 + base.mean.abs() + base.std_dev + base.max.abs() + base.min.abs());
            proptest::prop_assert!((sc.std_dev - k * base.std_dev).abs() < tol);
            proptest::prop_assert!((sc.ci95_margin - k * base.ci95_margin).abs() < tol);
            proptest::prop_assert!((sc.max - k * -base.min).abs() < tol);
            proptest::prop_assert!(sc.min <= sc.median && sc.median <= sc.max);
        }
    }
}
