//! Acceptance checks. Each criterion prints one PASS or FAIL line; the
//! process exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use gencarve::bmp::{self, GrayImage};
use gencarve::config::{Overrides, RunConfig};
use gencarve::fragmenter::{slice_fragment, FragmentPool, PoolEntry, Ratio, SourceFormat};
use gencarve::matcher::{rank_pool, score, MatchWeights};
use gencarve::metrics::{
    byte_histogram, chi_square, cosine_similarity, jsd, jsd_counts, ssim, ProbDistribution,
};
use gencarve::pipeline::{self, AnalyzeOptions, MatchOptions};
use gencarve::predictor::protocol::{encode_response, handshake_reply, ERROR_MAGIC, RESPONSE_MAGIC};
use gencarve::predictor::{ExternalPredictor, PredictError};
use gencarve::rng::SeededRng;
use gencarve::stats::{self, Metric, Z_95};
use gencarve::synth;

const BIN: &str = env!("CARGO_BIN_EXE_gencarve");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= tol * scale || a == b
}

fn random_bytes(rng: &mut SeededRng, min: usize, max: usize) -> Vec<u8> {
    let n = min + rng.below_usize(max - min + 1);
    // skewed alphabets give realistic, partly overlapping histograms
    let alphabet = 1 + rng.below_usize(256);
    let base = rng.below_usize(256);
    (0..n)
        .map(|_| ((base + rng.below_usize(alphabet)) % 256) as u8)
        .collect()
}

fn counts(bytes: &[u8]) -> BTreeMap<u8, u64> {
    let mut m = BTreeMap::new();
    for &b in bytes {
        *m.entry(b).or_insert(0) += 1;
    }
    m
}

fn oracle_cosine(a: &[u8], b: &[u8]) -> f64 {
    let (ca, cb) = (counts(a), counts(b));
    let dot: f64 = ca
        .iter()
        .map(|(k, &x)| x as f64 * *cb.get(k).unwrap_or(&0) as f64)
        .sum();
    let na: f64 = ca.values().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
    let nb: f64 = cb.values().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn oracle_chi(observed: &[u8], expected: &[u8]) -> f64 {
    let (co, ce) = (counts(observed), counts(expected));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut total = BigRational::zero();
    for v in 0..=255u8 {
        let o = BigRational::from_integer(BigInt::from(*co.get(&v).unwrap_or(&0)));
        let e_count = *ce.get(&v).unwrap_or(&0);
        if e_count == 0 && o.is_zero() {
            continue;
        }
        let e = if e_count == 0 {
            half.clone()
        } else {
            BigRational::from_integer(BigInt::from(e_count))
        };
        let d = &o - &e;
        total += &d * &d / e;
    }
    total.to_f64().unwrap()
}

fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>() / std::f64::consts::LN_2
}

/// JSD as the entropy of the mixture minus the mean entropy.
fn oracle_jsd(a: &[u8], b: &[u8]) -> f64 {
    let (ca, cb) = (counts(a), counts(b));
    let p: Vec<f64> = (0..=255u8)
        .map(|v| *ca.get(&v).unwrap_or(&0) as f64 / a.len() as f64)
        .collect();
    let q: Vec<f64> = (0..=255u8)
        .map(|v| *cb.get(&v).unwrap_or(&0) as f64 / b.len() as f64)
        .collect();
    let m: Vec<f64> = p.iter().zip(&q).map(|(x, y)| (x + y) / 2.0).collect();
    entropy_bits(&m) - (entropy_bits(&p) + entropy_bits(&q)) / 2.0
}

/// Brute-force SSIM: every window placement, two-pass moments.
fn oracle_ssim(x: &GrayImage, y: &GrayImage, win: usize) -> (f64, Vec<f64>) {
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let n = (win * win) as f64;
    let mut local = Vec::new();
    for r in 0..=(x.height() - win) {
        for c in 0..=(x.width() - win) {
            let px: Vec<f64> = (0..win * win)
                .map(|k| x.get(r + k / win, c + k % win) as f64)
                .collect();
            let py: Vec<f64> = (0..win * win)
                .map(|k| y.get(r + k / win, c + k % win) as f64)
                .collect();
            let mx = px.iter().sum::<f64>() / n;
            let my = py.iter().sum::<f64>() / n;
            let vx = px.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / n;
            let vy = py.iter().map(|v| (v - my).powi(2)).sum::<f64>() / n;
            let cov = px.iter().zip(&py).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
            local.push(
                ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2)),
            );
        }
    }
    (local.iter().sum::<f64>() / local.len() as f64, local)
}

fn random_image_pair(rng: &mut SeededRng) -> (GrayImage, GrayImage) {
    let w = 16 + rng.below_usize(17);
    let h = 16 + rng.below_usize(17);
    let x: Vec<u8> = (0..w * h).map(|_| rng.below(256) as u8).collect();
    let noise = rng.below(4);
    let y: Vec<u8> = x
        .iter()
        .map(|&v| match noise {
            0 => rng.below(256) as u8,
            1 => 255 - v,
            _ => (v as i64 + rng.below(41) as i64 - 20).clamp(0, 255) as u8,
        })
        .collect();
    (GrayImage::new(w, h, x).unwrap(), GrayImage::new(w, h, y).unwrap())
}

fn metric_oracle_equivalence() -> Outcome {
    const N: usize = 1000;
    const TOL: f64 = 1e-9;
    let mut rng = SeededRng::stream(1, "acceptance/metrics");
    let mut worst = [0f64; 4];
    for i in 0..N {
        let a = random_bytes(&mut rng, 64, 4096);
        let b = if i % 5 == 0 {
            a.clone()
        } else {
            random_bytes(&mut rng, 64, 4096)
        };
        let (ha, hb) = (byte_histogram(&a).unwrap(), byte_histogram(&b).unwrap());
        let pairs = [
            (cosine_similarity(&ha, &hb).unwrap(), oracle_cosine(&a, &b)),
            (chi_square(&ha, &hb), oracle_chi(&a, &b)),
            (jsd(&ha.normalized(), &hb.normalized()), oracle_jsd(&a, &b)),
            (jsd_counts(&ha, &hb), oracle_jsd(&a, &b)),
        ];
        for (k, (got, want)) in pairs.into_iter().enumerate() {
            let err = if want == 0.0 {
                got.abs()
            } else {
                ((got - want) / want).abs()
            };
            // the entropy-difference form of JSD cancels near zero; compare absolutely there
            let ok = rel_close(got, want, TOL) || (k >= 2 && (got - want).abs() < 1e-14);
            ensure(ok, || format!("metric {k} input {i}: {got} vs oracle {want}"))?;
            if k < 2 || want > 1e-6 {
                worst[k.min(2)] = worst[k.min(2)].max(err);
            }
        }
    }
    for i in 0..N {
        let (x, y) = random_image_pair(&mut rng);
        let got = ssim(&x, &y, 7, None).unwrap();
        let (want, local) = oracle_ssim(&x, &y, 7);
        ensure(rel_close(got.global, want, TOL), || {
            format!("ssim image {i}: {} vs {want}", got.global)
        })?;
        for (g, w) in got.local_map.values.iter().zip(&local) {
            ensure(rel_close(*g, *w, TOL) || (g - w).abs() < 1e-12, || {
                format!("ssim window {i}: {g} vs {w}")
            })?;
        }
        worst[3] = worst[3].max(((got.global - want) / want).abs());
    }
    Ok(format!(
        "{N} inputs per metric; max rel err cos {:.1e} chi {:.1e} jsd {:.1e} ssim {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn metric_boundaries() -> Outcome {
    let mut rng = SeededRng::stream(2, "acceptance/boundary");
    for _ in 0..200 {
        let a = random_bytes(&mut rng, 1, 2048);
        let h = byte_histogram(&a).unwrap();
        let cos = cosine_similarity(&h, &h).unwrap();
        ensure((cos - 1.0).abs() <= 1e-12, || format!("cos(a,a) = {cos}"))?;
        ensure(chi_square(&h, &h) == 0.0, || "chi(a,a) != 0".into())?;
        let j = jsd(&h.normalized(), &h.normalized());
        ensure(j.abs() <= 1e-12, || format!("jsd(p,p) = {j}"))?;
        let (x, _) = random_image_pair(&mut rng);
        let s = ssim(&x, &x, 7, None).unwrap().global;
        ensure((s - 1.0).abs() <= 1e-12, || format!("ssim(x,x) = {s}"))?;
    }
    let low = byte_histogram(&(0u8..128).collect::<Vec<_>>()).unwrap();
    let high = byte_histogram(&(128u8..=255).collect::<Vec<_>>()).unwrap();
    ensure(cosine_similarity(&low, &high).unwrap() == 0.0, || {
        "disjoint cosine".into()
    })?;
    ensure(jsd_counts(&low, &high) == 1.0, || "disjoint-support JSD".into())?;
    for (i, j) in [(0usize, 1usize), (7, 200), (255, 0)] {
        let mut p = [0.0; 256];
        let mut q = [0.0; 256];
        p[i] = 1.0;
        q[j] = 1.0;
        let v = jsd(
            &ProbDistribution::new(p).unwrap(),
            &ProbDistribution::new(q).unwrap(),
        );
        ensure((v - 1.0).abs() <= 1e-12, || format!("point-mass jsd = {v}"))?;
    }
    Ok("identities on 200 random inputs, disjoint cosine 0, point-mass JSD 1".into())
}

fn round_trip_and_slicing() -> Outcome {
    let corpus = synth::bmp_corpus(50, 3);
    for (i, file) in corpus.iter().enumerate() {
        let img = bmp::parse_bmp(file).map_err(|e| format!("file {i}: {e}"))?;
        ensure(&bmp::encode_bmp(&img) == file, || {
            format!("file {i} differs after encode(parse)")
        })?;
    }
    let mut rng = SeededRng::stream(3, "acceptance/shapes");
    for _ in 0..20 {
        let (w, h) = (1 + rng.below_usize(40), 1 + rng.below_usize(40));
        let bytes = bmp::encode_bmp(&synth::scene(w, h, &mut rng));
        ensure(bmp::encode_bmp(&bmp::parse_bmp(&bytes).unwrap()) == bytes, || {
            format!("{w}x{h} round trip")
        })?;
    }
    let mut lens = Vec::new();
    for (ratio, want) in Ratio::standard_set().into_iter().zip([1876, 1251, 626]) {
        for file in &corpus {
            ensure(file.len() == 3126, || {
                format!("corpus file of {} bytes", file.len())
            })?;
            let rec = slice_fragment("x".to_string(), file.clone(), ratio).unwrap();
            ensure(rec.real_fragment().len() == want, || {
                format!("{ratio}: {} bytes", rec.real_fragment().len())
            })?;
            ensure(
                [rec.input_fragment(), rec.real_fragment()].concat() == *file,
                || "fragments do not concatenate back".into(),
            )?;
        }
        lens.push(want);
    }
    Ok(format!("50 files byte-identical; real fragments {lens:?} bytes"))
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

fn workspace(images: usize, decoys_per_format: usize, config: &str) -> (Workspace, RunConfig) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    synth::write_bmp_corpus(&root.join("corpus"), images, 40).unwrap();
    synth::write_decoys(&root.join("decoys"), decoys_per_format, 41).unwrap();
    let path = root.join("run.toml");
    fs::write(&path, config).unwrap();
    let cfg = RunConfig::load(Some(&path), &Overrides::default()).unwrap();
    (Workspace { _dir: dir, root }, cfg)
}

fn perfect_predictor_matching() -> Outcome {
    let (_ws, cfg) = workspace(
        60,
        3,
        "seed = 2024\nper_ratio_count = 20\n[pool]\nsize = 100\ndecoy_dir = \"decoys\"\n[matching]\nper_ratio_sample = 10\n",
    );
    pipeline::cmd_prepare(&cfg).map_err(|e| e.to_string())?;
    let o = pipeline::cmd_match(
        &cfg,
        &MatchOptions {
            sample: None,
            perfect: true,
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(o.errors.is_empty(), || format!("{:?}", o.errors))?;
    let tally = fs::read_to_string(cfg.output_dir.join("match/tally.csv")).unwrap();
    let want = "category,count\nrank_1,30\ntop_5_not_1,0\nmissed,0\ntotal,30\n";
    ensure(tally == want, || format!("tally {tally:?}"))?;
    let first = fs::read_dir(cfg.output_dir.join("match/rankings/ratio_2_5"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap();
    let rows = fs::read_to_string(first.path()).unwrap().lines().count() - 1;
    ensure(rows == 100, || format!("pool of {rows}"))?;
    Ok("tally (30, 0, 0) over 100-entry pools".into())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn directional_trend() -> Outcome {
    let (_ws, cfg) = workspace(
        500,
        1,
        "seed = 77\nper_ratio_count = 100\n[predictor]\nkind = \"builtin\"\norder = 3\n[pool]\ndecoy_dir = \"decoys\"\n",
    );
    pipeline::cmd_prepare(&cfg).map_err(|e| e.to_string())?;
    let model = pipeline::cmd_train(&cfg).map_err(|e| e.to_string())?;
    let info = fs::read_to_string(cfg.output_dir.join("model.json")).unwrap();
    let trained = serde_json::from_str::<serde_json::Value>(&info).unwrap()["training_images"]
        .as_array()
        .unwrap()
        .len();
    ensure(trained >= 200 && model.order() == 3, || {
        format!("{trained} training images")
    })?;
    let p = pipeline::cmd_predict(&cfg).map_err(|e| e.to_string())?;
    ensure(p.errors.is_empty(), || format!("{:?}", p.errors))?;
    let a = pipeline::cmd_analyze(&cfg, &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
    ensure(a.errors.is_empty(), || format!("{:?}", a.errors))?;
    let csv = fs::read_to_string(cfg.output_dir.join("analysis/metrics.csv")).unwrap();
    let mut by_set: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let e = by_set.entry(f[0].to_string()).or_default();
        e.0.push(f[2].parse().unwrap());
        e.1.push(f[3].parse().unwrap());
    }
    let (chi1, cos1) = (&by_set["ratio_2_5"].0, &by_set["ratio_2_5"].1);
    let (chi3, cos3) = (&by_set["ratio_4_5"].0, &by_set["ratio_4_5"].1);
    ensure(chi1.len() >= 100 && chi3.len() >= 100, || {
        "too few held-out records".into()
    })?;
    let detail = format!(
        "chi P1 {:.2} -> P3 {:.2}, cos P1 {:.4} -> P3 {:.4} ({} training images)",
        mean(chi1),
        mean(chi3),
        mean(cos1),
        mean(cos3),
        trained
    );
    ensure(mean(chi3) < mean(chi1) && mean(cos3) > mean(cos1), || {
        detail.clone()
    })?;
    Ok(detail)
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// Square root of a positive rational to f64, correctly rounded up to a few ulps.
fn sqrt_rational(r: &BigRational) -> f64 {
    let approx = r.to_f64().unwrap().sqrt();
    // one Newton step in exact arithmetic
    let x = rational(approx);
    if x.is_zero() {
        return 0.0;
    }
    let two = BigRational::from_integer(BigInt::from(2));
    ((&x + r / &x) / two).to_f64().unwrap()
}

fn quantile_rational(sorted: &[BigRational], q: BigRational) -> BigRational {
    let h = BigRational::from_integer(BigInt::from(sorted.len() - 1)) * q;
    let lo = h.floor().to_integer().to_usize().unwrap();
    let hi = h.ceil().to_integer().to_usize().unwrap();
    let frac = &h - BigRational::from_integer(BigInt::from(lo));
    &sorted[lo] + frac * (&sorted[hi] - &sorted[lo])
}

fn statistics_correctness() -> Outcome {
    let mut rng = SeededRng::stream(6, "acceptance/stats");
    let tol = 1e-12;
    for i in 0..1000 {
        let n = 2 + rng.below_usize(300);
        let scale = [1e-3, 1.0, 500.0][i % 3];
        let values: Vec<f64> = (0..n).map(|_| (rng.unit_f64() - 0.3) * scale).collect();
        let s = stats::summarize(&values, Metric::ChiSquare, "x").unwrap();
        let exact: Vec<BigRational> = values.iter().map(|&v| rational(v)).collect();
        let nr = BigRational::from_integer(BigInt::from(n));
        let m = exact.iter().fold(BigRational::zero(), |a, b| a + b) / &nr;
        let ss = exact.iter().fold(BigRational::zero(), |a, v| {
            let d = v - &m;
            a + &d * &d
        });
        let var = ss / BigRational::from_integer(BigInt::from(n - 1));
        let sd = sqrt_rational(&var);
        let mut sorted = exact.clone();
        sorted.sort();
        let median = quantile_rational(&sorted, BigRational::new(BigInt::from(1), BigInt::from(2)));
        let checks = [
            ("mean", s.mean, m.to_f64().unwrap()),
            ("std", s.std_dev, sd),
            ("median", s.median, median.to_f64().unwrap()),
            ("min", s.min, sorted[0].to_f64().unwrap()),
            ("max", s.max, sorted[n - 1].to_f64().unwrap()),
        ];
        for (name, got, want) in checks {
            ensure(rel_close(got, want, tol), || {
                format!("sample {i} {name}: {got} vs {want}")
            })?;
        }
        ensure(s.n == n, || "n".into())?;
        let ci = Z_95 * s.std_dev / (n as f64).sqrt();
        ensure(s.ci95_margin == ci, || {
            format!("sample {i} ci {} vs {ci}", s.ci95_margin)
        })?;
        ensure(
            rel_close(s.ci95_margin, 1.96 * sd / (n as f64).sqrt(), tol),
            || format!("sample {i} ci vs oracle"),
        )?;
    }
    let s = stats::summarize(&[1.0, 2.0, 3.0, 4.0], Metric::Cosine, "x").unwrap();
    ensure(
        (s.std_dev - 1.2909944487358056).abs() < 1e-15 && (s.ci95_margin - 1.2651745597610895).abs() < 1e-15,
        || format!("[1,2,3,4]: {s:?}"),
    )?;
    Ok("1000 samples match exact rational oracle; CI = 1.96 s / sqrt(n)".into())
}

fn random_pool(rng: &mut SeededRng, len: usize, size: usize) -> (Vec<u8>, FragmentPool) {
    let predicted = random_bytes(rng, len, len);
    let true_index = rng.below_usize(size);
    let entries = (0..size)
        .map(|i| PoolEntry {
            pool_index: i,
            format: if i == true_index {
                SourceFormat::Bmp
            } else {
                SourceFormat::Wav
            },
            origin: None,
            bytes: random_bytes(rng, len, len),
        })
        .collect();
    (
        predicted,
        FragmentPool {
            target_length: len,
            entries,
            true_index,
        },
    )
}

fn score_spot_checks() -> Outcome {
    let d = MatchWeights::default();
    ensure(score(0.0, 0.0, 1.0, &d) == -10.0, || "score(0,0,1) != -10".into())?;
    let s = score(409.58, 0.1864, 0.6690, &d);
    ensure((s - -0.7302).abs() <= 1e-12, || format!("Table-1 means give {s}"))?;
    let mut rng = SeededRng::stream(7, "acceptance/scaling");
    for i in 0..100 {
        let len = 64 + rng.below_usize(600);
        let size = 20 + rng.below_usize(81);
        let (predicted, pool) = random_pool(&mut rng, len, size);
        let w = MatchWeights {
            alpha: rng.unit_f64() * 0.1,
            beta: rng.unit_f64() * 20.0,
            gamma: rng.unit_f64() * 20.0,
        };
        let k = 10f64.powf(rng.unit_f64() * 6.0 - 3.0);
        let base = rank_pool("p", &predicted, &pool, &w).unwrap();
        let scaled = rank_pool("p", &predicted, &pool, &w.scaled(k)).unwrap();
        let order =
            |r: &gencarve::matcher::PoolRanking| r.entries.iter().map(|c| c.pool_index).collect::<Vec<_>>();
        ensure(order(&base) == order(&scaled), || {
            format!("pool {i}: order changed under scale {k}")
        })?;
    }
    Ok("score(0,0,1) = -10; P1 means -> -0.7302; 100 pools rank-invariant under scaling".into())
}

fn fuzz_frame(rng: &mut SeededRng, requested: usize) -> Vec<u8> {
    match rng.below(4) {
        0 => {
            // any magic other than a response or error frame
            let mut magic = [rng.below(256) as u8, rng.below(256) as u8];
            while &magic == RESPONSE_MAGIC || &magic == ERROR_MAGIC {
                magic = [rng.below(256) as u8, rng.below(256) as u8];
            }
            let mut f = magic.to_vec();
            let tail = rng.below_usize(64);
            f.extend((0..4 + tail).map(|_| rng.below(256) as u8));
            f
        }
        1 => {
            // declares more than was requested
            let extra = 1 + rng.below_usize(1 << 20);
            let mut f = RESPONSE_MAGIC.to_vec();
            f.extend_from_slice(&((requested + extra) as u32).to_le_bytes());
            f.extend((0..rng.below_usize(32)).map(|_| 0x41));
            f
        }
        2 => {
            let mut f = encode_response(&vec![0x42; requested + 1 + rng.below_usize(8)]);
            f[0] ^= 1 + rng.below(255) as u8;
            f
        }
        _ => {
            let mut f = ERROR_MAGIC.to_vec();
            let msg: Vec<u8> = (0..rng.below_usize(40)).map(|_| rng.below(256) as u8).collect();
            f.extend_from_slice(&(msg.len() as u32).to_le_bytes());
            f.extend(msg);
            f
        }
    }
}

fn protocol_robustness() -> Outcome {
    // a full predict run against the echo double, through the binary
    let echo_cfg = format!(
        "seed = 1\nper_ratio_count = 3\n[predictor]\nkind = \"external\"\ncommand = [{BIN:?}, \"mock-predictor\", \"--mode\", \"echo\"]\ntimeout_ms = 5000\n"
    );
    let (_ws, cfg) = workspace(9, 1, &echo_cfg);
    pipeline::cmd_prepare(&cfg).map_err(|e| e.to_string())?;
    let o = pipeline::cmd_predict(&cfg).map_err(|e| e.to_string())?;
    ensure(o.processed == 9 && o.errors.is_empty(), || {
        format!("echo run {o:?}")
    })?;

    let mut rng = SeededRng::stream(8, "acceptance/fuzz");
    let start = Instant::now();
    let timeout = Duration::from_secs(2);
    for i in 0..10_000 {
        let requested = 1 + rng.below_usize(4096);
        let mut script = handshake_reply().to_vec();
        script.extend(fuzz_frame(&mut rng, requested));
        let mut p = ExternalPredictor::from_streams(io::Cursor::new(script), io::sink(), timeout)
            .map_err(|e| format!("frame {i}: handshake {e}"))?;
        match p.predict(b"prefix", requested) {
            Err(PredictError::Protocol(_)) => {}
            other => return Err(format!("frame {i}: expected ProtocolError, got {other:?}")),
        }
        ensure(!p.is_open(), || format!("frame {i}: connection left open"))?;
    }
    let fuzz_time = start.elapsed();

    // a predictor that never answers is cut off by the deadline
    let (reader, _writer) = io::pipe().unwrap();
    let t = Instant::now();
    let r = ExternalPredictor::from_streams(reader, io::sink(), Duration::from_millis(200));
    ensure(matches!(r, Err(PredictError::Timeout(_))), || {
        "silent predictor did not time out".into()
    })?;
    ensure(t.elapsed() < Duration::from_secs(5), || {
        "timeout not enforced".into()
    })?;
    Ok(format!(
        "echo run 9/9; 10000 malformed frames -> ProtocolError in {:.2}s; silent peer times out",
        fuzz_time.as_secs_f64()
    ))
}

fn collect_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "run.log" {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let config = "seed = 31337\nper_ratio_count = 12\n[predictor]\nkind = \"builtin\"\npolicy = { mode = \"temperature\", temperature = 0.8, seed = 4 }\n[pool]\nsize = 40\ndecoy_dir = \"decoys\"\n[matching]\nper_ratio_sample = 4\n";
    let (ws, cfg) = workspace(60, 2, config);
    let mut trees = Vec::new();
    for (run, jobs) in [(1, 1usize), (2, 4)] {
        let mut c = cfg.clone();
        c.output_dir = ws.root.join(format!("run{run}"));
        c.jobs = jobs;
        pipeline::cmd_prepare(&c).map_err(|e| e.to_string())?;
        pipeline::cmd_train(&c).map_err(|e| e.to_string())?;
        pipeline::cmd_predict(&c).map_err(|e| e.to_string())?;
        let first = c.output_dir.join("manifest.json");
        let id = {
            let m = gencarve::fragmenter::read_manifest(&c.output_dir).unwrap();
            m.ratio_sets[0].records[0].source_id.clone()
        };
        ensure(first.is_file(), || "no manifest".into())?;
        pipeline::cmd_analyze(
            &c,
            &AnalyzeOptions {
                heatmap: Some(id.clone()),
                reconstruct: Some(id),
            },
        )
        .map_err(|e| e.to_string())?;
        pipeline::cmd_match(&c, &MatchOptions::default()).map_err(|e| e.to_string())?;
        pipeline::cmd_report(&c).map_err(|e| e.to_string())?;
        trees.push(collect_files(&c.output_dir));
    }
    let (a, b) = (&trees[0], &trees[1]);
    ensure(a.keys().eq(b.keys()), || "file sets differ".into())?;
    for (k, v) in a {
        ensure(&b[k] == v, || format!("{} differs", k.display()))?;
    }
    for must in [
        "manifest.json",
        "predictions/index.json",
        "analysis/metrics.csv",
        "match/tally.csv",
    ] {
        ensure(a.contains_key(Path::new(must)), || format!("{must} missing"))?;
    }
    Ok(format!(
        "{} files byte-identical across runs with 1 and 4 workers",
        a.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("metric oracle equivalence", metric_oracle_equivalence),
        ("metric boundary suite", metric_boundaries),
        ("round-trip and slicing arithmetic", round_trip_and_slicing),
        ("perfect-predictor matching guarantee", perfect_predictor_matching),
        ("directional similarity trend", directional_trend),
        ("statistics correctness", statistics_correctness),
        ("score function spot-checks", score_spot_checks),
        ("protocol robustness", protocol_robustness),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
