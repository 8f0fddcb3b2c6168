use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{slice_fragment, FragmentError, FragmentRecord, Ratio};
use crate::bmp::{self, BmpImage};
use crate::digest::sha256_hex;
use crate::rng::{SeededRng, PRNG_NAME, PRNG_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// Target image shape every corpus file is normalized to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageProfile {
    pub width: usize,
    pub height: usize,
}

impl Default for ImageProfile {
    fn default() -> Self {
        ImageProfile {
            width: 32,
            height: 32,
        }
    }
}

impl ImageProfile {
    pub fn file_size(&self) -> usize {
        bmp::encoded_len(self.width, self.height)
    }
}

/// A corpus file after normalization to the profile.
#[derive(Debug, Clone)]
pub struct CorpusImage {
    pub source_id: String,
    pub file_name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrngInfo {
    pub name: String,
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub source_id: String,
    pub source_file: String,
    pub full_len: usize,
    pub cut: usize,
    pub full_sha256: String,
    pub input_sha256: String,
    pub real_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioSet {
    pub ratio: Ratio,
    pub tag: String,
    pub records: Vec<ManifestRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: u64,
    pub prng: PrngInfo,
    pub profile: ImageProfile,
    pub ratio_sets: Vec<RatioSet>,
}

impl DatasetManifest {
    pub fn record_count(&self) -> usize {
        self.ratio_sets.iter().map(|s| s.records.len()).sum()
    }

    /// Every source id referenced by any ratio set.
    pub fn source_ids(&self) -> HashSet<&str> {
        self.ratio_sets
            .iter()
            .flat_map(|s| s.records.iter().map(|r| r.source_id.as_str()))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn sanitize_id(stem: &str) -> String {
    stem.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Decodes any supported image and normalizes it to a canonical 24-bit BMP
/// of the profile's shape. Files that already match are kept verbatim.
pub fn normalize_image(bytes: &[u8], profile: ImageProfile) -> Option<Vec<u8>> {
    let img = match bmp::parse_bmp(bytes) {
        Ok(img) => img,
        Err(_) => {
            let decoded = image::load_from_memory(bytes).ok()?.to_rgb8();
            let (w, h) = decoded.dimensions();
            let pixels = decoded.pixels().map(|p| [p[2], p[1], p[0]]).collect();
            BmpImage::from_bgr(w as usize, h as usize, pixels).ok()?
        }
    };
    if img
        .check_profile(profile.width, profile.height, profile.file_size())
        .is_ok()
    {
        return Some(bytes.to_vec());
    }
    Some(bmp::encode_bmp(&bmp::resize_nearest(
        &img,
        profile.width,
        profile.height,
    )))
}

/// Reads every regular file in `dir` (sorted by name) and keeps those that
/// decode as images. Unreadable or undecodable files are skipped.
pub fn load_corpus(dir: &Path, profile: ImageProfile) -> Result<Vec<CorpusImage>, FragmentError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(FragmentError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();

    let converted: Vec<Option<(String, String, Vec<u8>)>> = paths
        .par_iter()
        .map(|p| {
            let raw = fs::read(p).ok()?;
            let bytes = normalize_image(&raw, profile)?;
            let stem = p.file_stem()?.to_string_lossy();
            let name = p.file_name()?.to_string_lossy().into_owned();
            Some((sanitize_id(&stem), name, bytes))
        })
        .collect();

    let mut seen = HashSet::new();
    let mut images = Vec::new();
    for (id, file_name, bytes) in converted.into_iter().flatten() {
        let mut source_id = id.clone();
        let mut n = 2;
        while !seen.insert(source_id.clone()) {
            source_id = format!("{id}-{n}");
            n += 1;
        }
        images.push(CorpusImage {
            source_id,
            file_name,
            bytes,
        });
    }
    Ok(images)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), FragmentError> {
    fs::write(path, bytes).map_err(FragmentError::io(path))
}

/// Selects `per_ratio_count` disjoint images per ratio from the corpus,
/// slices them and writes `<out>/<tag>/{full,input,real}/<id>.bin` plus the
/// manifest. Selection depends only on `seed` and the corpus contents.
pub fn build_dataset(
    corpus_dir: &Path,
    out_dir: &Path,
    ratios: &[Ratio],
    per_ratio_count: usize,
    seed: u64,
    profile: ImageProfile,
) -> Result<DatasetManifest, FragmentError> {
    let corpus = load_corpus(corpus_dir, profile)?;
    let manifest = build_dataset_from(&corpus, out_dir, ratios, per_ratio_count, seed, profile)?;
    Ok(manifest)
}

/// Same as [`build_dataset`] over an already-loaded corpus.
pub fn build_dataset_from(
    corpus: &[CorpusImage],
    out_dir: &Path,
    ratios: &[Ratio],
    per_ratio_count: usize,
    seed: u64,
    profile: ImageProfile,
) -> Result<DatasetManifest, FragmentError> {
    let needed = per_ratio_count * ratios.len();
    if corpus.len() < needed || per_ratio_count == 0 {
        return Err(FragmentError::InsufficientCorpus {
            needed: needed.max(1),
            available: corpus.len(),
        });
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    SeededRng::stream(seed, "dataset").shuffle(&mut order);

    let mut ratio_sets = Vec::with_capacity(ratios.len());
    for (k, ratio) in ratios.iter().enumerate() {
        let mut chosen: Vec<&CorpusImage> = order[k * per_ratio_count..(k + 1) * per_ratio_count]
            .iter()
            .map(|&i| &corpus[i])
            .collect();
        chosen.sort_by(|a, b| a.source_id.cmp(&b.source_id));

        let tag = ratio.tag();
        for sub in ["full", "input", "real"] {
            let dir = out_dir.join(&tag).join(sub);
            fs::create_dir_all(&dir).map_err(FragmentError::io(&dir))?;
        }

        let records = chosen
            .par_iter()
            .map(|img| {
                let rec = slice_fragment(img.source_id.clone(), img.bytes.clone(), *ratio)?;
                let name = format!("{}.bin", rec.source_id());
                let base = out_dir.join(&tag);
                write_file(&base.join("full").join(&name), rec.full_bytes())?;
                write_file(&base.join("input").join(&name), rec.input_fragment())?;
                write_file(&base.join("real").join(&name), rec.real_fragment())?;
                Ok(ManifestRecord {
                    source_id: rec.source_id().to_string(),
                    source_file: img.file_name.clone(),
                    full_len: rec.full_bytes().len(),
                    cut: rec.cut(),
                    full_sha256: sha256_hex(rec.full_bytes()),
                    input_sha256: sha256_hex(rec.input_fragment()),
                    real_sha256: sha256_hex(rec.real_fragment()),
                })
            })
            .collect::<Result<Vec<_>, FragmentError>>()?;

        ratio_sets.push(RatioSet {
            ratio: *ratio,
            tag,
            records,
        });
    }

    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        seed,
        prng: PrngInfo {
            name: PRNG_NAME.to_string(),
            version: PRNG_VERSION,
        },
        profile,
        ratio_sets,
    };
    fs::create_dir_all(out_dir).map_err(FragmentError::io(out_dir))?;
    write_file(&out_dir.join(MANIFEST_FILE), manifest.to_json().as_bytes())?;
    Ok(manifest)
}

pub fn read_manifest(out_dir: &Path) -> Result<DatasetManifest, FragmentError> {
    let path = out_dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(FragmentError::io(&path))?;
    Ok(serde_json::from_str(&text)?)
}

fn check_digest(path: &Path, bytes: &[u8], expected: &str) -> Result<(), FragmentError> {
    let actual = sha256_hex(bytes);
    if actual != expected {
        return Err(FragmentError::DigestMismatch {
            file: path.to_path_buf(),
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}

/// Loads every record of a dataset, verifying the stored fragments against
/// the manifest digests. Sets come back in manifest order.
pub fn load_dataset(out_dir: &Path) -> Result<(DatasetManifest, Vec<Vec<FragmentRecord>>), FragmentError> {
    let manifest = read_manifest(out_dir)?;
    let mut sets = Vec::with_capacity(manifest.ratio_sets.len());
    for set in &manifest.ratio_sets {
        let base = out_dir.join(&set.tag);
        let records = set
            .records
            .par_iter()
            .map(|m| {
                let name = format!("{}.bin", m.source_id);
                let full_path = base.join("full").join(&name);
                let full = fs::read(&full_path).map_err(FragmentError::io(&full_path))?;
                check_digest(&full_path, &full, &m.full_sha256)?;
                for (sub, expected) in [("input", &m.input_sha256), ("real", &m.real_sha256)] {
                    let p = base.join(sub).join(&name);
                    let bytes = fs::read(&p).map_err(FragmentError::io(&p))?;
                    check_digest(&p, &bytes, expected)?;
                }
                let rec = slice_fragment(m.source_id.clone(), full, set.ratio)?;
                if rec.cut() != m.cut {
                    return Err(FragmentError::DigestMismatch {
                        file: full_path,
                        expected: format!("cut {}", m.cut),
                        actual: format!("cut {}", rec.cut()),
                    });
                }
                Ok(rec)
            })
            .collect::<Result<Vec<_>, FragmentError>>()?;
        sets.push(records);
    }
    Ok((manifest, sets))
}
