//! Procedural stand-ins for an image corpus and for mixed-format decoy files.
//!
//! Images are small scenes (gradients, a horizon, disks, stripes, grain) so
//! their byte streams carry the row and channel regularities of real photos.
//! Decoys carry real container headers around synthetic payloads.

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::bmp::{self, BmpImage};
use crate::fragmenter::SourceFormat;
use crate::rng::SeededRng;

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn random_color(rng: &mut SeededRng) -> [f64; 3] {
    [
        rng.below(256) as f64,
        rng.below(256) as f64,
        rng.below(256) as f64,
    ]
}

/// One synthetic `width` x `height` scene.
pub fn scene(width: usize, height: usize, rng: &mut SeededRng) -> BmpImage {
    let top = random_color(rng);
    let bottom = random_color(rng);
    let horizon = height as f64 * (0.3 + 0.4 * rng.unit_f64());
    let ground = random_color(rng);
    let disks: Vec<(f64, f64, f64, [f64; 3])> = (0..rng.below(4))
        .map(|_| {
            (
                rng.unit_f64() * width as f64,
                rng.unit_f64() * height as f64,
                2.0 + rng.unit_f64() * width as f64 / 4.0,
                random_color(rng),
            )
        })
        .collect();
    let stripes = rng.below(3) == 0;
    let stripe_period = 2 + rng.below(6) as usize;
    let grain = rng.unit_f64() * 12.0;

    let mut pixels = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let t = r as f64 / (height - 1).max(1) as f64;
            let mut px = if (r as f64) < horizon {
                [0, 1, 2].map(|k| top[k] * (1.0 - t) + bottom[k] * t)
            } else {
                let shade = 0.7 + 0.3 * (c as f64 / width as f64);
                ground.map(|v| v * shade)
            };
            for &(cx, cy, rad, col) in &disks {
                let d = ((c as f64 - cx).powi(2) + (r as f64 - cy).powi(2)).sqrt();
                if d < rad {
                    let edge = ((rad - d) / 1.5).min(1.0);
                    px = [0, 1, 2].map(|k| px[k] * (1.0 - edge) + col[k] * edge);
                }
            }
            if stripes && (r / stripe_period).is_multiple_of(2) {
                px = px.map(|v| v * 0.8);
            }
            let noise = (rng.unit_f64() - 0.5) * grain;
            pixels.push(px.map(|v| clamp_u8(v + noise)));
        }
    }
    BmpImage::from_bgr(width, height, pixels).expect("nonzero scene size")
}

/// `n` encoded 32x32 scenes, reproducible from `seed`.
pub fn bmp_corpus(n: usize, seed: u64) -> Vec<Vec<u8>> {
    (0..n)
        .map(|i| {
            let mut rng = SeededRng::stream(seed, &format!("synth/{i}"));
            bmp::encode_bmp(&scene(32, 32, &mut rng))
        })
        .collect()
}

/// Writes `img_00000.bmp`, `img_00001.bmp`, ... into `dir`.
pub fn write_bmp_corpus(dir: &Path, n: usize, seed: u64) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    bmp_corpus(n, seed)
        .into_iter()
        .enumerate()
        .map(|(i, bytes)| {
            let path = dir.join(format!("img_{i:05}.bmp"));
            fs::write(&path, bytes)?;
            Ok(path)
        })
        .collect()
}

fn wav(rng: &mut SeededRng) -> Vec<u8> {
    let rate = 22_050u32;
    let samples = 12_000usize;
    let f1 = 110.0 + rng.unit_f64() * 660.0;
    let f2 = f1 * (1.5 + rng.unit_f64());
    let data_len = (samples * 2) as u32;
    let mut out = Vec::with_capacity(44 + samples * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for i in 0..samples {
        let t = i as f64 / rate as f64;
        let env = (-(t * 2.0)).exp();
        let v = env * (0.6 * (2.0 * PI * f1 * t).sin() + 0.3 * (2.0 * PI * f2 * t).sin())
            + (rng.unit_f64() - 0.5) * 0.02;
        out.extend_from_slice(&((v * 32_000.0) as i16).to_le_bytes());
    }
    out
}

fn rgb_scene(size: usize, rng: &mut SeededRng) -> image::RgbImage {
    let img = scene(size, size, rng);
    image::RgbImage::from_fn(size as u32, size as u32, |x, y| {
        let [b, g, r] = img.pixel(y as usize, x as usize);
        image::Rgb([r, g, b])
    })
}

fn encoded(img: &image::RgbImage, format: image::ImageFormat) -> Vec<u8> {
    let mut cursor = io::Cursor::new(Vec::new());
    img.write_to(&mut cursor, format).expect("in-memory encode");
    cursor.into_inner()
}

fn mp4(rng: &mut SeededRng) -> Vec<u8> {
    fn boxed(kind: &[u8; 4], body: &[u8]) -> Vec<u8> {
        let mut b = ((body.len() + 8) as u32).to_be_bytes().to_vec();
        b.extend_from_slice(kind);
        b.extend_from_slice(body);
        b
    }
    let mut ftyp = b"isom".to_vec();
    ftyp.extend_from_slice(&0x200u32.to_be_bytes());
    ftyp.extend_from_slice(b"isomiso2avc1mp41");
    let mut mvhd = vec![0u8; 100];
    mvhd[12..16].copy_from_slice(&1000u32.to_be_bytes());
    let moov = boxed(b"moov", &boxed(b"mvhd", &mvhd));
    let payload: Vec<u8> = (0..16_384).map(|_| rng.below(256) as u8).collect();
    [boxed(b"ftyp", &ftyp), moov, boxed(b"mdat", &payload)].concat()
}

/// Bytes of one synthetic decoy file of the given format.
pub fn decoy_bytes(format: SourceFormat, rng: &mut SeededRng) -> Vec<u8> {
    match format {
        SourceFormat::Bmp => bmp::encode_bmp(&scene(48, 48, rng)),
        SourceFormat::Wav => wav(rng),
        SourceFormat::Jpeg => encoded(&rgb_scene(192, rng), image::ImageFormat::Jpeg),
        SourceFormat::Png => encoded(&rgb_scene(64, rng), image::ImageFormat::Png),
        SourceFormat::Mp4 => mp4(rng),
    }
}

/// Writes `per_format` decoys of each non-BMP format into `dir`.
pub fn write_decoys(dir: &Path, per_format: usize, seed: u64) -> io::Result<Vec<(SourceFormat, PathBuf)>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for format in [
        SourceFormat::Wav,
        SourceFormat::Jpeg,
        SourceFormat::Png,
        SourceFormat::Mp4,
    ] {
        for i in 0..per_format {
            let mut rng = SeededRng::stream(seed, &format!("decoy/{format}/{i}"));
            let ext = if format == SourceFormat::Jpeg {
                "jpg"
            } else {
                format.as_str()
            };
            let path = dir.join(format!("decoy_{i:03}.{ext}"));
            fs::write(&path, decoy_bytes(format, &mut rng))?;
            out.push((format, path));
        }
    }
    Ok(out)
}
