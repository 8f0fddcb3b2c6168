//! SSIM of a reconstruction (input followed by a constant guess) against the
//! original, written out as a PGM heatmap and CSV.

use gencarve::bmp;
use gencarve::fragmenter::{slice_fragment, Ratio};
use gencarve::metrics::{fragment_ssim, heatmap_csv, heatmap_pgm, ssim, DEFAULT_WINDOW};
use gencarve::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = synth::bmp_corpus(1, 12).remove(0);
    let rec = slice_fragment("scene".to_string(), file, Ratio::new(2, 5)?)?;
    let guess = vec![0x80; rec.continuation_len()];
    let res = fragment_ssim(&rec, &guess, DEFAULT_WINDOW)?;
    println!(
        "masked SSIM {:.4} over {} windows; local map {}x{}",
        res.global, res.windows_used, res.local_map.rows, res.local_map.cols
    );

    let original = bmp::to_grayscale(&bmp::parse_bmp(rec.full_bytes())?);
    println!(
        "ssim(original, original) = {}",
        ssim(&original, &original, DEFAULT_WINDOW, None)?.global
    );

    let dir = std::env::temp_dir().join("gencarve-ssim-example");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("heatmap.pgm"), heatmap_pgm(&res.local_map))?;
    std::fs::write(dir.join("heatmap.csv"), heatmap_csv(&res.local_map))?;
    println!("wrote {}", dir.display());
    Ok(())
}
