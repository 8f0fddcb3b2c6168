//! Parse a BMP, inspect it, map a byte offset to its pixel and write it back.
//!
//! `cargo run --example bmp_roundtrip [file.bmp]`

use gencarve::bmp;
use gencarve::rng::SeededRng;
use gencarve::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bytes = match std::env::args().nth(1) {
        Some(path) => std::fs::read(path)?,
        None => bmp::encode_bmp(&synth::scene(32, 32, &mut SeededRng::from_seed(1))),
    };
    let img = bmp::parse_bmp(&bytes)?;
    println!(
        "{}x{} {:?}, pixel data at {}, {} bytes",
        img.width(),
        img.height(),
        img.row_order(),
        img.pixel_data_offset(),
        img.file_size()
    );
    for offset in [0, 54, 1250, 1875, 2500, bytes.len() - 1] {
        match bmp::byte_offset_to_pixel(&img, offset)? {
            Some(p) => println!(
                "offset {offset:5} -> row {:2} col {:2} {:?}",
                p.row, p.col, p.channel
            ),
            None => println!("offset {offset:5} -> header or padding"),
        }
    }
    let gray = bmp::to_grayscale(&img);
    let mean = gray.values().iter().map(|&v| v as f64).sum::<f64>() / gray.values().len() as f64;
    println!("mean luma {mean:.2}");

    let again = bmp::encode_bmp(&img);
    println!("round trip identical: {}", again == bytes);
    Ok(())
}
