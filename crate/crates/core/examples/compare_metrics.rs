use gencarve::metrics::{byte_histogram, byte_scores, chi_square, cosine_similarity, jsd};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let real: Vec<u8> = (0..1876u32).map(|i| (i % 97) as u8).collect();
    let candidates: [(&str, Vec<u8>); 4] = [
        ("identical", real.clone()),
        ("shifted", real.iter().map(|b| b.wrapping_add(1)).collect()),
        ("constant", vec![0x41; real.len()]),
        ("reversed", real.iter().rev().copied().collect()),
    ];
    println!(
        "{:<10} {:>12} {:>8} {:>8}",
        "candidate", "chi-square", "JSD", "cosine"
    );
    for (name, bytes) in &candidates {
        let s = byte_scores(bytes, &real)?;
        println!(
            "{name:<10} {:>12.3} {:>8.4} {:>8.4}",
            s.chi_square, s.jsd, s.cosine
        );
    }

    // chi-square is not symmetric: observed first, expected second
    let a = byte_histogram(b"aaaab")?;
    let b = byte_histogram(b"abb")?;
    println!(
        "chi(a,b) = {:.3}, chi(b,a) = {:.3}, jsd = {:.4}, cos = {:.4}",
        chi_square(&a, &b),
        chi_square(&b, &a),
        jsd(&a.normalized(), &b.normalized()),
        cosine_similarity(&a, &b)?
    );
    Ok(())
}
