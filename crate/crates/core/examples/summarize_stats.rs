use gencarve::rng::SeededRng;
use gencarve::stats::{box_summary, summarize, summary_table, Metric};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = SeededRng::from_seed(3);
    let sets = ["P1".to_string(), "P2".to_string(), "P3".to_string()];
    let mut rows = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for m in Metric::ALL {
            let spread = 1.0 + i as f64;
            let values: Vec<f64> = (0..750).map(|_| rng.unit_f64() * spread).collect();
            rows.push(summarize(&values, m, set)?);
        }
    }
    print!("{}", summary_table(&rows, &sets));

    let b = box_summary(&[1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 40.0])?;
    println!(
        "\nbox: q1 {} median {} q3 {} whiskers {}..{} outliers {:?}",
        b.q1, b.median, b.q3, b.lower_whisker, b.upper_whisker, b.outliers
    );
    Ok(())
}
