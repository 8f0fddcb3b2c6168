//! Cut a corpus into input/real pairs and write a dataset with its manifest.

use gencarve::fragmenter::{build_dataset, slice_fragment, ImageProfile, Ratio};
use gencarve::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = synth::bmp_corpus(1, 7).remove(0);
    for ratio in Ratio::standard_set() {
        let rec = slice_fragment("demo".to_string(), file.clone(), ratio)?;
        println!(
            "{ratio}: cut at {:4}, input {:4} bytes, real {:4} bytes",
            rec.cut(),
            rec.input_fragment().len(),
            rec.real_fragment().len()
        );
    }

    let dir = std::env::temp_dir().join("gencarve-slice-example");
    let corpus = dir.join("corpus");
    synth::write_bmp_corpus(&corpus, 30, 7)?;
    let manifest = build_dataset(
        &corpus,
        &dir.join("out"),
        &Ratio::standard_set(),
        10,
        42,
        ImageProfile::default(),
    )?;
    for set in &manifest.ratio_sets {
        let ids: Vec<&str> = set.records.iter().take(3).map(|r| r.source_id.as_str()).collect();
        println!("{} {} records, first {:?}", set.tag, set.records.len(), ids);
    }
    println!("manifest at {}", dir.join("out/manifest.json").display());
    Ok(())
}
