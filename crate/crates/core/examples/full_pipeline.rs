//! Every phase end to end on a generated corpus: prepare, train, predict,
//! analyze, match and report.
//!
//! `cargo run --release --example full_pipeline [workdir]`

use std::fs;
use std::path::PathBuf;

use gencarve::config::{Overrides, RunConfig};
use gencarve::pipeline::{self, AnalyzeOptions, MatchOptions};
use gencarve::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let work = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("gencarve-pipeline-example"));
    synth::write_bmp_corpus(&work.join("corpus"), 360, 1)?;
    synth::write_decoys(&work.join("decoys"), 3, 2)?;
    let config = work.join("run.toml");
    fs::write(
        &config,
        "seed = 2024\nper_ratio_count = 40\n[pool]\nsize = 100\ndecoy_dir = \"decoys\"\n[matching]\nper_ratio_sample = 10\n",
    )?;
    let cfg = RunConfig::load(Some(&config), &Overrides::default())?;

    let manifest = pipeline::cmd_prepare(&cfg)?;
    pipeline::cmd_train(&cfg)?;
    pipeline::cmd_predict(&cfg)?;
    let first = manifest.ratio_sets[0].records[0].source_id.clone();
    pipeline::cmd_analyze(
        &cfg,
        &AnalyzeOptions {
            heatmap: Some(first.clone()),
            reconstruct: Some(first),
        },
    )?;
    pipeline::cmd_match(&cfg, &MatchOptions::default())?;
    pipeline::cmd_report(&cfg)?;

    print!(
        "{}",
        fs::read_to_string(cfg.output_dir.join(pipeline::REPORT_FILE))?
    );
    println!("\noutputs in {}", cfg.output_dir.display());
    Ok(())
}
