//! Hide a real continuation among decoys cut from other file formats and rank
//! the pool against a prediction.

use gencarve::fragmenter::{build_pool, slice_fragment, DecoySource, Ratio, SourceFormat};
use gencarve::matcher::{rank_pool, MatchWeights};
use gencarve::predictor::{predict, train, SamplingPolicy};
use gencarve::rng::SeededRng;
use gencarve::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = synth::bmp_corpus(201, 5);
    let model = train(&corpus[..200], 3, 0.1)?;
    let rec = slice_fragment("target".to_string(), corpus[200].clone(), Ratio::new(3, 5)?)?;
    let predicted = predict(
        &model,
        rec.input_fragment(),
        rec.continuation_len(),
        &SamplingPolicy::greedy(),
    )?;

    let mut rng = SeededRng::from_seed(6);
    let decoys: Vec<DecoySource> = [
        SourceFormat::Wav,
        SourceFormat::Jpeg,
        SourceFormat::Png,
        SourceFormat::Mp4,
    ]
    .into_iter()
    .map(|format| DecoySource {
        format,
        label: format.to_string(),
        bytes: synth::decoy_bytes(format, &mut rng),
    })
    .collect();
    let pool = build_pool(rec.real_fragment(), SourceFormat::Bmp, &decoys, 100, None, 77)?;

    for (name, guess) in [("model", &predicted[..]), ("perfect", rec.real_fragment())] {
        let ranking = rank_pool(name, guess, &pool, &MatchWeights::default())?;
        println!(
            "{name}: true continuation ranked {} of {}",
            ranking.true_rank,
            pool.len()
        );
        for c in ranking.top(5) {
            println!(
                "  #{:<3} {:<5} S {:9.3} chi {:10.2} jsd {:.4} cos {:.4}",
                c.pool_index, pool.entries[c.pool_index].format, c.score, c.chi_square, c.jsd, c.cosine
            );
        }
    }
    Ok(())
}
