//! Train the order-k byte model, save and reload it, and decode a continuation
//! three ways.

use gencarve::fragmenter::{slice_fragment, Ratio};
use gencarve::metrics::byte_scores;
use gencarve::predictor::{load_model, model_id, predict, save_model, train, SamplingPolicy};
use gencarve::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = synth::bmp_corpus(220, 3);
    let (training, held_out) = corpus.split_at(200);
    let model = train(training, 3, 0.1)?;
    println!(
        "{} with contexts per level {:?}",
        model_id(&model),
        model.context_counts()
    );

    let bytes = save_model(&model);
    let model = load_model(&bytes)?;
    println!("serialized to {} bytes", bytes.len());

    let rec = slice_fragment("held_out_0".to_string(), held_out[0].clone(), Ratio::new(3, 5)?)?;
    for policy in [
        SamplingPolicy::greedy(),
        SamplingPolicy::temperature(1.0, 9),
        SamplingPolicy::top_k(8, 9),
    ] {
        let out = predict(&model, rec.input_fragment(), rec.continuation_len(), &policy)?;
        let s = byte_scores(&out, rec.real_fragment())?;
        println!(
            "{:<40} chi {:10.2} jsd {:.4} cos {:.4}  first bytes {:02x?}",
            serde_json::to_string(&policy)?,
            s.chi_square,
            s.jsd,
            s.cosine,
            &out[..6]
        );
    }
    Ok(())
}
