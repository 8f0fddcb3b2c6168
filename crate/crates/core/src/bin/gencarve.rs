use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gencarve::config::{Overrides, RunConfig};
use gencarve::pipeline::{self, AnalyzeOptions, MatchOptions, Outcome, PipelineError};
use gencarve::predictor::protocol::{self, ServeLimits};

#[derive(Parser)]
#[command(
    name = "gencarve",
    version,
    about = "Generative carving of fragmented BMP files"
)]
struct Cli {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Corpus directory.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Slice corpus images into input/real fragment pairs.
    Prepare,
    /// Train the built-in byte model on held-out corpus images.
    Train,
    /// Predict every record's continuation.
    Predict,
    /// Score predictions and write summaries.
    Analyze {
        /// Record id (or tag/id) to write an SSIM heatmap for.
        #[arg(long)]
        heatmap: Option<String>,
        /// Record id (or tag/id) to write reconstruction panels for.
        #[arg(long)]
        reconstruct: Option<String>,
    },
    /// Rank sampled predictions against mixed-format pools.
    Match {
        /// Records per ratio set.
        #[arg(long)]
        sample: Option<usize>,
        /// Use each real fragment as its own prediction.
        #[arg(long)]
        perfect: bool,
    },
    /// Collect results into report.txt.
    Report,
    /// Test double speaking the predictor protocol on stdin/stdout.
    #[command(hide = true)]
    MockPredictor {
        #[arg(long, value_enum, default_value = "echo")]
        mode: MockMode,
        /// Requests answered normally before the mode takes effect.
        #[arg(long, default_value_t = 0)]
        after: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MockMode {
    Echo,
    BadMagic,
    Short,
    Long,
    Crash,
    Hang,
}

fn mock(mode: MockMode, after: usize) -> io::Result<()> {
    let stdin = io::stdin().lock();
    let mut out = io::stdout().lock();
    let mut input = io::BufReader::new(stdin);
    let mut hello = [0u8; 4];
    input.read_exact(&mut hello)?;
    if &hello != protocol::HANDSHAKE {
        return Ok(());
    }
    out.write_all(&protocol::handshake_reply())?;
    out.flush()?;
    let mut served = 0;
    while let Ok(Some(req)) = protocol::read_request(&mut input, ServeLimits::default()) {
        let n = req.requested_len as usize;
        let active = served >= after;
        served += 1;
        let frame = match mode {
            _ if !active => protocol::encode_response(&vec![0x41; n]),
            MockMode::Echo => protocol::encode_response(&vec![0x41; n]),
            MockMode::Short => protocol::encode_response(&vec![0x41; n.saturating_sub(1)]),
            MockMode::Long => protocol::encode_response(&vec![0x41; n + 1]),
            MockMode::BadMagic => {
                let mut f = protocol::encode_response(&vec![0x41; n]);
                f[..2].copy_from_slice(b"XX");
                f
            }
            MockMode::Crash => std::process::exit(3),
            MockMode::Hang => loop {
                std::thread::park();
            },
        };
        out.write_all(&frame)?;
        out.flush()?;
    }
    Ok(())
}

fn report(name: &str, result: &Result<Outcome, PipelineError>) {
    match result {
        Ok(o) if o.is_partial() => {
            for e in &o.errors {
                eprintln!("{name}: {e}");
            }
            eprintln!("{name}: {} ok, {} failed", o.processed, o.errors.len());
        }
        Ok(o) => eprintln!("{name}: {} ok", o.processed),
        Err(e) => eprintln!("{name}: error: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::MockPredictor { mode, after } = cli.command {
        return match mock(mode, after) {
            Ok(()) => ExitCode::SUCCESS,
            Err(_) => ExitCode::from(2),
        };
    }
    let overrides = Overrides {
        seed: cli.seed,
        jobs: cli.jobs,
        output_dir: cli.out,
        corpus_dir: cli.corpus,
    };
    let cfg = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (name, result) = match cli.command {
        Command::Prepare => (
            "prepare",
            pipeline::cmd_prepare(&cfg).map(|m| Outcome {
                processed: m.record_count(),
                errors: Vec::new(),
            }),
        ),
        Command::Train => (
            "train",
            pipeline::cmd_train(&cfg).map(|_| Outcome {
                processed: 1,
                errors: Vec::new(),
            }),
        ),
        Command::Predict => ("predict", pipeline::cmd_predict(&cfg)),
        Command::Analyze { heatmap, reconstruct } => (
            "analyze",
            pipeline::cmd_analyze(&cfg, &AnalyzeOptions { heatmap, reconstruct }),
        ),
        Command::Match { sample, perfect } => (
            "match",
            pipeline::cmd_match(&cfg, &MatchOptions { sample, perfect }),
        ),
        Command::Report => ("report", pipeline::cmd_report(&cfg)),
        Command::MockPredictor { .. } => unreachable!(),
    };
    report(name, &result);
    if let Err(e) = &result {
        pipeline::log(&cfg, &format!("{name}: error: {e}"));
    }
    ExitCode::from(pipeline::exit_code(&result) as u8)
}
