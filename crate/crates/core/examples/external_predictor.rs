//! Talk to a predictor over the stdio frame protocol.
//!
//! With no arguments an in-process predictor (answering with the prefix's
//! last byte repeated) is served over pipes. Otherwise the arguments are the
//! command to launch, e.g.
//! `cargo run --example external_predictor -- target/debug/gencarve mock-predictor`.

use std::io;
use std::thread;
use std::time::Duration;

use gencarve::predictor::protocol::{serve, ServeLimits};
use gencarve::predictor::ExternalPredictor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let command: Vec<String> = std::env::args().skip(1).collect();
    let timeout = Duration::from_secs(5);
    let mut host = if command.is_empty() {
        let (host_read, peer_write) = io::pipe()?;
        let (peer_read, host_write) = io::pipe()?;
        thread::spawn(move || {
            serve(peer_read, peer_write, ServeLimits::default(), |prefix, n| {
                vec![*prefix.last().unwrap_or(&0); n as usize]
            })
        });
        ExternalPredictor::from_streams(host_read, host_write, timeout)?
    } else {
        ExternalPredictor::spawn(&command, timeout)?
    };

    for (prefix, n) in [(&b"BM6\x0c"[..], 8), (&b"hello"[..], 4)] {
        let out = host.predict(prefix, n)?;
        println!(
            "{:?} + {n} bytes -> {:02x?}",
            String::from_utf8_lossy(prefix),
            out
        );
    }
    Ok(())
}
