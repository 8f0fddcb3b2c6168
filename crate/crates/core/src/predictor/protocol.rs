//! Framing for the external predictor protocol (stdin/stdout, little-endian).
//!
//! ```text
//! handshake  host -> "CGP1"            predictor -> "CGP1" 0x01
//! request    "RQ" | prefix_len u32 | requested_len u32 | prefix bytes
//! response   "RS" | payload_len u32 | payload bytes
//! ```
//!
//! A predictor that cannot continue may answer with `"ER" | len u32 | utf-8
//! message` before closing; hosts treat it as a protocol error.

use std::io::{self, Read, Write};

pub const HANDSHAKE: &[u8; 4] = b"CGP1";
pub const PROTOCOL_VERSION: u8 = 1;
pub const REQUEST_MAGIC: &[u8; 2] = b"RQ";
pub const RESPONSE_MAGIC: &[u8; 2] = b"RS";
pub const ERROR_MAGIC: &[u8; 2] = b"ER";

pub fn handshake_reply() -> [u8; 5] {
    let mut r = [0u8; 5];
    r[..4].copy_from_slice(HANDSHAKE);
    r[4] = PROTOCOL_VERSION;
    r
}

pub fn encode_request(prefix: &[u8], requested_len: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(10 + prefix.len());
    out.extend_from_slice(REQUEST_MAGIC);
    out.extend_from_slice(&(prefix.len() as u32).to_le_bytes());
    out.extend_from_slice(&requested_len.to_le_bytes());
    out.extend_from_slice(prefix);
    out
}

pub fn encode_response(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + payload.len());
    out.extend_from_slice(RESPONSE_MAGIC);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

pub fn encode_error(message: &str) -> Vec<u8> {
    let mut out = ERROR_MAGIC.to_vec();
    out.extend_from_slice(&(message.len() as u32).to_le_bytes());
    out.extend_from_slice(message.as_bytes());
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub prefix: Vec<u8>,
    pub requested_len: u32,
}

/// Predictor-side limits on what a host may ask for.
#[derive(Debug, Clone, Copy)]
pub struct ServeLimits {
    pub max_prefix: usize,
}

impl Default for ServeLimits {
    fn default() -> Self {
        ServeLimits { max_prefix: 1 << 24 }
    }
}

#[derive(Debug)]
pub enum ServeError {
    Io(io::Error),
    Malformed(String),
}

impl From<io::Error> for ServeError {
    fn from(e: io::Error) -> Self {
        ServeError::Io(e)
    }
}

/// Reads one request; `Ok(None)` on a clean end of stream between frames.
pub fn read_request<R: Read>(r: &mut R, limits: ServeLimits) -> Result<Option<Request>, ServeError> {
    let mut magic = [0u8; 2];
    let mut got = 0;
    while got < 2 {
        match r.read(&mut magic[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(ServeError::Malformed("stream ended inside frame".into())),
            n => got += n,
        }
    }
    if &magic != REQUEST_MAGIC {
        return Err(ServeError::Malformed(format!("bad request magic {magic:02x?}")));
    }
    let mut lens = [0u8; 8];
    r.read_exact(&mut lens)?;
    let prefix_len = u32::from_le_bytes(lens[..4].try_into().unwrap()) as usize;
    let requested_len = u32::from_le_bytes(lens[4..].try_into().unwrap());
    if prefix_len > limits.max_prefix {
        return Err(ServeError::Malformed(format!("prefix of {prefix_len} bytes")));
    }
    let mut prefix = vec![0u8; prefix_len];
    r.read_exact(&mut prefix)?;
    Ok(Some(Request {
        prefix,
        requested_len,
    }))
}

/// Predictor side of the protocol: handshake, then answer requests with
/// `generate(prefix, requested_len)` until the host closes the stream.
pub fn serve<R, W, F>(
    mut input: R,
    mut output: W,
    limits: ServeLimits,
    mut generate: F,
) -> Result<(), ServeError>
where
    R: Read,
    W: Write,
    F: FnMut(&[u8], u32) -> Vec<u8>,
{
    let mut hello = [0u8; 4];
    input.read_exact(&mut hello)?;
    if &hello != HANDSHAKE {
        output.write_all(&encode_error("bad handshake"))?;
        output.flush()?;
        return Err(ServeError::Malformed(format!("bad handshake {hello:02x?}")));
    }
    output.write_all(&handshake_reply())?;
    output.flush()?;
    loop {
        match read_request(&mut input, limits) {
            Ok(Some(req)) => {
                let payload = generate(&req.prefix, req.requested_len);
                output.write_all(&encode_response(&payload))?;
                output.flush()?;
            }
            Ok(None) => return Ok(()),
            Err(ServeError::Malformed(msg)) => {
                output.write_all(&encode_error(&msg))?;
                output.flush()?;
                return Err(ServeError::Malformed(msg));
            }
            Err(e) => return Err(e),
        }
    }
}
