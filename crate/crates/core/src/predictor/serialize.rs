//! Binary model files.
//!
//! Layout, little-endian:
//!
//! ```text
//! "CGBM" | version u8 | order u8 | smoothing f64 | training digest [32]
//! per level 0..=order:
//!     context count u32
//!     per context (ascending key): key bytes [level] | n u16 | n x (byte u8, count u32)
//! SHA-256 of everything above [32]
//! ```

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::model::{context_key, ByteModel, Successors, MAX_ORDER};
use super::PredictError;

const MAGIC: &[u8; 4] = b"CGBM";
pub const MODEL_FORMAT_VERSION: u8 = 1;
const PREAMBLE_LEN: usize = 4 + 1 + 1 + 8 + 32;
const CHECKSUM_LEN: usize = 32;

pub fn save_model(model: &ByteModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(MODEL_FORMAT_VERSION);
    out.push(model.order as u8);
    out.extend_from_slice(&model.smoothing.to_le_bytes());
    out.extend_from_slice(&model.training_digest);
    for (len, level) in model.levels.iter().enumerate() {
        let mut keys: Vec<u64> = level.keys().copied().collect();
        keys.sort_unstable();
        out.extend_from_slice(&(keys.len() as u32).to_le_bytes());
        for key in keys {
            out.extend_from_slice(&key.to_be_bytes()[8 - len..]);
            let s = &level[&key];
            out.extend_from_slice(&(s.counts.len() as u16).to_le_bytes());
            for &(b, c) in &s.counts {
                out.push(b);
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    let sum = Sha256::digest(&out);
    out.extend_from_slice(&sum);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PredictError> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| PredictError::CorruptModel(format!("truncated at byte {}", self.at)))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, PredictError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, PredictError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load_model(bytes: &[u8]) -> Result<ByteModel, PredictError> {
    if bytes.len() < PREAMBLE_LEN + CHECKSUM_LEN || &bytes[..4] != MAGIC {
        return Err(PredictError::CorruptModel("not a model file".into()));
    }
    if bytes[4] != MODEL_FORMAT_VERSION {
        return Err(PredictError::VersionMismatch {
            found: bytes[4],
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let (body, sum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != sum {
        return Err(PredictError::CorruptModel("checksum mismatch".into()));
    }

    let order = body[5] as usize;
    if order > MAX_ORDER {
        return Err(PredictError::CorruptModel(format!("order {order}")));
    }
    let smoothing = f64::from_le_bytes(body[6..14].try_into().unwrap());
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(PredictError::CorruptModel(format!("smoothing {smoothing}")));
    }
    let training_digest: [u8; 32] = body[14..46].try_into().unwrap();

    let mut cur = Cursor {
        bytes: body,
        at: PREAMBLE_LEN,
    };
    let mut levels = Vec::with_capacity(order + 1);
    for len in 0..=order {
        let n = cur.u32()? as usize;
        let mut level = HashMap::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let key = context_key(cur.take(len)?);
            let m = cur.u16()? as usize;
            if m == 0 || m > 256 {
                return Err(PredictError::CorruptModel(format!("{m} successors")));
            }
            let mut s = Successors::default();
            for _ in 0..m {
                let b = cur.take(1)?[0];
                let c = cur.u32()?;
                if s.counts.last().is_some_and(|&(prev, _)| prev >= b) || c == 0 {
                    return Err(PredictError::CorruptModel("successor table out of order".into()));
                }
                s.total += c as u64;
                s.counts.push((b, c));
            }
            if level.insert(key, s).is_some() {
                return Err(PredictError::CorruptModel("duplicate context".into()));
            }
        }
        levels.push(level);
    }
    if cur.at != body.len() {
        return Err(PredictError::CorruptModel("trailing bytes".into()));
    }
    Ok(ByteModel {
        order,
        smoothing,
        training_digest,
        levels,
    })
}

/// Short identifier for predictions made with `model`.
pub fn model_id(model: &ByteModel) -> String {
    let digest = hex::encode(Sha256::digest(save_model(model)));
    format!("order{}-a{}/{}", model.order, model.smoothing, &digest[..16])
}
