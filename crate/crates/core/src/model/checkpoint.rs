//! Binary checkpoint format.
//!
//! ```text
//! "STCK" | u16 LE version = 1 | u32 LE spec length | spec text (UTF-8, key=value lines)
//!        | parameters as little-endian f32, storage order, no padding
//! ```
//! The spec text carries one extra `seed=` line for the model's init seed.

use std::fs;
use std::path::Path;

use super::{Model, NetworkSpec};
use crate::error::{Error, Result};
use crate::tensor::{Element, Tensor};

const MAGIC: &[u8; 4] = b"STCK";
const VERSION: u16 = 1;

pub fn encode_checkpoint<T: Element>(model: &Model<T>) -> Vec<u8> {
    let text = format!("{}seed={}\n", model.spec().to_text(), model.seed());
    let n_values: usize = model.params().iter().map(|p| p.value.len()).sum();
    let mut out = Vec::with_capacity(10 + text.len() + 4 * n_values);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(text.len() as u32).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    for p in model.params() {
        for &v in p.value.data() {
            out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Checkpoint(format!("truncated while reading {what}")));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

pub fn decode_checkpoint(mut bytes: &[u8]) -> Result<Model<f32>> {
    let magic = take(&mut bytes, 4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:?}")));
    }
    let version = u16::from_le_bytes(take(&mut bytes, 2, "version")?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(take(&mut bytes, 4, "spec length")?.try_into().unwrap()) as usize;
    let text = std::str::from_utf8(take(&mut bytes, len, "spec")?)
        .map_err(|_| Error::Checkpoint("spec is not valid UTF-8".into()))?;
    let spec = NetworkSpec::from_text(text).map_err(|e| Error::Checkpoint(format!("bad spec: {e}")))?;
    let seed = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("seed="))
        .map(|s| s.parse::<u64>())
        .transpose()
        .map_err(|_| Error::Checkpoint("bad seed line".into()))?
        .unwrap_or(0);

    let mut values = Vec::new();
    for shape in spec.param_shapes()? {
        let n: usize = shape.iter().product();
        let raw = take(&mut bytes, 4 * n, "parameters")?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        values.push(Tensor::new(shape, data)?);
    }
    if !bytes.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes after parameters", bytes.len())));
    }
    Model::from_values(spec, values, seed)
}

pub fn save_checkpoint<T: Element>(model: &Model<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Model<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

/// Loads a checkpoint and insists its architecture equals `expected`.
pub fn load_checkpoint_expecting(path: impl AsRef<Path>, expected: &NetworkSpec) -> Result<Model<f32>> {
    let model = load_checkpoint(path)?;
    if model.spec() != expected {
        let (have, want) = (model.spec().to_text(), expected.to_text());
        let diff: Vec<String> = have
            .lines()
            .zip(want.lines())
            .filter(|(a, b)| a != b)
            .map(|(a, b)| format!("{a} (expected {b})"))
            .collect();
        return Err(Error::Checkpoint(format!("architecture mismatch: {}", diff.join("; "))));
    }
    Ok(model)
}
