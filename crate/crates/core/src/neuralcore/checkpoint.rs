//! Checkpoint layout: the magic bytes `DGCK1`, a UTF-8 JSON header padded
//! with spaces to a 64-byte boundary, then little-endian f32 blobs in
//! header order. Offsets in the header are relative to the first blob.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::store::ParamStore;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 5] = b"DGCK1";
const ALIGN: usize = 64;

#[derive(Serialize, Deserialize)]
struct Header {
    params: Vec<ParamEntry>,
    model: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    shape: Vec<usize>,
    dtype: String,
    offset: usize,
}

/// Writes parameter values (as f32) plus an opaque model description.
pub fn save_checkpoint(store: &ParamStore, model: &serde_json::Value, path: impl AsRef<Path>) -> Result<()> {
    let mut offset = 0;
    let params = store
        .iter()
        .map(|(name, p)| {
            let entry = ParamEntry {
                name: name.to_string(),
                shape: p.shape.clone(),
                dtype: "f32".into(),
                offset,
            };
            offset += p.len() * 4;
            entry
        })
        .collect();
    let header = Header {
        params,
        model: model.clone(),
    };
    let mut bytes = CHECKPOINT_MAGIC.to_vec();
    bytes.extend(serde_json::to_vec(&header)?);
    bytes.push(b'\n');
    while !bytes.len().is_multiple_of(ALIGN) {
        bytes.push(b' ');
    }
    bytes.reserve(offset);
    for (_, p) in store.iter() {
        for &v in &p.value {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a checkpoint into a fresh store and returns the model description.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ParamStore, serde_json::Value)> {
    let bytes = fs::read(path)?;
    if bytes.len() < CHECKPOINT_MAGIC.len() || &bytes[..CHECKPOINT_MAGIC.len()] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic);
    }
    let rest = &bytes[CHECKPOINT_MAGIC.len()..];
    let mut stream = serde_json::Deserializer::from_slice(rest).into_iter::<Header>();
    let header = match stream.next() {
        Some(Ok(h)) => h,
        _ => return Err(Error::BadMagic),
    };
    let header_end = CHECKPOINT_MAGIC.len() + stream.byte_offset();
    let data_start = header_end.div_ceil(ALIGN) * ALIGN;
    let mut store = ParamStore::new();
    for entry in &header.params {
        if entry.dtype != "f32" {
            return Err(Error::MalformedInput(format!("unsupported dtype {}", entry.dtype)));
        }
        let count: usize = entry.shape.iter().product();
        let start = data_start + entry.offset;
        let end = start + count * 4;
        if end > bytes.len() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                format!("checkpoint truncated inside `{}`", entry.name),
            )));
        }
        let values = bytes[start..end]
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect();
        store.insert(&entry.name, &entry.shape, values)?;
    }
    Ok((store, header.model))
}

/// Loads values into an existing store, requiring identical names and shapes.
pub fn load_checkpoint_into(path: impl AsRef<Path>, target: &mut ParamStore) -> Result<serde_json::Value> {
    let (loaded, model) = load_checkpoint(path)?;
    if loaded.len() != target.len() {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has {} parameters, model has {}",
            loaded.len(),
            target.len()
        )));
    }
    for (name, param) in loaded.iter() {
        let slot = target
            .get_mut(name)
            .ok_or_else(|| Error::ShapeMismatch(format!("model has no parameter `{name}`")))?;
        if slot.shape != param.shape {
            return Err(Error::ShapeMismatch(format!(
                "`{name}`: checkpoint {:?} vs model {:?}",
                param.shape, slot.shape
            )));
        }
        slot.value.clone_from(&param.value);
    }
    Ok(model)
}
