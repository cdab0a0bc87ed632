//! Tensor container format for parameters and checkpoints.
//!
//! Layout: an 8-byte little-endian header length, a JSON header, then the
//! concatenated tensor payloads as little-endian f64. The header carries a
//! caller-supplied metadata value (e.g. the weight-function variant or the
//! full network spec) plus one entry per tensor with its name, shape, and
//! element offset into the payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Element (not byte) offset into the payload.
    pub offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    meta: Value,
    tensors: Vec<TensorEntry>,
}

/// An in-memory tensor container, written to and read from disk verbatim.
#[derive(Debug, Clone, Default)]
pub struct TensorFile {
    pub meta: Value,
    entries: Vec<TensorEntry>,
    payload: Vec<f64>,
}

impl TensorFile {
    pub fn new(meta: Value) -> Self {
        Self { meta, entries: Vec::new(), payload: Vec::new() }
    }

    /// Append a named tensor; the data length must equal the shape product.
    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, data: &[f64]) {
        let len: usize = shape.iter().product();
        assert_eq!(len, data.len(), "tensor data length mismatch");
        self.entries.push(TensorEntry { name: name.into(), shape, offset: self.payload.len() });
        self.payload.extend_from_slice(data);
    }

    pub fn entries(&self) -> &[TensorEntry] {
        &self.entries
    }

    /// Fetch a tensor's shape and data by name.
    pub fn get(&self, name: &str) -> Result<(&[usize], &[f64])> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))?;
        let len: usize = entry.shape.iter().product();
        Ok((&entry.shape, &self.payload[entry.offset..entry.offset + len]))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path)?);
        let header = Header { meta: self.meta.clone(), tensors: self.entries.clone() };
        let header_bytes = serde_json::to_vec(&header)?;
        file.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
        file.write_all(&header_bytes)?;
        for v in &self.payload {
            file.write_all(&v.to_le_bytes())?;
        }
        file.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut file = BufReader::new(File::open(path)?);
        let mut len_bytes = [0u8; 8];
        file.read_exact(&mut len_bytes)
            .map_err(|_| Error::Checkpoint("truncated header length".into()))?;
        let header_len = u64::from_le_bytes(len_bytes) as usize;
        let mut header_bytes = vec![0u8; header_len];
        file.read_exact(&mut header_bytes)
            .map_err(|_| Error::Checkpoint("truncated header".into()))?;
        let header: Header = serde_json::from_slice(&header_bytes)?;

        let mut raw = Vec::new();
        file.read_to_end(&mut raw)?;
        if raw.len() % 8 != 0 {
            return Err(Error::Checkpoint("payload is not a whole number of f64".into()));
        }
        let payload: Vec<f64> =
            raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();

        let expected: usize = header
            .tensors
            .iter()
            .map(|e| e.offset + e.shape.iter().product::<usize>())
            .max()
            .unwrap_or(0);
        if payload.len() < expected {
            return Err(Error::Checkpoint(format!(
                "payload holds {} elements, header expects at least {expected}",
                payload.len()
            )));
        }
        Ok(Self { meta: header.meta, entries: header.tensors, payload })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip_preserves_bits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.bin");
        let mut tf = TensorFile::new(json!({"weight_fn": "cubic-poly"}));
        tf.push("theta", vec![2, 3], &[1.0, -2.5, 3.25, f64::MIN_POSITIVE, 0.0, -0.0]);
        tf.push("bias", vec![2], &[0.125, 7.0]);
        tf.write(&path).unwrap();

        let back = TensorFile::read(&path).unwrap();
        assert_eq!(back.meta["weight_fn"], "cubic-poly");
        let (shape, data) = back.get("theta").unwrap();
        assert_eq!(shape, &[2, 3]);
        assert_eq!(data[3].to_bits(), f64::MIN_POSITIVE.to_bits());
        assert_eq!(data[5].to_bits(), (-0.0f64).to_bits());
        assert!(back.get("missing").is_err());
    }

    #[test]
    fn truncated_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.bin");
        let mut tf = TensorFile::new(json!(null));
        tf.push("t", vec![4], &[1.0, 2.0, 3.0, 4.0]);
        tf.write(&path).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(TensorFile::read(&path).is_err());
    }
}
